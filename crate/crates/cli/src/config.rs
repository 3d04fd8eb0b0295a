//! Experiment configuration: one JSON file, documented defaults, and
//! `--set key=value` overrides with precedence CLI > file > defaults.

use serde::{Deserialize, Serialize};

use tshap_core::data::GeneratorConfig;
use tshap_core::metrics::AttributionMethod;
use tshap_core::model::ModelConfig;
use tshap_core::smoothing::SmoothingConfig;
use tshap_core::{Result, TshapError};

/// Attribution settings for the explain/evaluate commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttributionSettings {
    /// `grouped` (six body parts, exact-capable) or `per_feature`
    /// (75 players, sampled only).
    pub granularity: GranularityChoice,
    /// `exact` or `sampled`.
    pub mode: ShapModeChoice,
    /// Permutations per frame in sampled mode.
    pub n_permutations: usize,
    /// Methods to run besides the T-SHAP variants.
    pub methods: Vec<MethodChoice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GranularityChoice {
    Grouped,
    PerFeature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapModeChoice {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Shap,
    Saliency,
    Gradcam,
}

impl Default for AttributionSettings {
    fn default() -> Self {
        Self {
            granularity: GranularityChoice::Grouped,
            mode: ShapModeChoice::Sampled,
            n_permutations: 16,
            methods: vec![MethodChoice::Shap, MethodChoice::Saliency, MethodChoice::Gradcam],
        }
    }
}

/// Evaluation grid and workload caps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationSettings {
    /// Cumulative masking fractions; defaults to {0.05, …, 0.50}.
    pub fractions: Vec<f64>,
    /// Max test sequences scored per fold (0 = all).
    pub eval_sequences_per_fold: usize,
    /// Rank masking cells by |attribution| instead of signed values.
    pub abs_rank: bool,
    /// Timed runs for the latency profile.
    pub latency_runs: usize,
    pub latency_warmup: usize,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        Self {
            fractions: tshap_core::metrics::default_fraction_grid(),
            eval_sequences_per_fold: 8,
            abs_rank: false,
            latency_runs: 3,
            latency_warmup: 1,
        }
    }
}

/// The resolved experiment configuration.
///
/// Defaults: T = 100, 128 hidden units,
/// learning rate 0.001, batch size 32, k = 5 folds, smoothing window w = 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    pub model: ModelConfig,
    pub attribution: AttributionSettings,
    /// T-SHAP smoothing configurations to compare (raw is always included).
    pub smoothing: Vec<SmoothingConfig>,
    pub evaluation: EvaluationSettings,
    /// Number of cross-validation folds.
    pub k: usize,
    /// Global seed for the fold split and derived evaluation streams.
    pub seed: u64,
    /// Output root; flag > config > $TSHAP_OUT_ROOT > "tshap_out".
    pub output_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            generator: GeneratorConfig::default(),
            model: ModelConfig::default(),
            attribution: AttributionSettings::default(),
            smoothing: vec![SmoothingConfig::uniform(2)],
            evaluation: EvaluationSettings::default(),
            k: 5,
            seed: 7,
            output_dir: default_output_dir(),
        }
    }
}

pub fn default_output_dir() -> String {
    std::env::var("TSHAP_OUT_ROOT").unwrap_or_else(|_| "tshap_out".to_string())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.generator
            .validate()
            .map_err(|e| TshapError::invalid(format!("generator: {e}")))?;
        self.model
            .validate()
            .map_err(|e| TshapError::invalid(format!("model: {e}")))?;
        if self.k < 2 {
            return Err(TshapError::invalid("k: must be >= 2"));
        }
        if self.generator.n_per_class < self.k {
            return Err(TshapError::invalid(format!(
                "k: {} folds need at least that many subjects, generator.n_per_class is {}",
                self.k, self.generator.n_per_class
            )));
        }
        if self.attribution.n_permutations < 1 {
            return Err(TshapError::invalid("attribution.n_permutations: must be >= 1"));
        }
        if self.attribution.mode == ShapModeChoice::Exact
            && self.attribution.granularity == GranularityChoice::PerFeature
        {
            return Err(TshapError::invalid(
                "attribution: exact mode needs grouped granularity (75 players exceed \
                 the enumeration bound)",
            ));
        }
        for (i, cfg) in self.smoothing.iter().enumerate() {
            cfg.validate()
                .map_err(|e| TshapError::invalid(format!("smoothing[{i}]: {e}")))?;
        }
        if self.evaluation.fractions.is_empty() {
            return Err(TshapError::invalid("evaluation.fractions: must be non-empty"));
        }
        for pair in self.evaluation.fractions.windows(2) {
            if pair[1] <= pair[0] {
                return Err(TshapError::invalid(
                    "evaluation.fractions: must be strictly ascending",
                ));
            }
        }
        if self
            .evaluation
            .fractions
            .iter()
            .any(|f| !(0.0..=1.0).contains(f))
        {
            return Err(TshapError::invalid("evaluation.fractions: must lie in [0, 1]"));
        }
        if self.evaluation.latency_runs < 1 {
            return Err(TshapError::invalid("evaluation.latency_runs: must be >= 1"));
        }
        if self.output_dir.is_empty() {
            return Err(TshapError::invalid("output_dir: must be non-empty"));
        }
        Ok(())
    }

    /// The methods the harness will run, in config order.
    pub fn method_list(&self) -> Vec<AttributionMethod> {
        self.attribution
            .methods
            .iter()
            .map(|m| match m {
                MethodChoice::Shap => match self.attribution.mode {
                    ShapModeChoice::Exact => AttributionMethod::ShapExact,
                    ShapModeChoice::Sampled => AttributionMethod::ShapSampled {
                        n_permutations: self.attribution.n_permutations,
                    },
                },
                MethodChoice::Saliency => AttributionMethod::Saliency,
                MethodChoice::Gradcam => AttributionMethod::GradCam,
            })
            .collect()
    }

    pub fn grouping(&self) -> tshap_core::attribution::Grouping {
        match self.attribution.granularity {
            GranularityChoice::Grouped => tshap_core::attribution::Grouping::body_parts(),
            GranularityChoice::PerFeature => tshap_core::attribution::Grouping::per_feature(),
        }
    }

    /// FNV-1a hash of the canonical JSON encoding, hex-formatted.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in canonical.as_bytes() {
            hash ^= *byte as u64;
            hash = hash.wrapping_mul(0x1000_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

/// Deep-merges `overlay` onto `base` (objects recurse, everything else
/// replaces).
fn merge_json(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(base_map), serde_json::Value::Object(overlay_map)) => {
            for (key, value) in overlay_map {
                match base_map.get_mut(&key) {
                    Some(slot) => merge_json(slot, value),
                    None => {
                        base_map.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

/// Sets a dotted path like `model.hidden_dim` to a parsed JSON value
/// (falling back to a string when the value is not valid JSON).
fn apply_set(root: &mut serde_json::Value, key: &str, raw_value: &str) -> Result<()> {
    let value: serde_json::Value = serde_json::from_str(raw_value)
        .unwrap_or_else(|_| serde_json::Value::String(raw_value.to_string()));
    let mut cursor = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let object = cursor.as_object_mut().ok_or_else(|| {
            TshapError::invalid(format!("--set {key}: `{}` is not an object", parts[..i].join(".")))
        })?;
        if i + 1 == parts.len() {
            object.insert((*part).to_string(), value);
            return Ok(());
        }
        cursor = object
            .entry((*part).to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Err(TshapError::invalid(format!("--set {key}: empty key")))
}

/// Resolves the configuration: defaults, then the optional file, then
/// `--set` overrides, then the `--out` flag; validates the result.
pub fn resolve_config(
    file: Option<&std::path::Path>,
    sets: &[String],
    out_flag: Option<&str>,
) -> Result<ExperimentConfig> {
    let mut value = serde_json::to_value(ExperimentConfig::default())?;

    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| {
            TshapError::invalid(format!("config file {}: {e}", path.display()))
        })?;
        let overlay: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| TshapError::invalid(format!("config file {}: {e}", path.display())))?;
        if !overlay.is_object() {
            return Err(TshapError::invalid("config file must be a JSON object"));
        }
        merge_json(&mut value, overlay);
    }

    for entry in sets {
        let (key, raw_value) = entry.split_once('=').ok_or_else(|| {
            TshapError::invalid(format!("--set `{entry}`: expected key=value"))
        })?;
        apply_set(&mut value, key.trim(), raw_value)?;
    }

    let mut config: ExperimentConfig = serde_json::from_value(value)
        .map_err(|e| TshapError::invalid(format!("config: {e}")))?;
    if let Some(dir) = out_flag {
        config.output_dir = dir.to_string();
    }
    config.validate()?;
    Ok(config)
}
