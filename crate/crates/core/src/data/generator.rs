//! Deterministic synthetic motion generator.
//!
//! Four activity classes over a canonical 25-joint standing pose:
//!
//! * `fall` — rapid mid-sequence collapse: the hip base loses more than half
//!   a body height within at most 15% of the sequence, with extra jitter on
//!   the leg joints around impact.
//! * `sit` — slow hip descent to chair height.
//! * `stand` — slow ascent from seated to standing; with zero noise every
//!   joint's vertical track is non-decreasing or constant.
//! * `pickup` — trunk flexion toward the floor and back with the hips held
//!   at constant height.
//!
//! Everything is a pure function of `(cfg.seed, subject_id, instance_seed)`.

use super::{Frame, RawSkeletonSequence, COORDS, JOINT_COUNT, VERTICAL};
use crate::error::{Result, TshapError};
use crate::rng::SplitMix64;

/// Canonical standing pose in meters (x lateral, y vertical, z depth).
/// Indices follow the joint table in the README.
const BASE_POSE: [[f64; 3]; JOINT_COUNT] = [
    [0.00, 1.00, 0.00],  // 0  spine base (hip)
    [0.00, 1.20, 0.00],  // 1  spine mid
    [0.00, 1.50, 0.00],  // 2  neck
    [0.00, 1.65, 0.00],  // 3  head
    [-0.20, 1.45, 0.00], // 4  left shoulder
    [-0.25, 1.15, 0.00], // 5  left elbow
    [-0.27, 0.90, 0.00], // 6  left wrist
    [-0.28, 0.82, 0.00], // 7  left hand
    [0.20, 1.45, 0.00],  // 8  right shoulder
    [0.25, 1.15, 0.00],  // 9  right elbow
    [0.27, 0.90, 0.00],  // 10 right wrist
    [0.28, 0.82, 0.00],  // 11 right hand
    [-0.10, 0.95, 0.00], // 12 left hip
    [-0.11, 0.50, 0.00], // 13 left knee
    [-0.12, 0.10, 0.00], // 14 left ankle
    [-0.12, 0.03, 0.08], // 15 left foot
    [0.10, 0.95, 0.00],  // 16 right hip
    [0.11, 0.50, 0.00],  // 17 right knee
    [0.12, 0.10, 0.00],  // 18 right ankle
    [0.12, 0.03, 0.08],  // 19 right foot
    [0.00, 1.40, 0.00],  // 20 spine shoulder
    [-0.29, 0.76, 0.00], // 21 left hand tip
    [-0.26, 0.78, 0.02], // 22 left thumb
    [0.29, 0.76, 0.00],  // 23 right hand tip
    [0.26, 0.78, 0.02],  // 24 right thumb
];

/// Joints translated as a block when the hips move vertically (everything
/// except knees, ankles, and feet).
const UPPER_BODY: [usize; 19] = [
    0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 16, 20, 21, 22, 23, 24,
];
/// Leg joints that receive extra jitter during a fall.
const LOWER_LIMBS: [usize; 8] = [12, 13, 14, 15, 16, 17, 18, 19];
/// Joints swept forward/down during trunk flexion (head, trunk top, arms).
const FLEXION_JOINTS: [usize; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 20, 21];

const CLASS_COUNT: usize = 4;

/// The four synthetic activity classes. `Fall` (label 0) is the positive
/// class in binary mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivityClass {
    Fall = 0,
    Sit = 1,
    Stand = 2,
    Pickup = 3,
}

impl ActivityClass {
    pub fn from_label(label: usize) -> Result<Self> {
        match label {
            0 => Ok(Self::Fall),
            1 => Ok(Self::Sit),
            2 => Ok(Self::Stand),
            3 => Ok(Self::Pickup),
            other => Err(TshapError::invalid(format!(
                "unknown class label {other}; expected 0..{CLASS_COUNT}"
            ))),
        }
    }

    pub fn all() -> [ActivityClass; CLASS_COUNT] {
        [Self::Fall, Self::Sit, Self::Stand, Self::Pickup]
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Fall => "fall",
            Self::Sit => "sit",
            Self::Stand => "stand",
            Self::Pickup => "pickup",
        }
    }

    pub fn label(self) -> usize {
        self as usize
    }

    pub fn count() -> usize {
        CLASS_COUNT
    }
}

/// Generator settings; all randomness derives from `seed`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Sequences per class; subject `i` performs every class once, so this is
    /// also the number of distinct subjects.
    pub n_per_class: usize,
    /// Standard deviation of Gaussian noise added to every joint coordinate.
    pub noise_std: f64,
    /// Inclusive range of raw frame counts before resampling.
    pub raw_length_range: (usize, usize),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 17,
            n_per_class: 50,
            noise_std: 0.02,
            raw_length_range: (60, 140),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let (min, max) = self.raw_length_range;
        if min < 1 {
            return Err(TshapError::invalid("raw_length_range minimum must be >= 1"));
        }
        if min > max {
            return Err(TshapError::invalid(format!(
                "raw_length_range minimum {min} exceeds maximum {max}"
            )));
        }
        if !self.noise_std.is_finite() || self.noise_std < 0.0 {
            return Err(TshapError::invalid("noise_std must be finite and >= 0"));
        }
        if self.n_per_class == 0 {
            return Err(TshapError::invalid("n_per_class must be >= 1"));
        }
        Ok(())
    }
}

/// Smooth 0→1 ramp with zero slope at both ends.
fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

/// Monotone cosine ease restricted to `[start, end]` of the unit interval.
fn eased_progress(s: f64, start: f64, end: f64) -> f64 {
    let u = ((s - start) / (end - start)).clamp(0.0, 1.0);
    0.5 - 0.5 * (std::f64::consts::PI * u).cos()
}

struct SubjectTraits {
    scale: f64,
    tempo: f64,
}

fn subject_traits(cfg_seed: u64, subject_id: u32) -> SubjectTraits {
    let mut rng = SplitMix64::from_path(cfg_seed, &[0, subject_id as u64]);
    SubjectTraits {
        scale: rng.uniform(0.92, 1.08),
        tempo: rng.uniform(0.9, 1.1),
    }
}

/// Generates one synthetic sequence.
///
/// Deterministic for fixed `(cfg.seed, class_label, subject_id, instance_seed)`.
pub fn synth_sequence(
    cfg: &GeneratorConfig,
    class_label: usize,
    subject_id: u32,
    instance_seed: u64,
) -> Result<RawSkeletonSequence> {
    cfg.validate()?;
    let class = ActivityClass::from_label(class_label)?;
    let traits = subject_traits(cfg.seed, subject_id);

    let mut rng = SplitMix64::from_path(cfg.seed, &[1, instance_seed]);
    let (min_len, max_len) = cfg.raw_length_range;
    let length = min_len + rng.next_below((max_len - min_len + 1) as u64) as usize;

    let mut frames = Vec::with_capacity(length);
    let denom = (length.max(2) - 1) as f64;

    // Every recording starts with a class-neutral hold of the initial pose
    // (like the lead-in frames of real motion clips); the action itself
    // occupies the remainder.
    let idle_end = rng.uniform(0.35, 0.55);
    // Class-specific event placement within the active span.
    let fall_center = rng.uniform(0.45, 0.58);
    let fall_width = 0.10; // fraction of the active span; under the 15% bound
    let fall_depth = rng.uniform(0.86, 0.92); // meters the hip loses, pre-scale

    for t in 0..length {
        let raw_progress = (t as f64 / denom) * traits.tempo.min(1.0);
        let s = ((raw_progress - idle_end) / (1.0 - idle_end)).clamp(0.0, 1.0);
        let mut frame: Frame = BASE_POSE;

        match class {
            ActivityClass::Fall => {
                let drop = smoothstep((s - (fall_center - fall_width / 2.0)) / fall_width);
                // Blend toward a lying pose: vertical collapses, depth spreads.
                for j in 0..JOINT_COUNT {
                    let standing = BASE_POSE[j];
                    let lying = [
                        standing[0],
                        0.06 + 0.06 * standing[0].abs(),
                        0.15 + 0.85 * standing[1],
                    ];
                    for c in 0..COORDS {
                        frame[j][c] = standing[c] + (lying[c] - standing[c]) * drop;
                    }
                }
                // Guarantee the hip loses at least the configured depth.
                frame[0][VERTICAL] = BASE_POSE[0][VERTICAL] - fall_depth * drop;
                // Elevated lower-limb jitter around and after impact.
                let jitter = 0.035 * drop;
                if jitter > 0.0 {
                    for &j in &LOWER_LIMBS {
                        for value in frame[j].iter_mut() {
                            *value += rng.normal(0.0, jitter);
                        }
                    }
                }
            }
            ActivityClass::Sit => {
                let descent = 0.45 * eased_progress(s, 0.15, 0.85);
                for &j in &UPPER_BODY {
                    frame[j][VERTICAL] -= descent;
                }
                // Knees slide forward as the hips drop.
                frame[13][2] += 0.25 * (descent / 0.45);
                frame[17][2] += 0.25 * (descent / 0.45);
            }
            ActivityClass::Stand => {
                // Seated start rising to the standing pose; strictly monotone
                // vertical tracks when noise_std = 0.
                let remaining = 0.45 * (1.0 - eased_progress(s, 0.1, 0.9));
                for &j in &UPPER_BODY {
                    frame[j][VERTICAL] -= remaining;
                }
            }
            ActivityClass::Pickup => {
                // Bend down, grasp, straighten; the recovery ends past the
                // sequence so the final frames keep residual flexion.
                let flex = smoothstep(eased_progress(s, 0.2, 0.5))
                    - smoothstep(eased_progress(s, 0.7, 1.2));
                for &j in &FLEXION_JOINTS {
                    let height_above_hip = (BASE_POSE[j][VERTICAL] - BASE_POSE[0][VERTICAL]).max(0.0);
                    // Upper joints arc forward and down; hips stay put.
                    frame[j][VERTICAL] -= flex * (0.45 + 0.55 * height_above_hip);
                    frame[j][2] += flex * (0.25 + 0.55 * height_above_hip);
                }
            }
        }

        for joint in frame.iter_mut() {
            for value in joint.iter_mut() {
                *value *= traits.scale;
                if cfg.noise_std > 0.0 {
                    *value += rng.normal(0.0, cfg.noise_std);
                }
            }
        }
        frames.push(frame);
    }

    RawSkeletonSequence::new(frames, subject_id, class_label)
}

/// Generates the full dataset: `n_per_class` sequences per class, subject `i`
/// performing each class once. Ordering is class-major, so
/// `seq_id = class * n_per_class + i`.
pub fn generate_dataset(cfg: &GeneratorConfig) -> Result<Vec<RawSkeletonSequence>> {
    cfg.validate()?;
    let mut sequences = Vec::with_capacity(ActivityClass::count() * cfg.n_per_class);
    for class in ActivityClass::all() {
        for i in 0..cfg.n_per_class {
            let instance_seed = (class.label() * cfg.n_per_class + i) as u64;
            sequences.push(synth_sequence(cfg, class.label(), i as u32, instance_seed)?);
        }
    }
    Ok(sequences)
}
