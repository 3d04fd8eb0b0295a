//! Wall-clock profiling of explanation workloads.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TshapError};
use crate::linalg::{mean, sample_std};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean_ms: f64,
    pub sd_ms: f64,
    pub p95_ms: f64,
    pub n_runs: usize,
}

/// Times `task` with a monotonic clock: `warmup` untimed runs, then
/// `n_runs` timed runs. The standard deviation uses the sample convention
/// and is 0 for a single run; p95 is the ceil-index order statistic.
pub fn latency_profile(
    mut task: impl FnMut(),
    n_runs: usize,
    warmup: usize,
) -> Result<LatencyStats> {
    if n_runs < 1 {
        return Err(TshapError::invalid("n_runs must be >= 1"));
    }
    for _ in 0..warmup {
        task();
    }
    let mut samples_ms = Vec::with_capacity(n_runs);
    for _ in 0..n_runs {
        let start = Instant::now();
        task();
        samples_ms.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let mut sorted = samples_ms.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p95_index = ((0.95 * n_runs as f64).ceil() as usize).clamp(1, n_runs) - 1;
    Ok(LatencyStats {
        mean_ms: mean(&samples_ms),
        sd_ms: sample_std(&samples_ms),
        p95_ms: sorted[p95_index],
        n_runs,
    })
}
