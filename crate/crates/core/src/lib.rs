//! Sequence classification with temporally smoothed Shapley attributions.
//!
//! The library covers the full experiment pipeline on synthetic skeleton
//! data:
//!
//! * [`data`] — synthetic motion generation, normalization, resampling,
//!   vectorization, and subject-level k-fold splits;
//! * [`model`] — a single-layer LSTM classifier and a 1D-CNN baseline with
//!   hand-derived reverse-mode gradients, Adam training, and cost models;
//! * [`attribution`] — exact and permutation-sampled Shapley values per
//!   frame, input×gradient saliency, and Grad-CAM on the CNN baseline;
//! * [`smoothing`] — windowed and exponentially weighted temporal smoothing
//!   of attribution maps, including the banded operator form;
//! * [`metrics`] — temporal variance, perturbation curves and their area
//!   summary, per-joint magnitude profiles, latency profiling, and a paired
//!   t-test for fold-level comparisons.
//!
//! Everything is deterministic given the configured seeds; see [`rng`].

pub mod attribution;
pub mod data;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod smoothing;

pub use error::{Result, TshapError};
