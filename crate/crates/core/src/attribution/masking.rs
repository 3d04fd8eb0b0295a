//! Zero-masking of feature cells.

use super::MaskSpec;
use crate::data::FeatureSequence;
use crate::error::{Result, TshapError};

/// Returns a copy of `x` with every masked cell set to exactly 0; the input
/// is never mutated.
pub fn mask_features(x: &FeatureSequence, mask: &MaskSpec) -> Result<FeatureSequence> {
    let mut out = x.clone();
    for &(t, feature) in mask.cells() {
        if t >= x.len() || feature >= x.data.cols() {
            return Err(TshapError::invalid(format!(
                "mask cell ({t}, {feature}) out of bounds for {}x{}",
                x.len(),
                x.data.cols()
            )));
        }
        out.data.set(t, feature, 0.0);
    }
    Ok(out)
}
