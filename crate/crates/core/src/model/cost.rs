//! Closed-form parameter counts and operation-count estimates.

/// Parameter counts for the LSTM layer and its dense head.
///
/// The LSTM uses the dual-bias convention, so the layer holds
/// `4·(d·h + h² + 2h)` parameters; the dense head adds `(h+1)·C`.
/// For (d, h) = (75, 128) this gives 104,960 and 129·C.
pub fn param_count(input_dim: usize, hidden_dim: usize, class_count: usize) -> (u64, u64) {
    let d = input_dim as u64;
    let h = hidden_dim as u64;
    let c = class_count as u64;
    (4 * (d * h + h * h + 2 * h), (h + 1) * c)
}

/// Architectures covered by the asymptotic cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    Lstm,
    Transformer,
    Gcn,
}

/// Leading-order operation count per layer:
/// `T·(d·h + h²)` for an LSTM, `T²·d` for self-attention, `E·d` for a graph
/// convolution over `E` edges (`edges` is ignored otherwise).
pub fn cost_model(
    arch: Architecture,
    seq_len: usize,
    input_dim: usize,
    hidden_dim: usize,
    edges: usize,
) -> u64 {
    debug_assert!(seq_len >= 1 && input_dim >= 1);
    debug_assert!(arch != Architecture::Lstm || hidden_dim >= 1);
    debug_assert!(arch != Architecture::Gcn || edges >= 1);
    let t = seq_len as u64;
    let d = input_dim as u64;
    let h = hidden_dim as u64;
    match arch {
        Architecture::Lstm => t * (d * h + h * h),
        Architecture::Transformer => t * t * d,
        Architecture::Gcn => edges as u64 * d,
    }
}
