//! Preprocessing chain: hip-centered normalization, fixed-length temporal
//! resampling, and flattening to the T×75 feature matrix.

use super::{
    FeatureSequence, Frame, RawSkeletonSequence, COORDS, FEATURE_DIM, HIP_JOINT, JOINT_COUNT,
    VERTICAL,
};
use crate::error::{Result, TshapError};
use crate::linalg::Mat;

/// Centers every frame on the hip-base joint and rescales so the vertical
/// extent of the centered sequence is exactly 1.
///
/// The height divisor is computed once per sequence (not per frame) so the
/// temporal dynamics are scaled uniformly. Idempotent, and invariant to rigid
/// translation and positive scaling of the input.
pub fn normalize(seq: &RawSkeletonSequence) -> Result<RawSkeletonSequence> {
    let mut centered: Vec<Frame> = Vec::with_capacity(seq.length());
    for frame in &seq.frames {
        let hip = frame[HIP_JOINT];
        let mut out: Frame = [[0.0; COORDS]; JOINT_COUNT];
        for (j, joint) in frame.iter().enumerate() {
            for c in 0..COORDS {
                out[j][c] = joint[c] - hip[c];
            }
        }
        centered.push(out);
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for frame in &centered {
        for joint in frame.iter() {
            lo = lo.min(joint[VERTICAL]);
            hi = hi.max(joint[VERTICAL]);
        }
    }
    let height = hi - lo;
    if height <= 0.0 {
        return Err(TshapError::degenerate(format!(
            "body height must be positive, got {height}"
        )));
    }

    for frame in &mut centered {
        for joint in frame.iter_mut() {
            for c in joint.iter_mut() {
                *c /= height;
            }
        }
    }
    RawSkeletonSequence::new(centered, seq.subject_id, seq.class_label)
}

/// Standardizes the frame count to `target_len`: uniform index sampling when
/// too long, trailing zero-frame padding when too short.
pub fn resample(seq: &RawSkeletonSequence, target_len: usize) -> Result<RawSkeletonSequence> {
    if target_len < 1 {
        return Err(TshapError::invalid("target length must be >= 1"));
    }
    let len = seq.length();
    let frames = if len > target_len {
        (0..target_len)
            .map(|k| seq.frames[k * len / target_len])
            .collect()
    } else if len < target_len {
        let mut frames = seq.frames.clone();
        frames.resize(target_len, [[0.0; COORDS]; JOINT_COUNT]);
        frames
    } else {
        seq.frames.clone()
    };
    RawSkeletonSequence::new(frames, seq.subject_id, seq.class_label)
}

/// Flattens each frame into a 75-entry row: (joint 0 x,y,z, joint 1 x,y,z, …).
/// Entry (t, 3j + c) is coordinate c of joint j at frame t.
pub fn vectorize(seq: &RawSkeletonSequence) -> Result<FeatureSequence> {
    let t_len = seq.length();
    let mut data = Mat::zeros(t_len, FEATURE_DIM);
    for (t, frame) in seq.frames.iter().enumerate() {
        let row = data.row_mut(t);
        for (j, joint) in frame.iter().enumerate() {
            row[j * COORDS..(j + 1) * COORDS].copy_from_slice(joint);
        }
    }
    FeatureSequence::new(data, seq.class_label, seq.subject_id)
}

/// Inverse of [`vectorize`].
pub fn devectorize(fs: &FeatureSequence) -> Result<RawSkeletonSequence> {
    let mut frames = Vec::with_capacity(fs.len());
    for t in 0..fs.len() {
        let row = fs.data.row(t);
        let mut frame: Frame = [[0.0; COORDS]; JOINT_COUNT];
        for j in 0..JOINT_COUNT {
            frame[j].copy_from_slice(&row[j * COORDS..(j + 1) * COORDS]);
        }
        frames.push(frame);
    }
    RawSkeletonSequence::new(frames, fs.subject_id, fs.label)
}

/// Full chain: normalize → resample to `target_len` → vectorize.
pub fn preprocess(seq: &RawSkeletonSequence, target_len: usize) -> Result<FeatureSequence> {
    vectorize(&resample(&normalize(seq)?, target_len)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_sequence, GeneratorConfig};

    fn sample_seq() -> RawSkeletonSequence {
        synth_sequence(&GeneratorConfig::default(), 0, 1, 5).unwrap()
    }

    #[test]
    fn hip_at_origin_after_normalize() {
        let normalized = normalize(&sample_seq()).unwrap();
        for frame in &normalized.frames {
            assert_eq!(frame[HIP_JOINT], [0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn normalize_is_idempotent() {
        let once = normalize(&sample_seq()).unwrap();
        let twice = normalize(&once).unwrap();
        for (a, b) in once.frames.iter().zip(&twice.frames) {
            for (ja, jb) in a.iter().zip(b.iter()) {
                for (ca, cb) in ja.iter().zip(jb.iter()) {
                    assert!((ca - cb).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn normalize_invariant_to_scale_and_translation() {
        let seq = sample_seq();
        let mut moved = seq.clone();
        for frame in &mut moved.frames {
            for joint in frame.iter_mut() {
                for c in joint.iter_mut() {
                    *c = *c * 2.0 + 1.0;
                }
            }
        }
        let a = normalize(&seq).unwrap();
        let b = normalize(&moved).unwrap();
        for (fa, fb) in a.frames.iter().zip(&b.frames) {
            for (ja, jb) in fa.iter().zip(fb.iter()) {
                for (ca, cb) in ja.iter().zip(jb.iter()) {
                    assert!((ca - cb).abs() <= 1e-12, "{ca} vs {cb}");
                }
            }
        }
    }

    #[test]
    fn normalize_rejects_zero_height() {
        let frames = vec![[[1.0; COORDS]; JOINT_COUNT]; 3];
        let seq = RawSkeletonSequence::new(frames, 0, 1).unwrap();
        assert!(matches!(
            normalize(&seq),
            Err(TshapError::DegenerateInput(_))
        ));
    }

    #[test]
    fn resample_identity_when_equal() {
        let seq = sample_seq();
        let len = seq.length();
        let out = resample(&seq, len).unwrap();
        assert_eq!(out, seq);
    }

    #[test]
    fn resample_pads_with_zero_frames() {
        let seq = resample(&sample_seq(), 50).unwrap();
        let out = resample(&seq, 100).unwrap();
        assert_eq!(out.frames[..50], seq.frames[..]);
        for frame in &out.frames[50..] {
            assert_eq!(*frame, [[0.0; COORDS]; JOINT_COUNT]);
        }
    }

    #[test]
    fn resample_downsamples_by_index_rule() {
        // Index oracle: floor(k * 200 / 100) = 2k.
        let base = sample_seq();
        let long = resample(&base, 200).unwrap();
        let long = RawSkeletonSequence::new(
            (0..200)
                .map(|t| {
                    let mut f = long.frames[t];
                    f[1][0] = t as f64; // stamp each frame uniquely
                    f
                })
                .collect(),
            base.subject_id,
            base.class_label,
        )
        .unwrap();
        let short = resample(&long, 100).unwrap();
        for (k, frame) in short.frames.iter().enumerate() {
            assert_eq!(frame[1][0], (2 * k) as f64);
        }
    }

    #[test]
    fn vectorize_layout_and_roundtrip() {
        let seq = resample(&normalize(&sample_seq()).unwrap(), 100).unwrap();
        let fs = vectorize(&seq).unwrap();
        assert_eq!(fs.len(), 100);
        assert_eq!(fs.data.cols(), FEATURE_DIM);
        // Layout: entry (t, 3j + c) is joint j coordinate c.
        for t in [0, 37, 99] {
            for j in [0, 7, 24] {
                for c in 0..COORDS {
                    assert_eq!(fs.data.get(t, 3 * j + c), seq.frames[t][j][c]);
                }
            }
        }
        let back = devectorize(&fs).unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn pipeline_invariance_under_similarity_transform() {
        let seq = sample_seq();
        let mut moved = seq.clone();
        for frame in &mut moved.frames {
            for joint in frame.iter_mut() {
                for c in joint.iter_mut() {
                    *c = *c * 3.5 - 2.0;
                }
            }
        }
        let a = preprocess(&seq, 100).unwrap();
        let b = preprocess(&moved, 100).unwrap();
        for (x, y) in a.data.data().iter().zip(b.data.data()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}
