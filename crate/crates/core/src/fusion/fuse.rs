use std::fmt;
use std::str::FromStr;

use super::features::FeatureMap;
use super::FusionError;

/// Element-wise merge of two same-shape feature maps.
#[derive(Debug, Clone, PartialEq)]
pub enum FusionOp {
    Max,
    Mean,
    /// Per-channel convex weight on the first map: `w * a + (1 - w) * b`.
    /// A single weight applies to every channel.
    Weighted(Vec<f64>),
}

/// Weight on the RGB map when `weighted` is chosen without explicit weights.
pub const DEFAULT_RGB_WEIGHT: f64 = 0.4;

impl FusionOp {
    pub fn name(&self) -> &'static str {
        match self {
            FusionOp::Max => "max",
            FusionOp::Mean => "mean",
            FusionOp::Weighted(_) => "weighted",
        }
    }

    fn weight(&self, c: usize) -> f64 {
        match self {
            FusionOp::Weighted(w) if w.len() == 1 => w[0],
            FusionOp::Weighted(w) => w[c],
            _ => unreachable!("only weighted fusion has weights"),
        }
    }
}

impl fmt::Display for FusionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusionOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(FusionOp::Max),
            "mean" => Ok(FusionOp::Mean),
            "weighted" => Ok(FusionOp::Weighted(vec![DEFAULT_RGB_WEIGHT])),
            _ => Err(format!("unknown fusion `{s}` (max, mean, weighted)")),
        }
    }
}

/// Merged values before re-normalization.
pub fn fuse_raw(a: &FeatureMap, b: &FeatureMap, op: &FusionOp) -> Result<FeatureMap, FusionError> {
    if !a.same_shape(b) {
        return Err(FusionError::ShapeMismatch);
    }
    if let FusionOp::Weighted(w) = op {
        if !(w.len() == 1 || w.len() == a.channels) || w.iter().any(|v| !v.is_finite()) {
            return Err(FusionError::BadWeights {
                expected: a.channels,
                found: w.len(),
            });
        }
    }
    let mut out = FeatureMap::zeros(a.channels, a.width, a.height, a.stride);
    for c in 0..a.channels {
        let (pa, pb) = (a.plane(c), b.plane(c));
        let po = out.plane_mut(c);
        match op {
            FusionOp::Max => po.iter_mut().zip(pa.iter().zip(pb)).for_each(|(o, (x, y))| *o = x.max(*y)),
            FusionOp::Mean => po.iter_mut().zip(pa.iter().zip(pb)).for_each(|(o, (x, y))| *o = 0.5 * (x + y)),
            FusionOp::Weighted(_) => {
                let w = op.weight(c) as f32;
                po.iter_mut()
                    .zip(pa.iter().zip(pb))
                    .for_each(|(o, (x, y))| *o = w * x + (1.0 - w) * y);
            }
        }
    }
    Ok(out)
}

/// Merges and re-normalizes each channel.
pub fn fuse(a: &FeatureMap, b: &FeatureMap, op: &FusionOp) -> Result<FeatureMap, FusionError> {
    let mut out = fuse_raw(a, b, op)?;
    out.normalize();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(values: &[f32]) -> FeatureMap {
        FeatureMap {
            channels: 1,
            width: values.len(),
            height: 1,
            stride: 1,
            data: values.to_vec(),
        }
    }

    #[test]
    fn element_pairs() {
        let a = map(&[1.0, 3.0]);
        let b = map(&[2.0, 2.0]);
        assert_eq!(fuse_raw(&a, &b, &FusionOp::Max).unwrap().data, vec![2.0, 3.0]);
        assert_eq!(fuse_raw(&a, &b, &FusionOp::Mean).unwrap().data, vec![1.5, 2.5]);
        assert_eq!(fuse_raw(&a, &b, &FusionOp::Weighted(vec![1.0])).unwrap().data, a.data);
        assert_eq!(fuse_raw(&a, &b, &FusionOp::Weighted(vec![0.0])).unwrap().data, b.data);
    }

    #[test]
    fn shape_and_weight_errors() {
        let a = map(&[1.0, 3.0]);
        let b = map(&[2.0]);
        assert!(matches!(fuse(&a, &b, &FusionOp::Max), Err(FusionError::ShapeMismatch)));
        let mut c = a.clone();
        c.stride = 2;
        assert!(matches!(fuse(&a, &c, &FusionOp::Mean), Err(FusionError::ShapeMismatch)));
        assert!(matches!(
            fuse(&a, &a, &FusionOp::Weighted(vec![0.5, 0.5])),
            Err(FusionError::BadWeights { .. })
        ));
    }

    fn arb_map() -> impl Strategy<Value = (FeatureMap, FeatureMap)> {
        (1usize..4, 1usize..6, 1usize..6).prop_flat_map(|(c, w, h)| {
            let n = c * w * h;
            (
                proptest::collection::vec(-5.0f32..5.0, n),
                proptest::collection::vec(-5.0f32..5.0, n),
            )
                .prop_map(move |(x, y)| {
                    let mk = |d: Vec<f32>| FeatureMap {
                        channels: c,
                        width: w,
                        height: h,
                        stride: 1,
                        data: d,
                    };
                    (mk(x), mk(y))
                })
        })
    }

    proptest! {
        #[test]
        fn max_and_mean_commute((a, b) in arb_map()) {
            for op in [FusionOp::Max, FusionOp::Mean] {
                let ab = fuse(&a, &b, &op).unwrap();
                let ba = fuse(&b, &a, &op).unwrap();
                prop_assert_eq!(&ab, &ba);
                prop_assert!(ab.same_shape(&a));
            }
        }

        #[test]
        fn self_fusion_is_identity((a, _b) in arb_map()) {
            prop_assert_eq!(&fuse_raw(&a, &a, &FusionOp::Max).unwrap(), &a);
            prop_assert_eq!(&fuse_raw(&a, &a, &FusionOp::Mean).unwrap(), &a);
            let mut n = a.clone();
            n.normalize();
            let f = fuse(&n, &n, &FusionOp::Max).unwrap();
            for (x, y) in f.data.iter().zip(&n.data) {
                prop_assert!((x - y).abs() < 1e-4);
            }
        }
    }
}
