//! Multi-channel normalized cross-correlation.
//!
//! Each channel is correlated separately (zero-mean on both the template and
//! the candidate patch) and the per-channel coefficients are averaged over
//! the channels where the template has variance. The result is invariant to
//! independent affine changes of every channel.

use super::features::FeatureMap;
use super::FusionError;

/// Correlation coefficients for every placement of the template inside the
/// search map.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl ScoreMap {
    /// First maximum in row-major order: `(x, y, value)`.
    pub fn argmax(&self) -> (usize, usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, &v) in self.values.iter().enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        (best.0 % self.width, best.0 / self.width, best.1)
    }
}

/// Summed-area table with a zero first row/column.
fn integral(plane: &[f32], w: usize, h: usize, square: bool) -> Vec<f64> {
    let mut t = vec![0.0; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            let v = plane[y * w + x] as f64;
            row += if square { v * v } else { v };
            t[(y + 1) * (w + 1) + x + 1] = t[y * (w + 1) + x + 1] + row;
        }
    }
    t
}

fn box_sum(t: &[f64], w: usize, x: usize, y: usize, bw: usize, bh: usize) -> f64 {
    let s = w + 1;
    t[(y + bh) * s + x + bw] - t[y * s + x + bw] - t[(y + bh) * s + x] + t[y * s + x]
}

const VAR_EPS: f64 = 1e-9;

pub fn ncc_map(template: &FeatureMap, search: &FeatureMap) -> Result<ScoreMap, FusionError> {
    if template.channels != search.channels || template.width > search.width || template.height > search.height {
        return Err(FusionError::ShapeMismatch);
    }
    let (tw, th) = (template.width, template.height);
    let (sw, sh) = (search.width, search.height);
    let (ow, oh) = (sw - tw + 1, sh - th + 1);
    let n = (tw * th) as f64;
    let mut sums = vec![0.0; ow * oh];
    let mut active = 0usize;

    for c in 0..template.channels {
        let tp = template.plane(c);
        let mean = tp.iter().map(|&v| v as f64).sum::<f64>() / n;
        let centered: Vec<f32> = tp.iter().map(|&v| (v as f64 - mean) as f32).collect();
        let tvar: f64 = centered.iter().map(|&v| v as f64 * v as f64).sum();
        if tvar <= VAR_EPS * n {
            continue;
        }
        active += 1;
        let sp = search.plane(c);
        let s1 = integral(sp, sw, sh, false);
        let s2 = integral(sp, sw, sh, true);
        for oy in 0..oh {
            for ox in 0..ow {
                // centered template sums to 0, so the patch mean drops out
                let mut num = 0.0f32;
                for ty in 0..th {
                    let srow = &sp[(oy + ty) * sw + ox..(oy + ty) * sw + ox + tw];
                    let trow = &centered[ty * tw..(ty + 1) * tw];
                    num += trow.iter().zip(srow).map(|(a, b)| a * b).sum::<f32>();
                }
                let ps = box_sum(&s1, sw, ox, oy, tw, th);
                let pss = box_sum(&s2, sw, ox, oy, tw, th);
                let pvar = pss - ps * ps / n;
                if pvar > VAR_EPS * n {
                    sums[oy * ow + ox] += (num as f64 / (tvar * pvar).sqrt()).clamp(-1.0, 1.0);
                }
            }
        }
    }
    if active > 0 {
        sums.iter_mut().for_each(|v| *v /= active as f64);
    }
    Ok(ScoreMap {
        width: ow,
        height: oh,
        values: sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(c: usize, w: usize, h: usize, f: impl Fn(usize, usize, usize) -> f32) -> FeatureMap {
        let mut m = FeatureMap::zeros(c, w, h, 1);
        for ch in 0..c {
            for y in 0..h {
                for x in 0..w {
                    m.data[(ch * h + y) * w + x] = f(ch, x, y);
                }
            }
        }
        m
    }

    fn pattern(ch: usize, x: usize, y: usize) -> f32 {
        // hashed so no shift of the pattern repeats it
        let h = (x as u32).wrapping_mul(73856093) ^ (y as u32).wrapping_mul(19349663) ^ (ch as u32).wrapping_mul(83492791);
        ((h.wrapping_mul(2654435761) >> 16) % 1000) as f32 / 500.0 - 1.0
    }

    #[test]
    fn finds_embedded_template() {
        let search = map(2, 20, 15, pattern);
        let template = map(2, 6, 5, |c, x, y| pattern(c, x + 9, y + 4));
        let s = ncc_map(&template, &search).unwrap();
        assert_eq!((s.width, s.height), (15, 11));
        let (x, y, v) = s.argmax();
        assert_eq!((x, y), (9, 4));
        assert!((v - 1.0).abs() < 1e-5);
    }

    #[test]
    fn per_channel_affine_invariance() {
        let search = map(2, 20, 15, pattern);
        let template = map(2, 6, 5, |c, x, y| pattern(c, x + 3, y + 2));
        let changed = map(2, 20, 15, |c, x, y| if c == 0 { 3.0 * pattern(c, x, y) + 1.0 } else { 0.5 * pattern(c, x, y) - 2.0 });
        let a = ncc_map(&template, &search).unwrap();
        let b = ncc_map(&template, &changed).unwrap();
        assert_eq!(a.argmax().0, b.argmax().0);
        assert_eq!(a.argmax().1, b.argmax().1);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-4);
        }
    }

    #[test]
    fn flat_template_scores_zero() {
        let search = map(1, 8, 8, pattern);
        let template = map(1, 3, 3, |_, _, _| 2.0);
        assert!(ncc_map(&template, &search).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn oversized_template_is_rejected() {
        let a = map(1, 4, 4, pattern);
        let b = map(1, 3, 3, pattern);
        assert!(matches!(ncc_map(&a, &b), Err(FusionError::ShapeMismatch)));
    }

    proptest! {
        #[test]
        fn scores_stay_in_range(seed in 0usize..1000) {
            let search = map(3, 12, 10, |c, x, y| (((x * 31 + y * 17 + c * 7 + seed) % 23) as f32 - 11.0) / 3.0);
            let template = map(3, 4, 3, |c, x, y| (((x * 5 + y * 11 + c + seed * 3) % 19) as f32) / 5.0);
            let s = ncc_map(&template, &search).unwrap();
            prop_assert!(s.values.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }
}
