//! Gelfand quotients `||T^n||^{1/n}` and the split of a direct sum into its
//! contracting and expanding parts.

use serde_json::{json, Value};

use super::{Block, Motion, ShiftOperator};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spaces::{Band, SeqVector};

/// Default distance from 1 a block radius must keep to be classified.
pub const RIESZ_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTrace {
    /// `||T^n||^{1/n}` for `n = 1..=n_max`, restricted to the window, from
    /// the images of basis vectors.
    pub quotients: Vec<f64>,
    /// Largest geometric mean of `n` consecutive weights along a path inside
    /// the window, from the individual weights.
    pub geometric_means: Vec<f64>,
    pub estimate: f64,
}

impl SpectralTrace {
    pub fn to_json(&self) -> Value {
        json!({
            "quotients": self.quotients,
            "geometric_means": self.geometric_means,
            "estimate": self.estimate,
        })
    }
}

fn window_indices(window: &Band) -> Result<(i64, i64)> {
    match (window.lo, window.hi) {
        (Some(lo), Some(hi)) if lo <= hi => Ok((lo, hi)),
        _ => Err(Error::InvalidArgument(format!("spectral window {window} must be finite and non-empty"))),
    }
}

impl<S: Scalar> ShiftOperator<S> {
    /// Gelfand trace over basis vectors `e_s` with `s` in `window`.
    ///
    /// On a weighted shift each `T^n e_s` is a single coordinate, so
    /// `||T^n||` (in every `p`-norm) is the largest such coefficient.
    pub fn spectral_radius_estimate(&self, n_max: u64, window: Band) -> Result<SpectralTrace> {
        if n_max == 0 {
            return Err(Error::InvalidArgument("n_max must be at least 1".into()));
        }
        let (lo, hi) = window_indices(&window)?;
        let mut quotients = Vec::with_capacity(n_max as usize);
        for n in 1..=n_max {
            let best = (lo..=hi)
                .filter_map(|s| self.image_log2(s, n).map(|(_, l)| l))
                .fold(f64::NEG_INFINITY, f64::max);
            quotients.push((best / n as f64).exp2());
        }
        let mut geometric_means = vec![0.0; n_max as usize];
        for block in &self.blocks {
            let inside = block.band.intersect(&window);
            if inside.is_empty() {
                continue;
            }
            let (blo, bhi) = (inside.lo.unwrap_or(lo), inside.hi.unwrap_or(hi));
            for (k, g) in block_means(block, blo, bhi, n_max).into_iter().enumerate() {
                geometric_means[k] = f64::max(geometric_means[k], g);
            }
        }
        let estimate = *quotients.last().expect("n_max >= 1");
        Ok(SpectralTrace { quotients, geometric_means, estimate })
    }

    /// Splits into the blocks of spectral radius below `1 - margin` and
    /// above `1 + margin`.
    pub fn riesz_blocks(&self, margin: f64, n_max: u64) -> Result<RieszSplit<S>> {
        let mut radii = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let single = ShiftOperator {
                shape: super::Shape::BlockDirectSum,
                index_set: self.index_set,
                blocks: vec![block.clone()],
            };
            let r = single.spectral_radius_estimate(n_max, block_window(block, n_max))?.estimate;
            if (r - 1.0).abs() <= margin {
                return Err(Error::Indecisive(format!(
                    "block on {} has spectral radius estimate {r:.6}, within {margin} of 1",
                    block.band
                )));
            }
            radii.push((block.band, r));
        }
        let contracting = self.sub_sum(|b| radii.iter().any(|(band, r)| *band == b.band && *r < 1.0));
        let expanding = self.sub_sum(|b| radii.iter().any(|(band, r)| *band == b.band && *r > 1.0));
        Ok(RieszSplit { contracting, expanding, radii })
    }
}

/// Sliding sums of `log2 |α_m|` give the best `n`-step product per block.
fn block_means<S: Scalar>(block: &Block<S>, lo: i64, hi: i64, n_max: u64) -> Vec<f64> {
    let n_max_i = n_max as i64;
    let base = lo - n_max_i;
    let logs: Vec<f64> = (base..=hi + n_max_i).map(|m| block.weights.weight(m).log2_abs()).collect();
    let mut prefix = vec![0.0; logs.len() + 1];
    for (i, l) in logs.iter().enumerate() {
        prefix[i + 1] = prefix[i] + l;
    }
    // sum of log weights over [a, b]
    let range = |a: i64, b: i64| prefix[(b - base + 1) as usize] - prefix[(a - base) as usize];
    (1..=n_max_i)
        .map(|n| {
            let best = (lo..=hi)
                .filter_map(|s| match block.motion {
                    Motion::Backward => block.band.contains(s - n).then(|| range(s - n + 1, s)),
                    Motion::Forward => block.band.contains(s + n).then(|| range(s, s + n - 1)),
                    Motion::Diagonal => Some(n as f64 * logs[(s - base) as usize]),
                })
                .fold(f64::NEG_INFINITY, f64::max);
            (best / n as f64).exp2()
        })
        .collect()
}

/// Finite window that sees a block's asymptotic behaviour.
fn block_window<S: Scalar>(block: &Block<S>, n_max: u64) -> Band {
    let reach = 4 * n_max as i64;
    let mut w = match (block.band.lo, block.band.hi) {
        (Some(lo), Some(hi)) => Band::finite(lo, hi),
        (Some(lo), None) => Band::finite(lo, lo + reach),
        (None, Some(hi)) => Band::finite(hi - reach, hi),
        (None, None) => Band::finite(-reach, reach),
    };
    if let Some((a, b)) = block.weights.listed_indices() {
        let lo = w.lo.map(|l| l.min(a));
        let hi = w.hi.map(|h| h.max(b));
        w = block.band.intersect(&Band::new(lo, hi));
    }
    w
}

/// Contracting part `T1`, expanding part `T2`, and the radius per block.
#[derive(Debug, Clone)]
pub struct RieszSplit<S> {
    pub contracting: ShiftOperator<S>,
    pub expanding: ShiftOperator<S>,
    pub radii: Vec<(Band, f64)>,
}

impl<S: Scalar> RieszSplit<S> {
    /// `x = x1 + x2` with `x2` carried by the expanding bands. Indices
    /// outside every band are annihilated by `T` and go to `x1`.
    pub fn split(&self, x: &SeqVector<S>) -> (SeqVector<S>, SeqVector<S>) {
        let x2 = x.filter(|i| self.expanding.blocks.iter().any(|b| b.band.contains(i)));
        let x1 = x.filter(|i| !self.expanding.blocks.iter().any(|b| b.band.contains(i)));
        (x1, x2)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "contracting": self.contracting.to_json(),
            "expanding": self.expanding.to_json(),
            "radii": self.radii.iter().map(|(b, r)| json!({"band": [b.lo, b.hi], "radius": r})).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{preset, real_weight, WeightRule};
    use super::*;
    use crate::scalar::{Exact, Float};
    use crate::spaces::IndexSet;

    #[test]
    fn constant_shifts_have_radius_equal_to_the_weight() {
        for (num, den, expected) in [(2, 1, 2.0), (1, 2, 0.5)] {
            let t = ShiftOperator::<Exact>::unilateral_backward(WeightRule::Constant(real_weight(num, den))).unwrap();
            let trace = t.spectral_radius_estimate(64, Band::finite(0, 128)).unwrap();
            assert!((trace.estimate - expected).abs() < 0.01 * expected);
            assert!((trace.geometric_means[63] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_radius_is_the_largest_weight() {
        let w = WeightRule::Table {
            entries: [(0, real_weight::<Float>(3, 1))].into_iter().collect(),
            default: real_weight(1, 10),
        };
        let t = ShiftOperator::diagonal(IndexSet::Integers, w).unwrap();
        let trace = t.spectral_radius_estimate(64, Band::finite(-64, 64)).unwrap();
        assert!((trace.estimate - 3.0).abs() < 1e-9);
    }

    #[test]
    fn two_band_operator_splits() {
        let t = preset::<Exact>("two-band-riesz").unwrap();
        let split = t.riesz_blocks(RIESZ_MARGIN, 64).unwrap();
        assert_eq!(split.contracting.blocks().len(), 1);
        assert_eq!(split.expanding.blocks().len(), 1);
        assert_eq!(split.contracting.blocks()[0].band, Band::up_to(-1));
        let x = SeqVector::<Exact>::basis(IndexSet::Integers, -3)
            .unwrap()
            .add(&SeqVector::basis(IndexSet::Integers, 2).unwrap())
            .unwrap();
        let (x1, x2) = split.split(&x);
        assert_eq!(x1.indices().collect::<Vec<_>>(), vec![-3]);
        assert_eq!(x2.indices().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn unit_radius_is_indecisive() {
        let t = ShiftOperator::<Exact>::bilateral_backward(WeightRule::Constant(real_weight(1, 1))).unwrap();
        assert!(matches!(t.riesz_blocks(RIESZ_MARGIN, 64), Err(Error::Indecisive(_))));
        let big = ShiftOperator::<Exact>::bilateral_backward(WeightRule::Constant(real_weight(2, 1))).unwrap();
        let split = big.riesz_blocks(RIESZ_MARGIN, 64).unwrap();
        assert!(split.contracting.blocks().is_empty());
        assert_eq!(split.expanding.blocks().len(), 1);
    }

    #[test]
    fn window_must_be_finite() {
        let t = preset::<Exact>("paper-prop32").unwrap();
        assert!(t.spectral_radius_estimate(8, Band::from(0)).is_err());
        assert!(t.spectral_radius_estimate(0, Band::finite(0, 3)).is_err());
    }
}
