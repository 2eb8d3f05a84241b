//! Cones generated by an open ball: `C = { λ·b : λ > 0, ||b - c|| < r }`.
//!
//! `x ∈ C` iff some `λ > 0` has `||x - λc|| < λr`. In the Euclidean norm this
//! reduces to `<x,c> > 0` and `<x,c>^2 > ||x||^2 (||c||^2 - r^2)`. For the
//! `1` and `sup` norms with real data, `λ ↦ ||x - λc|| - λr` is piecewise
//! linear and convex, so its minimum over `λ > 0` sits at a breakpoint; the
//! breakpoints are rational and the test is exact. Complex data falls back
//! to a golden-section minimisation whose minimiser is then checked exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::{norm, Band, IndexSet, NormTag, SeqVector};
use crate::error::{Error, Result};
use crate::scalar::{Magnitude, Real, Scalar};

#[derive(Debug, Clone)]
pub struct OpenCone<S: Scalar> {
    center: SeqVector<S>,
    radius: S::Real,
    norm: NormTag,
}

impl<S: Scalar> OpenCone<S> {
    pub fn new(center: SeqVector<S>, radius: S::Real, norm: NormTag) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::InvalidCone("radius must be positive".into()));
        }
        if super::norm(&center, norm).le(&radius) {
            return Err(Error::InvalidCone(format!(
                "center norm {} does not exceed radius {}",
                super::norm(&center, norm).to_f64(),
                radius.to_f64()
            )));
        }
        Ok(OpenCone { center, radius, norm })
    }

    pub fn center(&self) -> &SeqVector<S> {
        &self.center
    }

    pub fn radius(&self) -> &S::Real {
        &self.radius
    }

    pub fn norm_tag(&self) -> NormTag {
        self.norm
    }

    pub fn index_set(&self) -> IndexSet {
        self.center.index_set()
    }

    /// Membership with an explicit norm tag, which must match the cone's.
    pub fn contains_in(&self, x: &SeqVector<S>, p: NormTag) -> Result<bool> {
        if p != self.norm {
            return Err(Error::NormMismatch);
        }
        self.contains(x)
    }

    pub fn contains(&self, x: &SeqVector<S>) -> Result<bool> {
        self.center.ensure_same_index_set(x)?;
        if x.is_zero() {
            return Ok(false);
        }
        Ok(match self.norm {
            NormTag::P2 => self.contains_p2(x),
            NormTag::P1 | NormTag::PInf => {
                let real = x.iter().all(|(_, v)| v.is_real()) && self.center.iter().all(|(_, v)| v.is_real());
                if real {
                    self.contains_piecewise(x)
                } else {
                    self.contains_complex(x)
                }
            }
        })
    }

    fn contains_p2(&self, x: &SeqVector<S>) -> bool {
        let s = x.re_inner(&self.center);
        if !s.is_positive() {
            return false;
        }
        let cc = self.center.norm_sq();
        let xx = x.norm_sq();
        // both sides divided by ||x||^2 ||c||^2, so the float tolerance is scale free
        let lhs = (cc.clone() - self.radius.clone() * self.radius.clone()) / cc.clone();
        let rhs = (s.clone() * s) / (xx * cc);
        S::Real::strictly_below(&lhs, &rhs)
    }

    /// Real coordinates: `f(λ) = ||x - λc|| - λr` is convex piecewise linear.
    fn contains_piecewise(&self, x: &SeqVector<S>) -> bool {
        // In float mode work with x scaled to unit norm so TOL_EQ is relative.
        let xs = match S::MODE {
            crate::scalar::NumericMode::Float => {
                let n = norm(x, self.norm).to_f64();
                x.scale_real(&S::Real::from_f64(1.0 / n))
            }
            crate::scalar::NumericMode::Exact => x.clone(),
        };
        let mut idx: Vec<i64> = xs.indices().chain(self.center.indices()).collect();
        idx.sort_unstable();
        idx.dedup();
        let xv: Vec<S::Real> = idx.iter().map(|&i| xs.at(i).re_part()).collect();
        let cv: Vec<S::Real> = idx.iter().map(|&i| self.center.at(i).re_part()).collect();

        let zero = S::Real::zero();
        let mut candidates: Vec<S::Real> = Vec::new();
        for j in 0..idx.len() {
            if cv[j] != zero {
                candidates.push(xv[j].clone() / cv[j].clone());
            }
        }
        if self.norm == NormTag::PInf {
            for i in 0..idx.len() {
                for j in (i + 1)..idx.len() {
                    let dm = cv[i].clone() - cv[j].clone();
                    if dm != zero {
                        candidates.push((xv[i].clone() - xv[j].clone()) / dm);
                    }
                    let dp = cv[i].clone() + cv[j].clone();
                    if dp != zero {
                        candidates.push((xv[i].clone() + xv[j].clone()) / dp);
                    }
                }
            }
        }
        let abs = |v: S::Real| if v < S::Real::zero() { -v } else { v };
        candidates.into_iter().filter(|l| l.is_positive()).any(|lambda| {
            let residuals = xv.iter().zip(&cv).map(|(a, b)| abs(a.clone() - lambda.clone() * b.clone()));
            let dist = match self.norm {
                NormTag::P1 => residuals.fold(S::Real::zero(), |acc, v| acc + v),
                _ => residuals.fold(S::Real::zero(), |acc, v| if v > acc { v } else { acc }),
            };
            S::Real::strictly_below(&dist, &(lambda * self.radius.clone()))
        })
    }

    fn contains_complex(&self, x: &SeqVector<S>) -> bool {
        let Some(lambda) = minimise_gap(&x.to_float(), &self.center.to_float(), self.radius.to_f64(), self.norm)
        else {
            return false;
        };
        let lambda = S::Real::from_f64(lambda.0);
        let shifted = match x.sub(&self.center.scale_real(&lambda)) {
            Ok(v) => v,
            Err(_) => return false,
        };
        norm(&shifted, self.norm).lt(&(lambda * self.radius.clone()))
    }
}

/// Golden-section minimiser of `λ ↦ ||x̂ - λc|| - λr` on `[0, ||x̂||/(||c||-r)]`
/// with `x̂ = x/||x||`; returns `(λ·||x||, min value)` when the minimum is
/// negative.
fn minimise_gap(
    x: &SeqVector<crate::scalar::Float>,
    c: &SeqVector<crate::scalar::Float>,
    r: f64,
    p: NormTag,
) -> Option<(f64, f64)> {
    let xn = norm(x, p);
    if xn == 0.0 {
        return None;
    }
    let xhat = x.scale_real(&(1.0 / xn));
    let cn = norm(c, p);
    let hi = 1.0 / (cn - r);
    let f = |lambda: f64| -> f64 {
        let d = xhat.sub(&c.scale_real(&lambda)).map(|v| norm(&v, p)).unwrap_or(f64::INFINITY);
        d - lambda * r
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
        if b - a < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let lambda = 0.5 * (a + b);
    let value = f(lambda);
    (value < 0.0).then_some((lambda * xn, value))
}

/// Decides membership by numerically minimising the convex gap function in
/// double precision, whatever the norm. Used to cross-check the closed forms.
pub fn cone_contains_by_minimization<S: Scalar>(cone: &OpenCone<S>, x: &SeqVector<S>) -> Result<bool> {
    cone.center.ensure_same_index_set(x)?;
    Ok(minimise_gap(&x.to_float(), &cone.center.to_float(), cone.radius.to_f64(), cone.norm).is_some())
}

/// Seeded sampler of cone members `λ (c + u)`.
#[derive(Debug, Clone)]
pub struct ConeSampler {
    /// `λ` is log-uniform in this range.
    pub lambda_range: (f64, f64),
    /// Coordinates where `u` may be non-zero; defaults to the center's
    /// support widened by two on each side.
    pub window: Option<Band>,
    /// Coordinates are rounded to multiples of `2^-grid_bits`.
    pub grid_bits: u32,
    pub max_attempts: usize,
}

impl Default for ConeSampler {
    fn default() -> Self {
        ConeSampler { lambda_range: (1e-2, 1e2), window: None, grid_bits: 16, max_attempts: 64 }
    }
}

impl ConeSampler {
    pub fn sample<S: Scalar>(&self, cone: &OpenCone<S>, count: usize, seed: u64) -> Result<Vec<SeqVector<S>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let window = self.window_for(cone)?;
        let (lo, hi) = (window.lo.unwrap_or(0), window.hi.unwrap_or(0));
        let indices: Vec<i64> = (lo..=hi).filter(|i| cone.index_set().admits(*i)).collect();
        if indices.is_empty() {
            return Err(Error::InvalidArgument("sampling window is empty".into()));
        }
        let r = cone.radius.to_f64();
        let (lmin, lmax) = self.lambda_range;
        if !(lmin > 0.0 && lmax >= lmin) {
            return Err(Error::InvalidArgument("lambda range must be positive and ordered".into()));
        }
        let grid = (self.grid_bits as f64).exp2();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut accepted = None;
            for _ in 0..self.max_attempts {
                let u = ball_point(&mut rng, indices.len(), r, cone.norm);
                let lambda = (lmin.ln() + rng.random::<f64>() * (lmax / lmin).ln()).exp();
                let entries = indices.iter().zip(&u).map(|(&i, ui)| {
                    let c = cone.center.at(i).to_c64().re;
                    let v = ((lambda * (c + ui)) * grid).round() / grid;
                    (i, S::from_real(S::Real::from_f64(v)))
                });
                let v = SeqVector::from_entries(cone.index_set(), entries)?;
                if cone.contains(&v)? {
                    accepted = Some(v);
                    break;
                }
            }
            match accepted {
                Some(v) => out.push(v),
                None => {
                    return Err(Error::InvalidArgument(
                        "cone sampler rejected every attempt; widen the grid or the radius".into(),
                    ))
                }
            }
        }
        Ok(out)
    }

    fn window_for<S: Scalar>(&self, cone: &OpenCone<S>) -> Result<Band> {
        if let Some(w) = self.window {
            if w.lo.is_none() || w.hi.is_none() || w.is_empty() {
                return Err(Error::InvalidArgument("sampling window must be a finite band".into()));
            }
            return Ok(w);
        }
        let (lo, hi) = cone.center.support_bounds().unwrap_or((0, 0));
        Ok(Band::finite(lo - 2, hi + 2))
    }
}

/// Uniform point of the open radius-`r` ball of `R^n` in the given norm.
fn ball_point(rng: &mut ChaCha8Rng, n: usize, r: f64, p: NormTag) -> Vec<f64> {
    match p {
        NormTag::PInf => (0..n).map(|_| r * (2.0 * rng.random::<f64>() - 1.0)).collect(),
        NormTag::P2 => {
            let g: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let len = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let radial = r * rng.random::<f64>().powf(1.0 / n as f64);
            g.into_iter().map(|v| v / len * radial).collect()
        }
        NormTag::P1 => {
            // n+1 exponentials normalised: the last one is the slack coordinate
            let e: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = e.iter().sum();
            e[..n]
                .iter()
                .map(|v| {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    sign * r * v / total
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, ratio_int, Exact, Float};
    use num_complex::Complex;
    use proptest::prelude::*;

    fn real(v: num_rational::BigRational) -> Exact {
        Complex::new(v, ratio_int(0))
    }

    fn cone_2e0(p: NormTag) -> OpenCone<Exact> {
        let c = SeqVector::from_entries(IndexSet::Integers, [(0, real(ratio_int(2)))]).unwrap();
        OpenCone::new(c, ratio_int(1), p).unwrap()
    }

    #[test]
    fn center_is_member_and_opposite_is_not() {
        for p in [NormTag::P1, NormTag::P2, NormTag::PInf] {
            let cone = cone_2e0(p);
            let c = cone.center().clone();
            assert!(cone.contains(&c).unwrap());
            assert!(!cone.contains(&c.scale(&real(ratio_int(-1)))).unwrap());
            assert!(!cone.contains(&SeqVector::zero(IndexSet::Integers)).unwrap());
        }
    }

    #[test]
    fn euclidean_closed_form_example() {
        let cone = cone_2e0(NormTag::P2);
        let x = SeqVector::from_entries(IndexSet::Integers, [(0, real(ratio_int(1))), (1, real(ratio(2, 5)))])
            .unwrap();
        // <x,c>^2 = 4, ||x||^2 (||c||^2 - r^2) = 1.16 * 3 = 3.48
        assert!(cone.contains(&x).unwrap());
        assert!(cone_contains_by_minimization(&cone, &x).unwrap());
    }

    #[test]
    fn sup_norm_boundary_is_excluded() {
        // c = 2e0, r = 1: x = e0 + e1 needs |1 - 2λ| < λ and 1 < λ, impossible.
        let cone = cone_2e0(NormTag::PInf);
        let x = SeqVector::from_entries(IndexSet::Integers, [(0, real(ratio_int(1))), (1, real(ratio_int(1)))])
            .unwrap();
        assert!(!cone.contains(&x).unwrap());
        // x = 3e0 + e1: λ = 3/2 gives max(0, 1) = 1 < 3/2
        let y = SeqVector::from_entries(IndexSet::Integers, [(0, real(ratio_int(3))), (1, real(ratio_int(1)))])
            .unwrap();
        assert!(cone.contains(&y).unwrap());
    }

    #[test]
    fn rejects_degenerate_cones() {
        let c = SeqVector::<Exact>::basis(IndexSet::Integers, 0).unwrap();
        assert!(OpenCone::new(c.clone(), ratio_int(1), NormTag::P2).is_err());
        assert!(OpenCone::new(c, ratio_int(0), NormTag::P2).is_err());
    }

    #[test]
    fn norm_mismatch_is_reported() {
        let cone = cone_2e0(NormTag::P2);
        let x = cone.center().clone();
        assert!(matches!(cone.contains_in(&x, NormTag::P1), Err(Error::NormMismatch)));
    }

    #[test]
    fn complex_members_are_certified_exactly() {
        let c = SeqVector::from_entries(IndexSet::Integers, [(0, real(ratio_int(2)))]).unwrap();
        let cone = OpenCone::new(c, ratio_int(1), NormTag::P1).unwrap();
        let x = SeqVector::from_entries(IndexSet::Integers, [(0, Complex::new(ratio_int(2), ratio(1, 10)))])
            .unwrap();
        assert!(cone.contains(&x).unwrap());
        let far = SeqVector::from_entries(IndexSet::Integers, [(0, Complex::new(ratio_int(0), ratio_int(1)))])
            .unwrap();
        assert!(!cone.contains(&far).unwrap());
    }

    #[test]
    fn sampler_is_deterministic_and_sound() {
        for p in [NormTag::P1, NormTag::P2, NormTag::PInf] {
            let cone = cone_2e0(p);
            let a = ConeSampler::default().sample(&cone, 40, 7).unwrap();
            let b = ConeSampler::default().sample(&cone, 40, 7).unwrap();
            assert_eq!(a, b);
            assert!(a.iter().all(|v| cone.contains(v).unwrap()));
        }
    }

    #[test]
    fn float_sampler_members() {
        let c = SeqVector::<Float>::from_entries(IndexSet::Naturals, [(1, Complex::new(3.0, 0.0))]).unwrap();
        let cone = OpenCone::new(c, 1.0, NormTag::P2).unwrap();
        let s = ConeSampler::default().sample(&cone, 100, 1).unwrap();
        assert_eq!(s.len(), 100);
        assert!(s.iter().all(|v| v.indices().all(|i| i >= 0)));
    }

    proptest! {
        #[test]
        fn membership_is_invariant_under_positive_scaling(
            xs in proptest::collection::vec(-20i64..20, 1..5),
            num in 1i64..1_000_000,
            den_pow in 0u32..40,
            tag in 0usize..3,
        ) {
            let p = [NormTag::P1, NormTag::P2, NormTag::PInf][tag];
            let c = SeqVector::from_entries(
                IndexSet::Integers,
                [(0, real(ratio_int(3))), (1, real(ratio_int(1)))],
            ).unwrap();
            let cone = OpenCone::new(c, ratio_int(1), p).unwrap();
            let x = SeqVector::from_entries(
                IndexSet::Integers,
                xs.iter().enumerate().map(|(i, v)| (i as i64 - 1, real(ratio(*v, 4)))),
            ).unwrap();
            let lambda = num_rational::BigRational::new(num.into(), num_bigint::BigInt::from(2u8).pow(den_pow));
            let scaled = x.scale_real(&lambda);
            prop_assert_eq!(cone.contains(&x).unwrap(), cone.contains(&scaled).unwrap());
        }
    }
}
