//! Linear transformations of witnesses: rescaling families, amplifying
//! coarse witnesses by powers of `λ`, and the two-coordinate contradiction
//! check for the shift with weights `2` on the positive indices.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::JWitness;
use crate::error::{Error, Result};
use crate::operators::ShiftOperator;
use crate::orbits::CoarseWitness;
use crate::scalar::{Magnitude, NumericMode, Real, Scalar};
use crate::spaces::{norm, NormTag, SeqVector};

fn approx_equal<S: Scalar>(a: &SeqVector<S>, b: &SeqVector<S>) -> Result<bool> {
    let diff = norm(&a.sub(b)?, NormTag::PInf);
    if diff.is_zero() {
        return Ok(true);
    }
    let scale = norm(b, NormTag::PInf).to_f64().max(1.0);
    Ok(S::MODE == NumericMode::Float && diff.to_f64() <= 1e-9 * scale)
}

#[derive(Debug, Clone)]
pub struct MixTriple<S: Scalar> {
    pub time: u64,
    pub point: SeqVector<S>,
    pub perturbation: S::Norm,
    pub distance: S::Norm,
    /// Index into the input family the triple was taken from.
    pub member: usize,
}

/// Triples `(y_n, n)` with `||y_n - x|| < target_eps` and
/// `||T^n y_n - y|| < bound`, obtained by dividing a scaled family.
#[derive(Debug, Clone)]
pub struct MixCertificate<S: Scalar> {
    pub base: SeqVector<S>,
    pub target: SeqVector<S>,
    pub target_eps: S::Real,
    pub bound: S::Real,
    /// Index of the first member reaching the target tolerance.
    pub first_member: usize,
    pub norm_tag: NormTag,
    pub triples: Vec<MixTriple<S>>,
}

impl<S: Scalar> MixCertificate<S> {
    pub fn verify(&self, t: &ShiftOperator<S>) -> Result<()> {
        if !Real::strictly_below(&self.bound, &self.target_eps) && self.bound != self.target_eps {
            return Err(Error::VerificationFailed("bound exceeds the target tolerance".into()));
        }
        for tr in &self.triples {
            let pert = norm(&tr.point.sub(&self.base)?, self.norm_tag);
            let dist = norm(&t.apply_power(tr.time, &tr.point)?.sub(&self.target)?, self.norm_tag);
            if !pert.lt(&self.target_eps) || !dist.lt(&self.bound) {
                return Err(Error::VerificationFailed(format!(
                    "time {}: perturbation {} / distance {} against {} / {}",
                    tr.time,
                    pert.to_f64(),
                    dist.to_f64(),
                    self.target_eps.to_f64(),
                    self.bound.to_f64()
                )));
            }
            if !pert.same_as(&tr.perturbation) || !dist.same_as(&tr.distance) {
                return Err(Error::VerificationFailed(format!("time {}: recorded values differ", tr.time)));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<u64> {
        self.triples.iter().map(|t| t.time).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "base": self.base.to_json(),
            "target": self.target.to_json(),
            "target_eps": self.target_eps.to_json(),
            "bound": self.bound.to_json(),
            "first_member": self.first_member,
            "norm": self.norm_tag,
            "triples": self.triples.iter().map(|t| json!({
                "time": t.time,
                "member": t.member,
                "point": t.point.to_json(),
                "perturbation": t.perturbation.to_json(),
                "distance": t.distance.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Divides a family of mixing witnesses for `t_k y` from `t_k x` by `t_k`.
///
/// With `m` the first member where `d/t_m` and every radius `ε_i/t_m` are
/// below `target_eps`, each time covered by members `k >= m` is taken from
/// the largest such member, giving distances `< d/t_k <= d/t_m`.
pub fn rescale_j_witness_family<S: Scalar>(
    t: &ShiftOperator<S>,
    family: &[(S::Real, JWitness<S>)],
    target_eps: &S::Real,
) -> Result<MixCertificate<S>> {
    if !target_eps.is_positive() {
        return Err(Error::InvalidArgument("target tolerance must be positive".into()));
    }
    let Some((t0, w0)) = family.first() else {
        return Err(Error::FamilyTooShort("empty family".into()));
    };
    if !t0.is_positive() {
        return Err(Error::InvalidArgument("scales must be positive".into()));
    }
    let inv0 = S::Real::one() / t0.clone();
    let base = w0.base.scale_real(&inv0);
    let target = w0.target.scale_real(&inv0);
    let d = w0.bound.clone();
    let p = w0.norm_tag;
    for (i, (s, w)) in family.iter().enumerate() {
        if i > 0 && !Real::strictly_below(&family[i - 1].0, s) {
            return Err(Error::InvalidArgument("scales must strictly increase".into()));
        }
        if !w.mix {
            return Err(Error::InvalidArgument(format!("member {i} is not a mixing witness")));
        }
        if w.bound != d || w.norm_tag != p {
            return Err(Error::InvalidArgument(format!("member {i} uses a different bound or norm")));
        }
        if !approx_equal(&w.base, &base.scale_real(s))? || !approx_equal(&w.target, &target.scale_real(s))? {
            return Err(Error::InvalidArgument(format!("member {i} is not a scaled copy of the first")));
        }
        w.verify(t)?;
    }
    let reaches = |s: &S::Real, w: &JWitness<S>| {
        let eps1 = w.schedule.values().first().cloned().unwrap_or_else(S::Real::zero);
        Real::strictly_below(&(d.clone() / s.clone()), target_eps)
            && Real::strictly_below(&(eps1 / s.clone()), target_eps)
    };
    let Some(m) = family.iter().position(|(s, w)| reaches(s, w)) else {
        let (s, _) = family.last().unwrap();
        return Err(Error::FamilyTooShort(format!(
            "largest scale {} leaves d/t = {} above {}",
            s.to_f64(),
            d.to_f64() / s.to_f64(),
            target_eps.to_f64()
        )));
    };
    let mut by_time: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
    for (k, (_, w)) in family.iter().enumerate().skip(m) {
        for (i, tr) in w.triples.iter().enumerate() {
            by_time.insert(tr.time, (k, i));
        }
    }
    let mut triples = Vec::with_capacity(by_time.len());
    for (time, (k, i)) in by_time {
        let (s, w) = &family[k];
        let inv = S::Real::one() / s.clone();
        let point = w.triples[i].point.scale_real(&inv);
        let perturbation = norm(&point.sub(&base)?, p);
        let distance = norm(&t.apply_power(time, &point)?.sub(&target)?, p);
        triples.push(MixTriple { time, point, perturbation, distance, member: k });
    }
    let cert = MixCertificate {
        base,
        target,
        target_eps: target_eps.clone(),
        bound: d.clone() / family[m].0.clone(),
        first_member: m,
        norm_tag: p,
        triples,
    };
    cert.verify(t)?;
    Ok(cert)
}

/// `T^{k_n}(λ^n x)` with its distance to `y`.
#[derive(Debug, Clone)]
pub struct AmplifiedPoint<S: Scalar> {
    pub n: u32,
    pub time: u64,
    pub point: SeqVector<S>,
    pub distance: S::Norm,
    /// `λ^n d`.
    pub bound: S::Real,
    /// Distance recorded by the coarse witness for `y/λ^n`.
    pub original_distance: S::Norm,
}

impl<S: Scalar> AmplifiedPoint<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "time": self.time,
            "point": self.point.to_json(),
            "distance": self.distance.to_json(),
            "bound": self.bound.to_json(),
            "original_distance": self.original_distance.to_json(),
        })
    }
}

/// Scales the `n`-th coarse witness (for `y/λ^n` from `x` at bound `d`) by
/// `λ^n`, giving points within `λ^n d` of `y`. The `lambda_witnesses`
/// record orbit times where `T^k x` approaches `λx`; they are re-verified
/// and must have increasing times.
pub fn amplify_coarse_witnesses<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    y: &SeqVector<S>,
    d: &S::Real,
    lambda: &S::Real,
    lambda_witnesses: &[CoarseWitness<S>],
    coarse_witnesses: &[CoarseWitness<S>],
) -> Result<Vec<AmplifiedPoint<S>>> {
    if !lambda.is_positive() || !Real::strictly_below(lambda, &S::Real::one()) {
        return Err(Error::InvalidArgument(format!("λ must lie in (0, 1), got {}", lambda.to_f64())));
    }
    let lx = x.scale_real(lambda);
    for (i, w) in lambda_witnesses.iter().enumerate() {
        if i > 0 && w.time <= lambda_witnesses[i - 1].time {
            return Err(Error::VerificationFailed("λ-witness times must increase".into()));
        }
        if w.base != *x || !approx_equal(&w.target, &lx)? {
            return Err(Error::VerificationFailed(format!("λ-witness {i} does not approach λx from x")));
        }
        w.verify(t)?;
    }
    let mut out = Vec::with_capacity(coarse_witnesses.len());
    for (idx, w) in coarse_witnesses.iter().enumerate() {
        let n = idx as u32 + 1;
        let ln = lambda.powi(n as i32);
        if w.base != *x || w.bound != *d {
            return Err(Error::VerificationFailed(format!("coarse witness {n} has a different base or bound")));
        }
        if !approx_equal(&w.target.scale_real(&ln), y)? {
            return Err(Error::VerificationFailed(format!("coarse witness {n} does not target y/λ^{n}")));
        }
        w.verify(t)?;
        let point = t.apply_power(w.time, &x.scale_real(&ln))?;
        let distance = norm(&point.sub(y)?, w.norm_tag);
        let bound = d.clone() * ln.clone();
        let expected = w.achieved_distance.scale(&ln);
        if !distance.lt(&bound) || !distance.same_as(&expected) {
            return Err(Error::VerificationFailed(format!(
                "n = {n}: distance {} against bound {} and scaled original {}",
                distance.to_f64(),
                bound.to_f64(),
                expected.to_f64()
            )));
        }
        out.push(AmplifiedPoint { n, time: w.time, point, distance, bound, original_distance: w.achieved_distance.clone() });
    }
    Ok(out)
}

/// Two members `n0 < n1` of a claimed family and the coordinate `-k_{n1}`
/// where they force incompatible values of `w`.
#[derive(Debug, Clone)]
pub struct Contradiction {
    pub n0: usize,
    pub n1: usize,
    pub coordinate: i64,
    /// Upper bound for `|w(c) - 1|` derived from member `n1`.
    pub bound_near_one: f64,
    /// Upper bound for `|w(c)|` derived from member `n0`.
    pub bound_near_zero: f64,
    pub contradicts: bool,
}

impl Contradiction {
    pub fn to_json(&self) -> Value {
        json!({
            "n0": self.n0,
            "n1": self.n1,
            "coordinate": self.coordinate,
            "bound_abs_w_minus_one": self.bound_near_one,
            "bound_abs_w": self.bound_near_zero,
            "contradicts": self.contradicts,
        })
    }
}

/// Checks a claimed family `(y_n, k_n)` with `||y_n - e_0||_∞ < 1/4` and
/// `||T^{k_n} y_n - w||_∞ < 1/4` for the shift whose weights are `1` on the
/// non-positive indices. At `c = -k_{n1}` the later member forces
/// `|w(c) - 1| < 1/2` while the earlier one forces `|w(c)| < 1/2`.
pub fn contradiction_check<S: Scalar>(
    t: &ShiftOperator<S>,
    w: &SeqVector<S>,
    family: &[(SeqVector<S>, u64)],
) -> Result<Contradiction> {
    let reject = |msg: String| Err(Error::InputNotAWitnessFamily(msg));
    if family.len() < 2 {
        return reject(format!("{} members; two are needed", family.len()));
    }
    let quarter = S::Real::one() / S::Real::from_int(4);
    let e0 = SeqVector::basis(t.index_set(), 0)?;
    let mut images = Vec::with_capacity(family.len());
    for (i, (y, k)) in family.iter().enumerate() {
        if i > 0 && *k <= family[i - 1].1 {
            return reject("times must strictly increase".into());
        }
        if !norm(&y.sub(&e0)?, NormTag::PInf).lt(&quarter) {
            return reject(format!("member {i}: ||y - e_0|| is not below 1/4"));
        }
        let image = t.apply_power(*k, y)?;
        if !norm(&image.sub(w)?, NormTag::PInf).lt(&quarter) {
            return reject(format!("member {i}: ||T^{k} y - w|| is not below 1/4"));
        }
        images.push(image);
    }
    let (n0, n1) = (0, family.len() - 1);
    let c = -(family[n1].1 as i64);
    let wc = w.at(c);
    let gap = |a: &S, b: &S| (a.clone() - b.clone()).modulus().to_f64();
    let one = S::one();
    let near_one = gap(&images[n1].at(c), &wc) + gap(&images[n1].at(c), &one);
    let near_zero = gap(&images[n0].at(c), &wc) + images[n0].at(c).modulus().to_f64();
    Ok(Contradiction {
        n0,
        n1,
        coordinate: c,
        bound_near_one: near_one,
        bound_near_zero: near_zero,
        contradicts: near_one < 0.5 && near_zero < 0.5,
    })
}

/// The witness for `y` from `x/N` at bound `d/N`, given one for `N y` from `x`.
pub fn shrink_j_witness<S: Scalar>(t: &ShiftOperator<S>, w: &JWitness<S>, factor: &S::Real) -> Result<JWitness<S>> {
    w.verify(t)?;
    if !factor.is_positive() {
        return Err(Error::InvalidArgument("shrink factor must be positive".into()));
    }
    let out = w.scaled(&(S::Real::one() / factor.clone()))?;
    out.verify(t)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit_sets::{jmix_witness, search_j_witness, synthesize_shift_j_witness, EpsSchedule, SearchConfig};
    use crate::operators::{preset, real_weight, WeightRule};
    use crate::orbits::{coarse_orbit_contains, synthesize_orbit_seed};
    use crate::scalar::{ratio, ratio_int, Exact, Float};
    use crate::spaces::IndexSet;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn en(i: i64) -> SeqVector<Exact> {
        SeqVector::basis(IndexSet::Naturals, i).unwrap()
    }

    fn ez(i: i64) -> SeqVector<Exact> {
        SeqVector::basis(IndexSet::Integers, i).unwrap()
    }

    fn pow2(k: u32) -> BigRational {
        BigRational::from_integer(BigInt::from(2).pow(k))
    }

    fn scaled_family(t: &ShiftOperator<Exact>, ks: std::ops::RangeInclusive<u32>) -> Vec<(BigRational, JWitness<Exact>)> {
        let x = SeqVector::zero(IndexSet::Naturals);
        ks.map(|k| {
            let s = pow2(k);
            let w = jmix_witness(t, &x, &en(0).scale_real(&s), &ratio_int(1), &EpsSchedule::harmonic(4), 1, &SearchConfig::default(), NormTag::P2)
                .unwrap();
            (s, w)
        })
        .collect()
    }

    #[test]
    fn family_reaches_the_target_tolerance() {
        let t = preset::<Exact>("constant-2-unilateral").unwrap();
        let family = scaled_family(&t, 1..=11);
        let cert = rescale_j_witness_family(&t, &family, &ratio(1, 1024)).unwrap();
        assert_eq!(cert.first_member, 10);
        assert_eq!(cert.bound, ratio(1, 2048));
        for tr in &cert.triples {
            assert!(tr.distance.lt(&ratio(1, 1024)));
        }
        let short = &family[..9];
        assert!(matches!(rescale_j_witness_family(&t, short, &ratio(1, 1024)), Err(Error::FamilyTooShort(_))));
    }

    #[test]
    fn single_member_suffices_for_loose_tolerance() {
        let t = preset::<Exact>("constant-2-unilateral").unwrap();
        let x = SeqVector::zero(IndexSet::Naturals);
        let w = jmix_witness(&t, &x, &en(0), &ratio_int(1), &EpsSchedule::harmonic(3), 1, &SearchConfig::default(), NormTag::P2)
            .unwrap();
        let cert = rescale_j_witness_family(&t, &[(ratio_int(1), w)], &ratio_int(2)).unwrap();
        assert_eq!(cert.triples.len(), 3);
    }

    #[test]
    fn family_scales_must_increase() {
        let t = preset::<Exact>("constant-2-unilateral").unwrap();
        let mut family = scaled_family(&t, 1..=2);
        family.swap(0, 1);
        assert!(rescale_j_witness_family(&t, &family, &ratio(1, 2)).is_err());
    }

    fn lambda_chain(lambda: BigRational, m: usize) -> (ShiftOperator<Exact>, SeqVector<Exact>, SeqVector<Exact>, Vec<CoarseWitness<Exact>>) {
        let t = preset::<Exact>("constant-2-unilateral").unwrap();
        let y = en(0);
        let targets: Vec<_> = (1..=m).map(|n| y.scale_real(&(ratio_int(1) / lambda.pow(n as i32)))).collect();
        let seed = synthesize_orbit_seed(&t, &targets, &ratio_int(1), NormTag::P2, 1, 10_000).unwrap();
        (t, seed.base, y, seed.witnesses)
    }

    #[test]
    fn amplified_distances_shrink_geometrically() {
        let (t, x, y, coarse) = lambda_chain(ratio(1, 2), 10);
        let pts = amplify_coarse_witnesses(&t, &x, &y, &ratio_int(1), &ratio(1, 2), &[], &coarse).unwrap();
        for p in &pts {
            assert!(p.distance.le(&(ratio_int(1) / pow2(p.n))));
            assert!(p.distance.same_as(&p.original_distance.scale(&(ratio_int(1) / pow2(p.n)))));
        }
        assert!(amplify_coarse_witnesses(&t, &x, &y, &ratio_int(1), &ratio_int(0), &[], &coarse).is_err());
        assert!(amplify_coarse_witnesses(&t, &x, &y, &ratio_int(1), &ratio(1, 3), &[], &coarse).is_err());
    }

    #[test]
    fn amplification_of_a_periodic_point() {
        // every even power of the sign flip fixes x
        let t = ShiftOperator::<Exact>::diagonal(IndexSet::Integers, WeightRule::Constant(real_weight(-1, 1))).unwrap();
        let x = ez(0).add(&ez(-1)).unwrap();
        let y = x.scale_real(&ratio(3, 4));
        let coarse: Vec<_> = (1..=4)
            .map(|n| {
                let target = y.scale_real(&pow2(n));
                let time = 2 * n as u64;
                let dist = norm(&t.apply_power(time, &x).unwrap().sub(&target).unwrap(), NormTag::PInf);
                CoarseWitness { time, achieved_distance: dist, target, base: x.clone(), bound: ratio_int(100), norm_tag: NormTag::PInf }
            })
            .collect();
        let pts = amplify_coarse_witnesses(&t, &x, &y, &ratio_int(100), &ratio(1, 2), &[], &coarse).unwrap();
        for p in &pts {
            assert!(p.distance.same_as(&p.original_distance.scale(&(ratio_int(1) / pow2(p.n)))));
        }
    }

    #[test]
    fn amplification_in_float_mode() {
        let (t, x, y, coarse) = lambda_chain(ratio(1, 2), 6);
        let tf = t.to_float();
        let cf: Vec<CoarseWitness<Float>> = coarse
            .iter()
            .map(|w| {
                let base = w.base.to_float();
                let target = w.target.to_float();
                let d = norm(&tf.apply_power(w.time, &base).unwrap().sub(&target).unwrap(), NormTag::P2);
                CoarseWitness { time: w.time, achieved_distance: d, target, base, bound: 1.0, norm_tag: NormTag::P2 }
            })
            .collect();
        let pts = amplify_coarse_witnesses(&tf, &x.to_float(), &y.to_float(), &1.0, &0.5, &[], &cf).unwrap();
        assert_eq!(pts.len(), 6);
    }

    #[test]
    fn contradiction_inputs_are_rejected() {
        let t = preset::<Exact>("paper-prop32").unwrap();
        let zero = SeqVector::zero(IndexSet::Integers);
        assert!(matches!(contradiction_check(&t, &zero, &[]), Err(Error::InputNotAWitnessFamily(_))));
        let family: Vec<_> = (1..=5).map(|n| (ez(0), n)).collect();
        assert!(matches!(contradiction_check(&t, &zero, &family), Err(Error::InputNotAWitnessFamily(_))));
    }

    #[test]
    fn forced_quarter_searches_never_yield_a_family() {
        let t = preset::<Exact>("paper-prop32").unwrap();
        let y = ez(2).scale_real(&ratio(1, 2));
        let s = EpsSchedule::harmonic_scaled(3, &ratio(1, 4));
        let cfg = SearchConfig { k_cap: 200, probe_factor: 1, ..SearchConfig::default() };
        match search_j_witness(&t, &ez(0), &y, &ratio(1, 4), &s, &cfg, NormTag::PInf) {
            Err(e) => assert!(e.is_not_found()),
            Ok(w) => {
                let fam: Vec<_> = w.triples.iter().map(|tr| (tr.point.clone(), tr.time)).collect();
                match contradiction_check(&t, &y, &fam) {
                    Ok(c) => assert!(c.contradicts),
                    Err(e) => assert!(matches!(e, Error::InputNotAWitnessFamily(_))),
                }
            }
        }
    }

    #[test]
    fn shrinking_keeps_exact_hits() {
        let t = preset::<Exact>("constant-2-unilateral").unwrap();
        let x = en(1);
        let w = synthesize_shift_j_witness(&t, &x, &en(0).scale_real(&ratio_int(10)), &ratio_int(1), &EpsSchedule::harmonic(3), 1, 100, NormTag::P2)
            .unwrap();
        let same = shrink_j_witness(&t, &w, &ratio_int(1)).unwrap();
        assert_eq!(same.base, w.base);
        let s = shrink_j_witness(&t, &w, &ratio_int(10)).unwrap();
        assert_eq!(s.base, x.scale_real(&ratio(1, 10)));
        assert_eq!(s.target, en(0));
        assert!(s.triples.iter().all(|tr| tr.distance.is_zero()));
        let mut cur = w;
        for j in 1..=10 {
            cur = shrink_j_witness(&t, &cur, &ratio_int(2)).unwrap();
            assert!(cur.max_distance() <= 2f64.powi(-j));
        }
    }

    #[test]
    fn coarse_witnesses_from_the_orbit_feed_amplification() {
        let (t, x, _, _) = lambda_chain(ratio(1, 2), 2);
        let y = t.apply_power(3, &x).unwrap();
        let w = coarse_orbit_contains(&t, &x, &ratio_int(1), &y.scale_real(&ratio_int(2)), 10_000, NormTag::P2).unwrap();
        if let Some(w) = w {
            let pts = amplify_coarse_witnesses(&t, &x, &y, &ratio_int(1), &ratio(1, 2), &[], &[w]).unwrap();
            assert_eq!(pts.len(), 1);
        }
    }
}
