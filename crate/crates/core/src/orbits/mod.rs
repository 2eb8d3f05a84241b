//! Orbits `T^n x`, coarse orbits `{y : ||T^n x - y|| < d for some n}`, and
//! sampled coarse density of an orbit on a cone.
//!
//! Every search runs to an explicit horizon `K`; not finding a witness only
//! ever means "none up to `K`".

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::operators::ShiftOperator;
use crate::scalar::{Magnitude, NumericMode, Real, Scalar};
use crate::spaces::{norm, ConeSampler, NormTag, OpenCone, SeqVector};

/// `T^n x` for `n = 0..=K`, computed by repeated single steps.
#[derive(Debug, Clone)]
pub struct OrbitTrace<S: Scalar> {
    pub base: SeqVector<S>,
    pub horizon: u64,
    pub norm_tag: NormTag,
    pub points: Vec<SeqVector<S>>,
    pub norms: Vec<S::Norm>,
}

/// Float mode: refuse to carry coordinates past `2^900`.
fn guard_overflow<S: Scalar>(v: &SeqVector<S>) -> Result<()> {
    if S::MODE == NumericMode::Float {
        for (_, value) in v.iter() {
            let l = value.log2_abs();
            if l.is_nan() || l > 900.0 {
                return Err(Error::Overflow { log2: l });
            }
        }
    }
    Ok(())
}

pub fn orbit<S: Scalar>(t: &ShiftOperator<S>, x: &SeqVector<S>, horizon: u64, p: NormTag) -> Result<OrbitTrace<S>> {
    let mut points = Vec::with_capacity(horizon as usize + 1);
    let mut current = x.clone();
    guard_overflow(&current)?;
    points.push(current.clone());
    for _ in 0..horizon {
        current = t.apply(&current)?;
        guard_overflow(&current)?;
        points.push(current.clone());
    }
    let norms = points.iter().map(|v| norm(v, p)).collect();
    Ok(OrbitTrace { base: x.clone(), horizon, norm_tag: p, points, norms })
}

impl<S: Scalar> OrbitTrace<S> {
    /// `n,norm,support_min,support_max,entries_json` with one row per point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,norm,support_min,support_max,entries_json\n");
        for (n, (v, nv)) in self.points.iter().zip(&self.norms).enumerate() {
            let (lo, hi) = match v.support_bounds() {
                Some((a, b)) => (a.to_string(), b.to_string()),
                None => (String::new(), String::new()),
            };
            let entries = v.to_json()["entries"].to_string().replace('"', "\"\"");
            out.push_str(&format!("{n},{},{lo},{hi},\"{entries}\"\n", nv.to_f64()));
        }
        out
    }
}

/// Certificate that `||T^time base - target|| < bound`.
#[derive(Debug, Clone)]
pub struct CoarseWitness<S: Scalar> {
    pub time: u64,
    pub achieved_distance: S::Norm,
    pub target: SeqVector<S>,
    pub base: SeqVector<S>,
    pub bound: S::Real,
    pub norm_tag: NormTag,
}

impl<S: Scalar> CoarseWitness<S> {
    /// Recomputes the distance through [`ShiftOperator::apply_power`].
    pub fn verify(&self, t: &ShiftOperator<S>) -> Result<()> {
        let image = t.apply_power(self.time, &self.base)?;
        let dist = norm(&image.sub(&self.target)?, self.norm_tag);
        if !dist.lt(&self.bound) {
            return Err(Error::VerificationFailed(format!(
                "||T^{} x - y|| = {} is not below {}",
                self.time,
                dist.to_f64(),
                self.bound.to_f64()
            )));
        }
        if !dist.same_as(&self.achieved_distance) {
            return Err(Error::VerificationFailed(format!(
                "recorded distance {} differs from recomputed {}",
                self.achieved_distance.to_f64(),
                dist.to_f64()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "time": self.time,
            "achieved_distance": self.achieved_distance.to_json(),
            "bound": self.bound.to_json(),
            "norm": self.norm_tag,
            "base": self.base.to_json(),
            "target": self.target.to_json(),
        })
    }
}

pub(crate) fn require_positive<R: Real>(d: &R) -> Result<()> {
    if !d.is_positive() {
        return Err(Error::InvalidArgument(format!("distance bound must be positive, got {}", d.to_f64())));
    }
    Ok(())
}

/// Smallest `n <= horizon` with `||T^n x - y|| < d`, re-verified.
pub fn coarse_orbit_contains<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    d: &S::Real,
    y: &SeqVector<S>,
    horizon: u64,
    p: NormTag,
) -> Result<Option<CoarseWitness<S>>> {
    require_positive(d)?;
    x.ensure_same_index_set(y)?;
    let mut current = x.clone();
    for n in 0..=horizon {
        if n > 0 {
            current = t.apply(&current)?;
        }
        guard_overflow(&current)?;
        let dist = norm(&current.sub(y)?, p);
        if dist.lt(d) {
            let w = CoarseWitness {
                time: n,
                achieved_distance: dist,
                target: y.clone(),
                base: x.clone(),
                bound: d.clone(),
                norm_tag: p,
            };
            w.verify(t)?;
            return Ok(Some(w));
        }
        if current.is_zero() {
            // every later point is zero as well
            return Ok(None);
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub struct DensitySample<S: Scalar> {
    pub target: SeqVector<S>,
    pub witness: Option<CoarseWitness<S>>,
}

#[derive(Debug, Clone)]
pub struct DensityReport<S: Scalar> {
    pub samples: Vec<DensitySample<S>>,
    pub hit_ratio: f64,
    pub max_time: Option<u64>,
    pub horizon: u64,
    pub seed: u64,
    pub passed: bool,
    pub warnings: Vec<String>,
}

impl<S: Scalar> DensityReport<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "hit_ratio": self.hit_ratio,
            "max_first_witness_time": self.max_time,
            "horizon": self.horizon,
            "seed": self.seed,
            "verdict": if self.passed { "PASS" } else { "FAIL" },
            "warnings": self.warnings,
            "samples": self.samples.iter().map(|s| json!({
                "target": s.target.to_json(),
                "witness": s.witness.as_ref().map(CoarseWitness::to_json),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Samples `sample_count` points of `cone` and looks for each in the coarse
/// orbit up to `horizon`. Passes iff every sample is witnessed.
#[allow(clippy::too_many_arguments)]
pub fn coarse_density_report<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    d: &S::Real,
    cone: &OpenCone<S>,
    sampler: &ConeSampler,
    sample_count: usize,
    horizon: u64,
    seed: u64,
) -> Result<DensityReport<S>> {
    require_positive(d)?;
    let targets = if sample_count == 0 { Vec::new() } else { sampler.sample(cone, sample_count, seed)? };
    let p = cone.norm_tag();
    let samples: Vec<DensitySample<S>> = targets
        .into_par_iter()
        .map(|target| {
            let witness = coarse_orbit_contains(t, x, d, &target, horizon, p)?;
            Ok(DensitySample { target, witness })
        })
        .collect::<Result<_>>()?;
    let hits = samples.iter().filter(|s| s.witness.is_some()).count();
    let mut warnings = Vec::new();
    if samples.is_empty() {
        warnings.push("no samples drawn: the density check holds vacuously".to_string());
    }
    let hit_ratio = if samples.is_empty() { 1.0 } else { hits as f64 / samples.len() as f64 };
    let max_time = samples.iter().filter_map(|s| s.witness.as_ref().map(|w| w.time)).max();
    Ok(DensityReport { passed: hits == samples.len(), samples, hit_ratio, max_time, horizon, seed, warnings })
}

/// Turns a witness for `(d/M) y` in the coarse orbit of `x` at bound `d`
/// into a witness for `y` in the coarse orbit of `(M/d) x` at bound `M`.
pub fn rescale_coarse_witness<S: Scalar>(
    t: &ShiftOperator<S>,
    w: &CoarseWitness<S>,
    m: &S::Real,
) -> Result<CoarseWitness<S>> {
    require_positive(m)?;
    w.verify(t)?;
    let factor = m.clone() / w.bound.clone();
    let out = CoarseWitness {
        time: w.time,
        achieved_distance: w.achieved_distance.scale(&factor),
        target: w.target.scale_real(&factor),
        base: w.base.scale_real(&factor),
        bound: m.clone(),
        norm_tag: w.norm_tag,
    };
    out.verify(t)?;
    Ok(out)
}

/// Number of distinct points among `T^n x`, `n <= horizon`, at distance
/// `< radius` from `y`.
pub fn orbit_points_near<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    y: &SeqVector<S>,
    radius: &S::Real,
    horizon: u64,
    p: NormTag,
) -> Result<usize> {
    let mut seen = BTreeSet::new();
    let mut current = x.clone();
    for n in 0..=horizon {
        if n > 0 {
            current = t.apply(&current)?;
        }
        guard_overflow(&current)?;
        if norm(&current.sub(y)?, p).lt(radius) {
            seen.insert(current.to_json().to_string());
        }
        if current.is_zero() {
            break;
        }
    }
    Ok(seen.len())
}

/// A vector whose orbit passes within `d` of every prescribed target.
#[derive(Debug, Clone)]
pub struct OrbitSeed<S: Scalar> {
    pub base: SeqVector<S>,
    pub times: Vec<u64>,
    pub witnesses: Vec<CoarseWitness<S>>,
}

/// Builds `x = Σ δ_i` with `T^{k_i} δ_i` matching target `i` exactly on its
/// support, choosing increasing times `k_i` so that every other piece
/// contributes less than `d/2` at time `k_i`.
///
/// Works for any operator where each target coordinate has a preimage
/// (backward shifts); fails with [`Error::SynthesisFailed`] when no time up to
/// `max_time` keeps the cross terms small.
pub fn synthesize_orbit_seed<S: Scalar>(
    t: &ShiftOperator<S>,
    targets: &[SeqVector<S>],
    d: &S::Real,
    p: NormTag,
    start: u64,
    max_time: u64,
) -> Result<OrbitSeed<S>> {
    let earliest = vec![start; targets.len()];
    synthesize_orbit_seed_with_times(t, targets, &earliest, d, p, max_time)
}

/// As [`synthesize_orbit_seed`], with target `i` placed no earlier than
/// `earliest[i]`.
pub fn synthesize_orbit_seed_with_times<S: Scalar>(
    t: &ShiftOperator<S>,
    targets: &[SeqVector<S>],
    earliest: &[u64],
    d: &S::Real,
    p: NormTag,
    max_time: u64,
) -> Result<OrbitSeed<S>> {
    if earliest.len() != targets.len() {
        return Err(Error::InvalidArgument("one earliest time per target is needed".into()));
    }
    let half = d.clone() / S::Real::from_int(2);
    let mut base = SeqVector::zero(t.index_set());
    let mut times: Vec<u64> = Vec::with_capacity(targets.len());
    for (i, y) in targets.iter().enumerate() {
        // later pieces may disturb each earlier time by at most d / 2^(i+2)
        let budget = half.clone() / S::Real::from_int(2).powi(i as i32 + 1);
        let mut k = times.last().map_or(earliest[i], |last| (last + 1).max(earliest[i]));
        let piece = loop {
            if k > max_time {
                return Err(Error::SynthesisFailed(format!(
                    "no placement time up to {max_time} for target {i}"
                )));
            }
            if let Some(delta) = place_piece(t, &base, y, k, &half, &budget, &times, p)? {
                break delta;
            }
            k += 1;
        };
        base = base.add(&piece)?;
        times.push(k);
    }
    let mut witnesses = Vec::with_capacity(targets.len());
    for (y, &k) in targets.iter().zip(&times) {
        let dist = norm(&t.apply_power(k, &base)?.sub(y)?, p);
        let w = CoarseWitness { time: k, achieved_distance: dist, target: y.clone(), base: base.clone(), bound: d.clone(), norm_tag: p };
        w.verify(t)?;
        witnesses.push(w);
    }
    Ok(OrbitSeed { base, times, witnesses })
}

#[allow(clippy::too_many_arguments)]
fn place_piece<S: Scalar>(
    t: &ShiftOperator<S>,
    base: &SeqVector<S>,
    y: &SeqVector<S>,
    k: u64,
    residual_cap: &S::Real,
    cross_cap: &S::Real,
    earlier: &[u64],
    p: NormTag,
) -> Result<Option<SeqVector<S>>> {
    let carried = t.apply_power(k, base)?;
    let mut entries = Vec::with_capacity(y.support_len());
    for j in y.indices() {
        let Some((src, w)) = t.source_of(j, k)? else { return Ok(None) };
        if w.is_zero() {
            return Ok(None);
        }
        entries.push((src, (y.at(j) - carried.at(j)) / w.value));
    }
    let delta = SeqVector::from_entries(t.index_set(), entries)?;
    let image = carried.add(&t.apply_power(k, &delta)?)?;
    if !norm(&image.sub(y)?, p).lt(residual_cap) {
        return Ok(None);
    }
    for &e in earlier {
        if !norm(&t.apply_power(e, &delta)?, p).lt(cross_cap) {
            return Ok(None);
        }
    }
    Ok(Some(delta))
}
