//! Per-time back-solving and the time scans built on it.
//!
//! At a fixed time `k` every coordinate `j` of the residual `y - T^k x` has
//! at most one source index `s` with `T^k e_s = g_j e_j`. A perturbation
//! `δ(s) = t_j r_j / g_j` with `t_j ∈ [0, 1]` removes the fraction `t_j` of
//! the residual at `j`, so the problem decouples by coordinate:
//!
//! * synthesis sets `t_j = 1` on the target's support and leaves the carried
//!   image of `x` elsewhere as residual;
//! * search picks `t_j` to minimise the residual norm subject to
//!   `||δ|| ≤ ρ < ε`: clamping per coordinate for the sup norm, a Tikhonov
//!   weight found by bisection for the Euclidean norm, and a greedy fill by
//!   `|g_j|` for the `1`-norm.
//!
//! Everything is first estimated from `log2` magnitudes in double precision;
//! only times that pass this screen are computed exactly and re-verified.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DWitness, EpsSchedule, JTriple, JWitness};
use crate::error::{Error, Result};
use crate::operators::ShiftOperator;
use crate::orbits::{coarse_orbit_contains, require_positive};
use crate::scalar::{Magnitude, Real, Scalar};
use crate::spaces::{norm, NormTag, SeqVector};

/// Time range and effort limits of a witness search.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub k_min: u64,
    /// End of the linear scan over times.
    pub k_cap: u64,
    /// Seeded random probes continue in `(k_cap, probe_factor * k_cap]`.
    pub probe_factor: u64,
    /// Maximum number of time evaluations plus exact power applications.
    pub budget: u64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { k_min: 1, k_cap: 10_000, probe_factor: 4, budget: 1_000_000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Synthesis,
    Search,
}

/// `m · 2^e` with `|m| = 1`, or zero.
#[derive(Debug, Clone, Copy)]
struct LogNum {
    m: Complex64,
    e: f64,
}

impl LogNum {
    const ZERO: LogNum = LogNum { m: Complex64::new(0.0, 0.0), e: f64::NEG_INFINITY };

    fn of<S: Scalar>(z: &S) -> Option<LogNum> {
        if z.is_zero() {
            return Some(Self::ZERO);
        }
        let c = z.to_c64();
        let n = c.norm();
        (n.is_finite() && n > 0.0).then(|| LogNum { m: c / n, e: z.log2_abs() })
    }

    fn is_zero(&self) -> bool {
        self.e == f64::NEG_INFINITY
    }

    fn mul(self, phase: Complex64, log2: f64) -> LogNum {
        if self.is_zero() {
            return self;
        }
        LogNum { m: self.m * phase, e: self.e + log2 }
    }

    fn sub(self, other: LogNum) -> LogNum {
        if other.is_zero() {
            return self;
        }
        if self.is_zero() {
            return LogNum { m: -other.m, e: other.e };
        }
        let top = self.e.max(other.e);
        let c = self.m * (self.e - top).exp2() - other.m * (other.e - top).exp2();
        let n = c.norm();
        if n == 0.0 {
            Self::ZERO
        } else {
            LogNum { m: c / n, e: top + n.log2() }
        }
    }
}

/// `log2` of the p-norm of a vector given by the `log2` of its entries.
fn log_norm(logs: impl Iterator<Item = f64>, p: NormTag) -> f64 {
    let logs: Vec<f64> = logs.filter(|l| *l > f64::NEG_INFINITY).collect();
    let Some(top) = logs.iter().cloned().reduce(f64::max) else { return f64::NEG_INFINITY };
    match p {
        NormTag::PInf => top,
        NormTag::P1 => top + logs.iter().map(|l| (l - top).exp2()).sum::<f64>().log2(),
        NormTag::P2 => top + 0.5 * logs.iter().map(|l| (2.0 * (l - top)).exp2()).sum::<f64>().log2(),
    }
}

/// One residual coordinate at time `k`.
#[derive(Debug, Clone)]
struct Coord {
    j: i64,
    /// `log2 |y_j - (T^k x)_j|`.
    lr: f64,
    /// Source index and `log2 |g_j|`, when a correction is possible.
    source: Option<(i64, f64)>,
    on_target: bool,
}

/// Fraction `t_j` of each coordinate to correct, and the estimated
/// residual norm (`log2`).
fn optimise(coords: &[Coord], log_rho: f64, p: NormTag) -> (Vec<f64>, f64) {
    let lb = |c: &Coord| c.source.map(|(_, lg)| c.lr - lg);
    let mut t = vec![0.0; coords.len()];
    match p {
        NormTag::PInf => {
            for (ti, c) in t.iter_mut().zip(coords) {
                if let Some(b) = lb(c) {
                    *ti = (log_rho - b).exp2().min(1.0);
                }
            }
        }
        NormTag::P1 => {
            let mut order: Vec<usize> = (0..coords.len()).filter(|&i| coords[i].source.is_some()).collect();
            order.sort_by(|&a, &b| {
                let ga = coords[a].source.unwrap().1;
                let gb = coords[b].source.unwrap().1;
                gb.total_cmp(&ga)
            });
            let mut remaining = 1.0;
            for i in order {
                let cost = (lb(&coords[i]).unwrap() - log_rho).exp2();
                if cost <= remaining {
                    t[i] = 1.0;
                    remaining -= cost;
                } else {
                    t[i] = remaining / cost;
                    break;
                }
            }
        }
        NormTag::P2 => {
            let movable: Vec<usize> = (0..coords.len()).filter(|&i| coords[i].source.is_some()).collect();
            let spend = |lmu: Option<f64>, t: &mut [f64]| -> f64 {
                let mut parts = Vec::with_capacity(movable.len());
                for &i in &movable {
                    let (_, lg) = coords[i].source.unwrap();
                    t[i] = match lmu {
                        None => 1.0,
                        Some(l) => 1.0 / (1.0 + (l - 2.0 * lg).exp2()),
                    };
                    if t[i] > 0.0 {
                        parts.push(t[i].log2() + lb(&coords[i]).unwrap() - log_rho);
                    }
                }
                log_norm(parts.into_iter(), NormTag::P2)
            };
            if spend(None, &mut t) > 0.0 {
                let lgs = movable.iter().map(|&i| coords[i].source.unwrap().1);
                let lo_g = lgs.clone().fold(f64::INFINITY, f64::min);
                let hi = movable
                    .iter()
                    .map(|&i| 2.0 * coords[i].source.unwrap().1 + (lb(&coords[i]).unwrap() - log_rho).max(0.0))
                    .fold(f64::NEG_INFINITY, f64::max)
                    + 16.0;
                let mut lo = 2.0 * lo_g - 64.0;
                let mut hi = hi;
                for _ in 0..120 {
                    let mid = 0.5 * (lo + hi);
                    if spend(Some(mid), &mut t) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                spend(Some(hi), &mut t);
            }
        }
    }
    let residual = coords.iter().zip(&t).map(|(c, ti)| {
        if *ti >= 1.0 {
            f64::NEG_INFINITY
        } else {
            (1.0 - ti).log2() + c.lr
        }
    });
    let est = log_norm(residual, p);
    (t, est)
}

/// Outcome of one time.
enum Attempt<S: Scalar> {
    Found(JTriple<S>),
    Rejected { delta: f64, residual: f64 },
}

struct Solver<'a, S: Scalar> {
    t: &'a ShiftOperator<S>,
    x: &'a SeqVector<S>,
    y: &'a SeqVector<S>,
    d: &'a S::Real,
    p: NormTag,
    mode: Mode,
    used: u64,
}

/// Relative slack of the double precision screen.
const SCREEN_SLACK: f64 = 1e-6;

impl<S: Scalar> Solver<'_, S> {
    fn coords(&self, k: u64) -> Option<Vec<Coord>> {
        let mut carried: BTreeMap<i64, LogNum> = BTreeMap::new();
        for (s, v) in self.x.iter() {
            if let Some((j, l, ph)) = self.t.image_log2_phase(s, k) {
                carried.insert(j, LogNum::of(v)?.mul(ph, l));
            }
        }
        let mut idx: Vec<i64> = self.y.indices().collect();
        if self.mode == Mode::Search {
            idx.extend(carried.keys().copied());
            idx.sort_unstable();
            idx.dedup();
        }
        let mut coords = Vec::with_capacity(idx.len());
        for j in idx {
            let yj = LogNum::of(&self.y.at(j))?;
            let r = yj.sub(carried.get(&j).copied().unwrap_or(LogNum::ZERO));
            if r.is_zero() {
                continue;
            }
            coords.push(Coord {
                j,
                lr: r.e,
                source: self.t.source_log2(j, k).filter(|(_, lg)| lg.is_finite()),
                on_target: self.y.get(j).is_some(),
            });
        }
        if self.mode == Mode::Synthesis {
            // carried mass outside the target stays as residual
            for (j, c) in &carried {
                if self.y.get(*j).is_none() && !c.is_zero() {
                    coords.push(Coord { j: *j, lr: c.e, source: None, on_target: false });
                }
            }
        }
        Some(coords)
    }

    fn attempt(&mut self, k: u64, eps: &S::Real) -> Result<Attempt<S>> {
        self.used += 1;
        let log_d = self.d.to_f64().log2();
        let log_eps = eps.to_f64().log2();
        let screen = |v: f64, bound: f64| v <= bound + SCREEN_SLACK;
        let coords = self.coords(k);
        let (fractions, est_delta, est_res) = match &coords {
            None => (None, f64::NEG_INFINITY, f64::NEG_INFINITY),
            Some(coords) => match self.mode {
                Mode::Synthesis => {
                    if coords.iter().any(|c| c.on_target && c.source.is_none()) {
                        return Ok(Attempt::Rejected { delta: f64::INFINITY, residual: f64::INFINITY });
                    }
                    let delta = log_norm(coords.iter().filter_map(|c| c.source.map(|(_, lg)| c.lr - lg)), self.p);
                    let res = log_norm(coords.iter().filter(|c| c.source.is_none()).map(|c| c.lr), self.p);
                    let t = coords.iter().map(|c| if c.source.is_some() { 1.0 } else { 0.0 }).collect();
                    (Some(t), delta, res)
                }
                Mode::Search => {
                    let zero_res = log_norm(coords.iter().map(|c| c.lr), self.p);
                    if screen(zero_res, log_d) {
                        if let Some(tr) = self.exact(k, eps, coords, None)? {
                            return Ok(Attempt::Found(tr));
                        }
                    }
                    let log_rho = log_eps + (1.0 - 2f64.powi(-20)).log2();
                    // removing t_j r_j costs |δ_j| = t_j |r_j| / |g_j|, so at most
                    // max|g| ρ of the residual norm can be removed
                    let g_max = coords.iter().filter_map(|c| c.source.map(|(_, lg)| lg)).fold(f64::NEG_INFINITY, f64::max);
                    let removable = g_max + log_rho;
                    if zero_res > removable {
                        let lower = zero_res + (1.0 - (removable - zero_res).exp2()).log2();
                        if !screen(lower, log_d) {
                            return Ok(Attempt::Rejected { delta: log_rho.exp2(), residual: lower.exp2() });
                        }
                    }
                    let (t, res) = optimise(coords, log_rho, self.p);
                    (Some(t), log_rho, res)
                }
            },
        };
        if !screen(est_delta, log_eps) || !screen(est_res, log_d) {
            return Ok(Attempt::Rejected { delta: est_delta.exp2(), residual: est_res.exp2() });
        }
        let coords = coords.unwrap_or_default();
        match self.exact(k, eps, &coords, fractions.as_deref())? {
            Some(tr) => Ok(Attempt::Found(tr)),
            None => Ok(Attempt::Rejected { delta: est_delta.exp2(), residual: est_res.exp2() }),
        }
    }

    /// Builds `δ` exactly and checks both inequalities with fresh powers.
    /// `fractions = None` means the unperturbed point.
    fn exact(&mut self, k: u64, eps: &S::Real, coords: &[Coord], fractions: Option<&[f64]>) -> Result<Option<JTriple<S>>> {
        self.used += 1;
        let mut delta = SeqVector::zero(self.t.index_set());
        if let Some(fractions) = fractions {
            let carried = self.t.apply_power(k, self.x)?;
            self.used += 1;
            let mut entries = Vec::new();
            for (c, frac) in coords.iter().zip(fractions) {
                if *frac <= 0.0 {
                    continue;
                }
                let Some((src, w)) = self.t.source_of(c.j, k)? else { continue };
                if w.is_zero() {
                    continue;
                }
                let r = self.y.at(c.j) - carried.at(c.j);
                let full = r / w.value;
                let value = if *frac >= 1.0 { full } else { full.scale(&S::Real::from_f64(*frac)) };
                entries.push((src, value));
            }
            delta = SeqVector::from_entries(self.t.index_set(), entries)?;
        }
        let perturbation = norm(&delta, self.p);
        if !perturbation.lt(eps) {
            return Ok(None);
        }
        let point = self.x.add(&delta)?;
        let image = self.t.apply_power(k, &point)?;
        let distance = norm(&image.sub(self.y)?, self.p);
        if !distance.lt(self.d) {
            return Ok(None);
        }
        Ok(Some(JTriple { point, time: k, distance, perturbation }))
    }
}

fn validate<S: Scalar>(x: &SeqVector<S>, y: &SeqVector<S>, d: &S::Real, t: &ShiftOperator<S>) -> Result<()> {
    require_positive(d)?;
    x.ensure_same_index_set(y)?;
    if x.index_set() != t.index_set() {
        return Err(Error::IndexSetMismatch { left: t.index_set(), right: x.index_set() });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn assemble<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    y: &SeqVector<S>,
    d: &S::Real,
    schedule: &EpsSchedule<S::Real>,
    p: NormTag,
    triples: Vec<JTriple<S>>,
    mix: bool,
) -> Result<JWitness<S>> {
    let w = JWitness {
        base: x.clone(),
        target: y.clone(),
        bound: d.clone(),
        norm_tag: p,
        schedule: schedule.clone(),
        triples,
        mix,
    };
    w.verify(t)?;
    Ok(w)
}

/// Exact-correction witness for backward shifts: at each time the image is
/// set equal to `y` on `y`'s support and the carried image of `x` elsewhere
/// is the residual. Times are the smallest admissible ones from `k_min` up to
/// `k_cap`.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_shift_j_witness<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    y: &SeqVector<S>,
    d: &S::Real,
    schedule: &EpsSchedule<S::Real>,
    k_min: u64,
    k_cap: u64,
    p: NormTag,
) -> Result<JWitness<S>> {
    validate(x, y, d, t)?;
    if !t.is_backward() {
        return Err(Error::InvalidArgument("synthesis needs a backward shift".into()));
    }
    let mut solver = Solver { t, x, y, d, p, mode: Mode::Synthesis, used: 0 };
    let mut triples = Vec::with_capacity(schedule.len());
    let mut k = k_min.max(1);
    let mut best = (f64::INFINITY, f64::INFINITY);
    for (i, eps) in schedule.values().iter().enumerate() {
        loop {
            if k > k_cap {
                return Err(Error::SynthesisFailed(format!(
                    "time cap {k_cap} reached at triple {} of {}; smallest perturbation seen {:.3e} (residual {:.3e})",
                    i + 1,
                    schedule.len(),
                    best.0,
                    best.1
                )));
            }
            let outcome = match solver.attempt(k, eps) {
                Err(Error::Overflow { log2 }) => {
                    return Err(Error::SynthesisFailed(format!("float overflow (2^{log2:.0}) at time {k}")))
                }
                other => other?,
            };
            k += 1;
            match outcome {
                Attempt::Found(tr) => {
                    triples.push(tr);
                    break;
                }
                Attempt::Rejected { delta, residual } => {
                    if delta < best.0 {
                        best = (delta, residual);
                    }
                }
            }
        }
    }
    assemble(t, x, y, d, schedule, p, triples, false)
}

/// General search: linear scan of times up to `k_cap`, then seeded random
/// probes further out, each time solved by norm-adapted back-solving.
pub fn search_j_witness<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    y: &SeqVector<S>,
    d: &S::Real,
    schedule: &EpsSchedule<S::Real>,
    cfg: &SearchConfig,
    p: NormTag,
) -> Result<JWitness<S>> {
    validate(x, y, d, t)?;
    let mut solver = Solver { t, x, y, d, p, mode: Mode::Search, used: 0 };
    let mut probes: Vec<u64> = (cfg.k_cap + 1..=cfg.k_cap.saturating_mul(cfg.probe_factor)).collect();
    probes.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let linear = cfg.k_min.max(1)..=cfg.k_cap;
    let mut order = linear.chain(probes);
    let mut triples: Vec<JTriple<S>> = Vec::with_capacity(schedule.len());
    for (i, eps) in schedule.values().iter().enumerate() {
        let last = triples.last().map_or(0, |tr| tr.time);
        let found = loop {
            let Some(k) = order.next() else { break None };
            if k <= last {
                continue;
            }
            if solver.used >= cfg.budget {
                return Err(Error::BudgetExhausted(format!(
                    "{} evaluations spent; {} of {} triples found",
                    solver.used,
                    i,
                    schedule.len()
                )));
            }
            match solver.attempt(k, eps) {
                Err(Error::Overflow { log2 }) => {
                    return Err(Error::NotFound(format!("float overflow (2^{log2:.0}) at time {k}")))
                }
                Err(e) => return Err(e),
                Ok(Attempt::Found(tr)) => break Some(tr),
                Ok(Attempt::Rejected { .. }) => {}
            }
        };
        match found {
            Some(tr) => triples.push(tr),
            None => {
                return Err(Error::NotFound(format!(
                    "times up to {} exhausted with {} of {} triples found ({} evaluations)",
                    cfg.k_cap.saturating_mul(cfg.probe_factor),
                    i,
                    schedule.len(),
                    solver.used
                )))
            }
        }
    }
    assemble(t, x, y, d, schedule, p, triples, false)
}

/// Witness with consecutive times `N, N+1, ..., N+m-1`, `N >= n_start`.
/// A failing time restarts the run just after it.
#[allow(clippy::too_many_arguments)]
pub fn jmix_witness<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    y: &SeqVector<S>,
    d: &S::Real,
    schedule: &EpsSchedule<S::Real>,
    n_start: u64,
    cfg: &SearchConfig,
    p: NormTag,
) -> Result<JWitness<S>> {
    consecutive(t, x, y, d, schedule, n_start, cfg, p, Mode::Search)
}

/// Consecutive-time witness by exact correction on `y`'s support, as in
/// [`synthesize_shift_j_witness`]. From `x = 0` on an invertible shift the
/// points are exactly `T^{-n} y`.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_shift_jmix_witness<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    y: &SeqVector<S>,
    d: &S::Real,
    schedule: &EpsSchedule<S::Real>,
    n_start: u64,
    k_cap: u64,
    p: NormTag,
) -> Result<JWitness<S>> {
    if !t.is_backward() {
        return Err(Error::InvalidArgument("synthesis needs a backward shift".into()));
    }
    let cfg = SearchConfig { k_cap, budget: u64::MAX, ..SearchConfig::default() };
    consecutive(t, x, y, d, schedule, n_start, &cfg, p, Mode::Synthesis).map_err(|e| match e {
        Error::NotFound(msg) => Error::SynthesisFailed(msg),
        other => other,
    })
}

#[allow(clippy::too_many_arguments)]
fn consecutive<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    y: &SeqVector<S>,
    d: &S::Real,
    schedule: &EpsSchedule<S::Real>,
    n_start: u64,
    cfg: &SearchConfig,
    p: NormTag,
    mode: Mode,
) -> Result<JWitness<S>> {
    validate(x, y, d, t)?;
    let mut solver = Solver { t, x, y, d, p, mode, used: 0 };
    let mut triples: Vec<JTriple<S>> = Vec::with_capacity(schedule.len());
    let mut n = n_start.max(1);
    while triples.len() < schedule.len() {
        if n > cfg.k_cap {
            return Err(Error::NotFound(format!("no run of {} consecutive times up to {}", schedule.len(), cfg.k_cap)));
        }
        if solver.used >= cfg.budget {
            return Err(Error::BudgetExhausted(format!("{} evaluations spent", solver.used)));
        }
        let eps = &schedule.values()[triples.len()];
        match solver.attempt(n, eps) {
            Err(Error::Overflow { log2 }) => {
                return Err(Error::NotFound(format!("float overflow (2^{log2:.0}) at time {n}")))
            }
            Err(e) => return Err(e),
            Ok(Attempt::Found(tr)) => triples.push(tr),
            Ok(Attempt::Rejected { .. }) => triples.clear(),
        }
        n += 1;
    }
    assemble(t, x, y, d, schedule, p, triples, true)
}

/// Orbit branch up to `horizon` first, then the limit branch.
#[allow(clippy::too_many_arguments)]
pub fn d_witness<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    y: &SeqVector<S>,
    d: &S::Real,
    horizon: u64,
    schedule: &EpsSchedule<S::Real>,
    cfg: &SearchConfig,
    p: NormTag,
) -> Result<DWitness<S>> {
    if let Some(w) = coarse_orbit_contains(t, x, d, y, horizon, p)? {
        return Ok(DWitness::Orbit(w));
    }
    search_j_witness(t, x, y, d, schedule, cfg, p).map(DWitness::Limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{preset, real_weight, WeightRule};
    use crate::scalar::{ratio, ratio_int, Exact, Float};
    use crate::spaces::IndexSet;

    fn en(i: i64) -> SeqVector<Exact> {
        SeqVector::basis(IndexSet::Naturals, i).unwrap()
    }

    fn ez(i: i64) -> SeqVector<Exact> {
        SeqVector::basis(IndexSet::Integers, i).unwrap()
    }

    #[test]
    fn expanding_shift_synthesis_hits_exactly() {
        let t = preset::<Exact>("constant-2-unilateral").unwrap();
        let x = SeqVector::zero(IndexSet::Naturals);
        let w = synthesize_shift_j_witness(&t, &x, &en(0), &ratio(1, 4), &EpsSchedule::harmonic(3), 1, 100, NormTag::P2)
            .unwrap();
        for tr in &w.triples {
            assert!(tr.distance.is_zero());
            let k = tr.time as i64;
            assert_eq!(tr.point, en(k).scale_real(&(ratio_int(1) / ratio_int(2).pow(k as i32))));
        }
    }

    #[test]
    fn contracting_shift_synthesis_fails() {
        let t = preset::<Exact>("constant-half-unilateral").unwrap();
        let x = SeqVector::zero(IndexSet::Naturals);
        let r = synthesize_shift_j_witness(&t, &x, &en(0), &ratio(1, 4), &EpsSchedule::harmonic(5), 1, 200, NormTag::P2);
        assert!(matches!(r, Err(Error::SynthesisFailed(_))));
    }

    #[test]
    fn two_sided_shift_synthesis_keeps_carried_mass() {
        let t = preset::<Exact>("paper-prop32").unwrap();
        let y = ez(3).scale_real(&ratio_int(7));
        let w = synthesize_shift_j_witness(&t, &ez(0), &y, &ratio_int(2), &EpsSchedule::harmonic(5), 1, 10_000, NormTag::PInf)
            .unwrap();
        for tr in &w.triples {
            // e_0 is carried to e_{-k} with coefficient one
            assert!(tr.distance.same_as(&Magnitude::from_real(&ratio_int(1))));
        }
    }

    #[test]
    fn orbit_points_are_zero_perturbation_witnesses() {
        let t = preset::<Exact>("constant-half-diagonal").unwrap();
        let x = ez(0).add(&ez(2)).unwrap();
        let y = t.apply_power(5, &x).unwrap();
        let cfg = SearchConfig { k_min: 5, ..SearchConfig::default() };
        let w = search_j_witness(&t, &x, &y, &ratio(1, 2), &EpsSchedule::harmonic(4), &cfg, NormTag::P2).unwrap();
        assert_eq!(w.times(), vec![5, 6, 7, 8]);
        assert!(w.triples.iter().all(|tr| tr.point == x));
    }

    #[test]
    fn contracting_diagonal_search_fails() {
        let t = preset::<Exact>("constant-half-diagonal").unwrap();
        let y = ez(0).scale_real(&ratio_int(3));
        let cfg = SearchConfig { k_cap: 300, ..SearchConfig::default() };
        let r = search_j_witness(&t, &ez(0), &y, &ratio(1, 10), &EpsSchedule::harmonic(5), &cfg, NormTag::P2);
        assert!(r.unwrap_err().is_not_found());
    }

    #[test]
    fn budget_is_enforced() {
        let t = preset::<Exact>("constant-half-diagonal").unwrap();
        let y = ez(0).scale_real(&ratio_int(3));
        let cfg = SearchConfig { budget: 10, ..SearchConfig::default() };
        let r = search_j_witness(&t, &ez(0), &y, &ratio(1, 10), &EpsSchedule::harmonic(5), &cfg, NormTag::P2);
        assert!(matches!(r, Err(Error::BudgetExhausted(_))));
    }

    #[test]
    fn mixing_witness_from_zero() {
        let t = preset::<Exact>("constant-2-unilateral").unwrap();
        let x = SeqVector::zero(IndexSet::Naturals);
        let w = jmix_witness(&t, &x, &en(0), &ratio(1, 4), &EpsSchedule::harmonic(10), 1, &SearchConfig::default(), NormTag::P2)
            .unwrap();
        assert!(w.mix);
        for tr in &w.triples {
            let k = tr.time as i64;
            assert_eq!(tr.point, en(k).scale_real(&(ratio_int(1) / ratio_int(2).pow(k as i32))));
        }
        let one = jmix_witness(&t, &x, &en(0), &ratio(1, 4), &EpsSchedule::harmonic(1), 1, &SearchConfig::default(), NormTag::P2)
            .unwrap();
        assert_eq!(one.triples.len(), 1);
    }

    #[test]
    fn mixing_synthesis_back_solves_exactly() {
        let t = preset::<Exact>("constant-2-bilateral").unwrap();
        let y = ez(-2).add(&ez(3).scale_real(&ratio(5, 2))).unwrap();
        let zero = SeqVector::zero(IndexSet::Integers);
        let w = synthesize_shift_jmix_witness(&t, &zero, &y, &ratio_int(1), &EpsSchedule::harmonic(6), 1, 100, NormTag::P2).unwrap();
        assert!(w.mix);
        for tr in &w.triples {
            assert!(tr.distance.is_zero());
            assert_eq!(tr.point, t.apply_inverse_power(tr.time, &y).unwrap());
        }
        let c = preset::<Exact>("constant-half-unilateral").unwrap();
        let r = synthesize_shift_jmix_witness(&c, &SeqVector::zero(IndexSet::Naturals), &en(0), &ratio(1, 4), &EpsSchedule::harmonic(2), 1, 50, NormTag::P2);
        assert!(matches!(r, Err(Error::SynthesisFailed(_))));
    }

    #[test]
    fn expanding_diagonal_has_no_mixing_witness_from_nonzero_points() {
        let t = preset::<Exact>("constant-3-diagonal").unwrap();
        let y = ez(1).add(&ez(0).scale_real(&ratio(1, 2))).unwrap();
        for budget in [100, 1000] {
            let cfg = SearchConfig { budget, k_cap: 200, ..SearchConfig::default() };
            let r = jmix_witness(&t, &ez(0), &y, &ratio_int(1), &EpsSchedule::harmonic(5), 1, &cfg, NormTag::P2);
            assert!(r.unwrap_err().is_not_found());
        }
    }

    #[test]
    fn d_witness_prefers_the_orbit() {
        let t = preset::<Exact>("paper-prop32").unwrap();
        let cfg = SearchConfig::default();
        let s = EpsSchedule::harmonic(5);
        let on_orbit = d_witness(&t, &ez(0), &ez(-4), &ratio_int(2), 100, &s, &cfg, NormTag::PInf).unwrap();
        assert_eq!(on_orbit.branch(), "orbit");
        let y = ez(3).scale_real(&ratio_int(7));
        let limit = d_witness(&t, &ez(0), &y, &ratio_int(2), 100, &s, &cfg, NormTag::PInf).unwrap();
        assert_eq!(limit.branch(), "limit");
        limit.verify(&t).unwrap();
        let c = preset::<Exact>("constant-half-diagonal").unwrap();
        let small = SearchConfig { k_cap: 200, ..cfg };
        let far = ez(0).scale_real(&ratio_int(5));
        assert!(d_witness(&c, &ez(0), &far, &ratio(1, 2), 100, &s, &small, NormTag::P2).is_err());
    }

    #[test]
    fn search_in_every_norm_and_mode() {
        for p in [NormTag::P1, NormTag::P2, NormTag::PInf] {
            let t = ShiftOperator::<Float>::bilateral_backward(WeightRule::Periodic(vec![
                real_weight(3, 1),
                real_weight(-1, 2),
                real_weight(2, 1),
            ]))
            .unwrap();
            let x = SeqVector::<Float>::zero(IndexSet::Integers);
            let y = SeqVector::<Float>::from_entries(
                IndexSet::Integers,
                [(0, real_weight(2, 1)), (-3, real_weight(-5, 1)), (4, real_weight(1, 3))],
            )
            .unwrap();
            let w = search_j_witness(&t, &x, &y, &0.5, &EpsSchedule::harmonic(5), &SearchConfig::default(), p).unwrap();
            w.verify(&t).unwrap();
        }
    }

    #[test]
    fn partial_corrections_respect_the_radius() {
        // contracting shift: only partial corrections are affordable
        let t = preset::<Exact>("constant-half-unilateral").unwrap();
        let y = en(0).scale_real(&ratio(6, 5));
        let s = EpsSchedule::from_values(vec![ratio_int(1)]).unwrap();
        for p in [NormTag::P1, NormTag::P2, NormTag::PInf] {
            let w = search_j_witness(&t, &SeqVector::zero(IndexSet::Naturals), &y, &ratio_int(1), &s, &SearchConfig::default(), p)
                .unwrap();
            assert_eq!(w.triples[0].time, 1);
            assert!(!w.triples[0].perturbation.is_zero());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn target() -> impl Strategy<Value = SeqVector<Exact>> {
            prop::collection::vec((0i64..6, -20i64..20, 1i64..8), 1..4).prop_map(|entries| {
                SeqVector::from_entries(IndexSet::Naturals, entries.into_iter().map(|(i, n, q)| (i, real_weight(n, q)))).unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn witnesses_scale_linearly(y in target(), num in 1i64..9, den in 1i64..9) {
                let t = preset::<Exact>("constant-2-unilateral").unwrap();
                let x = SeqVector::zero(IndexSet::Naturals);
                let w = search_j_witness(&t, &x, &y, &ratio(1, 4), &EpsSchedule::harmonic(3), &SearchConfig::default(), NormTag::P2).unwrap();
                let s = w.scaled(&ratio(num, den)).unwrap();
                s.verify(&t).unwrap();
            }

            #[test]
            fn larger_bounds_keep_witnesses(y in target(), extra in 0i64..5) {
                let t = preset::<Exact>("constant-2-unilateral").unwrap();
                let x = SeqVector::basis(IndexSet::Naturals, 2).unwrap();
                let d = ratio(1, 2);
                let w = synthesize_shift_j_witness(&t, &x, &y, &d, &EpsSchedule::harmonic(3), 1, 200, NormTag::PInf).unwrap();
                let wider = w.with_bound(d + ratio_int(extra)).unwrap();
                wider.verify(&t).unwrap();
            }
        }
    }
}
