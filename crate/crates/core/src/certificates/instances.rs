//! The individual certificates.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{CertificateReport, Params, SubCheck, Verdict};
use crate::error::{Error, Result};
use crate::limit_sets::{
    amplify_coarse_witnesses, contradiction_check, d_witness, jmix_witness, rescale_j_witness_family,
    search_j_witness, synthesize_shift_j_witness, synthesize_shift_jmix_witness, DWitness, EpsSchedule, JTriple, JWitness, SearchConfig,
};
use crate::operators::{preset, RieszSplit, ShiftOperator, WeightRule, RIESZ_MARGIN};
use crate::orbits::{
    coarse_orbit_contains, orbit_points_near, rescale_coarse_witness, synthesize_orbit_seed,
    synthesize_orbit_seed_with_times, CoarseWitness,
};
use crate::scalar::{Exact, Float, Magnitude, NumericMode, Real, Scalar};
use crate::spaces::{norm, Band, ConeSampler, IndexSet, NormTag, OpenCone, SeqVector};

fn mode_name<S: Scalar>() -> &'static str {
    match S::MODE {
        NumericMode::Exact => "exact",
        NumericMode::Float => "float",
    }
}

fn schedule_len(params: &Params) -> Result<usize> {
    match params.usize("m")? {
        0 => Err(Error::Config("schedule length `m` must be at least 1".into())),
        m => Ok(m),
    }
}

/// Random vector with `1..=max_support` distinct indices in `[lo, hi]` and
/// entries `n / den`, `0 < |n| <= bound * den`.
fn random_vector<S: Scalar>(
    rng: &mut ChaCha8Rng,
    index_set: IndexSet,
    (lo, hi): (i64, i64),
    max_support: usize,
    bound: i64,
    den: i64,
) -> Result<SeqVector<S>> {
    let width = (hi - lo + 1) as usize;
    let size = rng.random_range(1..=max_support.min(width).max(1));
    let mut idx = BTreeSet::new();
    while idx.len() < size {
        idx.insert(rng.random_range(lo..=hi));
    }
    let entries: Vec<(i64, S)> = idx
        .into_iter()
        .map(|i| {
            let mut n = 0;
            while n == 0 {
                n = rng.random_range(-bound * den..=bound * den);
            }
            (i, S::from_real(S::Real::from_ratio(&crate::scalar::ratio(n, den))))
        })
        .collect();
    SeqVector::from_entries(index_set, entries)
}

/// Random vector rescaled so that its norm is about `level`.
fn vector_near_norm<S: Scalar>(rng: &mut ChaCha8Rng, index_set: IndexSet, window: (i64, i64), level: f64, p: NormTag) -> Result<SeqVector<S>> {
    let v = random_vector::<S>(rng, index_set, window, 4, 4, 16)?;
    let current = norm(&v, p).to_f64();
    let f = (level / current * 65536.0).floor() / 65536.0;
    Ok(v.scale_real(&S::Real::from_f64(f)))
}

/// Equality in the exact mode; `1e-9` relative agreement in the float mode.
fn vectors_agree<S: Scalar>(a: &SeqVector<S>, b: &SeqVector<S>) -> Result<bool> {
    if S::MODE == NumericMode::Exact {
        return Ok(a == b);
    }
    let diff = norm(&a.sub(b)?, NormTag::PInf).to_f64();
    Ok(diff <= 1e-9 * norm(b, NormTag::PInf).to_f64().max(1.0))
}

fn reverify_check<S: Scalar>(t: &ShiftOperator<S>, witnesses: &[JWitness<S>]) -> SubCheck {
    let failures: Vec<String> = witnesses.iter().filter_map(|w| w.verify(t).err().map(|e| e.to_string())).collect();
    SubCheck::new(
        "independent-reverification",
        Verdict::from_bool(failures.is_empty()),
        false,
        format!("{} witnesses re-checked with fresh powers, {} failed", witnesses.len(), failures.len()),
    )
    .with_detail(json!({ "failures": failures }))
}

fn distance_range<S: Scalar>(witnesses: &[JWitness<S>]) -> Value {
    let all: Vec<f64> = witnesses.iter().flat_map(|w| w.triples.iter().map(|t| t.distance.to_f64())).collect();
    let max = all.iter().cloned().fold(0.0, f64::max);
    let min = all.iter().cloned().fold(f64::INFINITY, f64::min);
    json!({ "triples": all.len(), "max_distance": max, "min_distance": if all.is_empty() { 0.0 } else { min } })
}

pub(super) fn coarse_j_class_shift<S: Scalar>(params: &Params, seed: u64) -> Result<CertificateReport> {
    let t: ShiftOperator<S> = params.operator("operator")?;
    let d: S::Real = params.positive("d")?;
    let m = schedule_len(params)?;
    let mut report = CertificateReport::new(
        "prop32",
        "two-sided weighted shift that is coarsely J-class at d = 2 and not J-class",
        t.to_json(),
        mode_name::<S>(),
        params.to_json(),
        seed,
    );
    if t.index_set() != IndexSet::Integers {
        return Err(Error::Config("this certificate needs an operator on the integers".into()));
    }
    let e0 = SeqVector::<S>::basis(IndexSet::Integers, 0)?;
    let p = NormTag::PInf;

    let horizon = params.u64("orbit_horizon")?;
    let one = S::Norm::from_real(&S::Real::one());
    let mut current = e0.clone();
    let mut broken = None;
    for n in 0..=horizon {
        if n > 0 {
            current = t.apply(&current)?;
        }
        if !norm(&current, p).same_as(&one) {
            broken = Some(n);
            break;
        }
    }
    report.push(SubCheck::new(
        "orbit-sup-norm-one",
        Verdict::from_bool(broken.is_none()),
        true,
        match broken {
            None => format!("||T^n e_0||_inf = 1 for every n <= {horizon}"),
            Some(n) => format!("||T^{n} e_0||_inf differs from 1"),
        },
    ));

    let sb = params.i64("support_bound")?;
    let nb = params.i64("norm_bound")?;
    let max_support = params.usize("max_support")?;
    let k_cap = params.u64("k_cap")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = params.usize("sample_count")?;
    let targets: Vec<SeqVector<S>> =
        (0..count).map(|_| random_vector(&mut rng, IndexSet::Integers, (-sb, sb), max_support, nb, 8)).collect::<Result<_>>()?;
    let schedule = EpsSchedule::<S::Real>::harmonic(m);
    let outcomes: Vec<Result<JWitness<S>>> = targets
        .par_iter()
        .map(|y| synthesize_shift_j_witness(&t, &e0, y, &d, &schedule, 1, k_cap, p))
        .collect();
    let mut witnesses = Vec::new();
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(w) => witnesses.push(w),
            Err(e) if e.is_not_found() => failures.push(json!({"target": i, "reason": e.to_string()})),
            Err(e) => return Err(e),
        }
    }
    if count == 0 {
        report.warnings.push("no targets sampled: the synthesis check holds vacuously".into());
    }
    report.push(
        SubCheck::new(
            "synthesis-all-targets",
            Verdict::from_bool(failures.is_empty()),
            true,
            format!("{}/{} targets certified to depth {m}", witnesses.len(), count),
        )
        .with_detail(json!({ "failures": failures.iter().take(10).collect::<Vec<_>>() })),
    );
    report.push(reverify_check(&t, &witnesses));

    let forced_d: S::Real = params.positive("forced_d")?;
    let forced_count = params.usize("forced_count")?;
    let cfg = SearchConfig { budget: params.u64("forced_budget")?, k_cap, seed, ..SearchConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let forced_targets: Vec<SeqVector<S>> = (0..forced_count)
        .map(|_| random_vector(&mut rng, IndexSet::Integers, (-sb, sb), max_support, nb, 8))
        .collect::<Result<_>>()?;
    let forced_schedule = EpsSchedule::harmonic_scaled(m, &forced_d);
    let forced: Vec<Result<Value>> = forced_targets
        .par_iter()
        .map(|y| match search_j_witness(&t, &e0, y, &forced_d, &forced_schedule, &cfg, p) {
            Err(e) if e.is_not_found() => Ok(json!({"outcome": "no-family", "reason": e.to_string()})),
            Err(e) => Err(e),
            Ok(w) => {
                let family: Vec<_> = w.triples.iter().map(|tr| (tr.point.clone(), tr.time)).collect();
                match contradiction_check(&t, y, &family) {
                    Ok(c) if c.contradicts => Ok(json!({"outcome": "contradiction", "check": c.to_json()})),
                    Ok(c) => Ok(json!({"outcome": "consistent-family", "check": c.to_json()})),
                    Err(Error::InputNotAWitnessFamily(msg)) => Ok(json!({"outcome": "rejected", "reason": msg})),
                    Err(e) => Err(e),
                }
            }
        })
        .collect();
    let forced: Vec<Value> = forced.into_iter().collect::<Result<_>>()?;
    let consistent = forced.iter().filter(|v| v["outcome"] == "consistent-family").count();
    let tally = |o: &str| forced.iter().filter(|v| v["outcome"] == o).count();
    report.push(
        SubCheck::new(
            "forced-quarter-tolerance",
            Verdict::from_bool(consistent == 0),
            true,
            format!(
                "{} searches found no family, {} families contradicted, {} rejected, {} consistent",
                tally("no-family"),
                tally("contradiction"),
                tally("rejected"),
                consistent
            ),
        )
        .with_detail(json!({ "budget": cfg.budget, "outcomes": forced })),
    );
    report.residuals = distance_range(&witnesses);
    report.witnesses = witnesses.iter().map(JWitness::to_json).collect();
    Ok(report)
}

/// The witness with every point equal to `x`, at the first `m` times with
/// `||T^k x - y|| < d`, if they occur by `k_cap`.
fn unperturbed_witness<S: Scalar>(
    t: &ShiftOperator<S>,
    x: &SeqVector<S>,
    y: &SeqVector<S>,
    d: &S::Real,
    schedule: &EpsSchedule<S::Real>,
    k_cap: u64,
    p: NormTag,
) -> Result<Option<JWitness<S>>> {
    let mut triples = Vec::with_capacity(schedule.len());
    let mut current = x.clone();
    for k in 1..=k_cap {
        current = t.apply(&current)?;
        let distance = norm(&current.sub(y)?, p);
        if distance.lt(d) {
            triples.push(JTriple { point: x.clone(), time: k, distance, perturbation: S::Norm::zero() });
            if triples.len() == schedule.len() {
                break;
            }
        }
    }
    if triples.len() < schedule.len() {
        return Ok(None);
    }
    let w = JWitness {
        base: x.clone(),
        target: y.clone(),
        bound: d.clone(),
        norm_tag: p,
        schedule: schedule.clone(),
        triples,
        mix: false,
    };
    w.verify(t)?;
    Ok(Some(w))
}

pub(super) fn contraction<S: Scalar>(params: &Params, seed: u64) -> Result<CertificateReport> {
    let w: S::Real = params.real("weight")?;
    let t = ShiftOperator::unilateral_backward(WeightRule::Constant(S::from_real(w.clone())))?;
    let d: S::Real = params.positive("d")?;
    let m = schedule_len(params)?;
    let p = NormTag::P2;
    let mut report = CertificateReport::new(
        "prop36-contraction",
        "spectral radius below one gives B(0,d) ⊂ J(x,T,d) ⊂ closed B(0,d)",
        t.to_json(),
        mode_name::<S>(),
        params.to_json(),
        seed,
    );
    let n = params.u64("gelfand_n")?;
    let trace = t.spectral_radius_estimate(n, Band::finite(0, 4 * n as i64))?;
    let r = trace.estimate;
    if r >= 1.0 - RIESZ_MARGIN {
        report.push(
            SubCheck::new("hypothesis-radius-below-one", Verdict::Indecisive, false, format!("radius estimate {r:.6} is not below one; nothing to certify"))
                .with_detail(trace.to_json()),
        );
        return Ok(report);
    }
    let expected = w.to_f64().abs();
    report.push(
        SubCheck::new(
            "gelfand-trace",
            Verdict::from_bool((r - expected).abs() <= 0.01 * expected),
            true,
            format!("estimate {r:.6} at n = {n} against weight modulus {expected}"),
        )
        .with_detail(trace.to_json()),
    );

    let x = params.vector::<S>("x", IndexSet::Naturals)?;
    let sb = params.i64("support_bound")?;
    let df = d.to_f64();
    let inside_bound = params.real::<S::Real>("inside_scale")? * d.clone();
    let outside_bound = params.real::<S::Real>("outside_scale")? * d.clone();
    let tol: S::Real = params.real("tol")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = |count: usize, inside: bool| -> Result<Vec<SeqVector<S>>> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let level = if inside {
                rng.random_range(0.05..1.0) * inside_bound.to_f64()
            } else {
                rng.random_range(1.0..3.0) * outside_bound.to_f64() * (1.0 + 1e-6)
            };
            let y = vector_near_norm::<S>(&mut rng, IndexSet::Naturals, (0, sb), level, p)?;
            let ny = norm(&y, p);
            if (inside && ny.lt(&inside_bound)) || (!inside && !ny.le(&outside_bound)) {
                out.push(y);
            }
        }
        Ok(out)
    };
    let inside = sample(params.usize("inside_count")?, true)?;
    let outside = sample(params.usize("outside_count")?, false)?;
    let cfg = SearchConfig { budget: params.u64("outside_budget")?, seed, ..SearchConfig::default() };
    let schedule = EpsSchedule::<S::Real>::harmonic(m);
    let run = |targets: &[SeqVector<S>]| -> Vec<Result<JWitness<S>>> {
        targets.par_iter().map(|y| search_j_witness(&t, &x, y, &d, &schedule, &cfg, p)).collect()
    };
    let mut found = Vec::new();
    let mut missed = 0;
    for o in run(&inside) {
        match o {
            Ok(w) => found.push(w),
            Err(e) if e.is_not_found() => missed += 1,
            Err(e) => return Err(e),
        }
    }
    report.push(SubCheck::new(
        "inner-ball-witnessed",
        Verdict::from_bool(missed == 0),
        true,
        format!("{}/{} targets with ||y|| < {} d witnessed", found.len(), inside.len(), inside_bound.to_f64() / df),
    ));
    let decay: Vec<Result<Option<JWitness<S>>>> =
        inside.par_iter().map(|y| unperturbed_witness(&t, &x, y, &d, &schedule, cfg.k_cap, p)).collect();
    let mut unperturbed = Vec::new();
    for w in decay {
        if let Some(w) = w? {
            unperturbed.push(w);
        }
    }
    report.push(SubCheck::new(
        "orbit-decays-into-ball",
        Verdict::from_bool(unperturbed.len() == inside.len()),
        true,
        format!("{}/{} inner targets witnessed by x itself at {m} times", unperturbed.len(), inside.len()),
    ));
    report.push(reverify_check(&t, &unperturbed).renamed("unperturbed-reverification"));
    let mut outer_found = Vec::new();
    for o in run(&outside) {
        match o {
            Ok(w) => outer_found.push(w),
            Err(e) if e.is_not_found() => {}
            Err(e) => return Err(e),
        }
    }
    report.push(SubCheck::new(
        "outer-targets-unwitnessed",
        Verdict::from_bool(outer_found.is_empty()),
        true,
        format!("{} of {} targets with ||y|| > {} d witnessed at budget {}", outer_found.len(), outside.len(), outside_bound.to_f64() / df, cfg.budget),
    ));
    let cap = d.clone() * (S::Real::one() + tol);
    let all: Vec<JWitness<S>> = found.into_iter().chain(outer_found).collect();
    let over = all.iter().filter(|w| !norm(&w.target, p).le(&cap)).count();
    report.push(SubCheck::new(
        "witnessed-targets-in-closed-ball",
        Verdict::from_bool(over == 0),
        true,
        format!("{over} witnessed targets exceed d(1 + tol)"),
    ));
    report.push(reverify_check(&t, &all));
    report.residuals = distance_range(&all);
    report.witnesses = all.iter().map(JWitness::to_json).collect();
    Ok(report)
}

pub(super) fn expansion<S: Scalar>(params: &Params, seed: u64) -> Result<CertificateReport> {
    let w: S::Real = params.real("weight")?;
    let t = ShiftOperator::bilateral_backward(WeightRule::Constant(S::from_real(w.clone())))?;
    let d: S::Real = params.positive("d")?;
    let m = schedule_len(params)?;
    let p = NormTag::P2;
    let mut report = CertificateReport::new(
        "prop36-expansion",
        "invertible expanding shift: J(x,T,d) is empty for x ≠ 0 and J^mix(0,T) is the whole space",
        t.to_json(),
        mode_name::<S>(),
        params.to_json(),
        seed,
    );
    if w.to_f64().abs() <= 1.0 + RIESZ_MARGIN {
        report.push(SubCheck::new(
            "hypothesis-radius-above-one",
            Verdict::Indecisive,
            false,
            format!("weight modulus {} is not above one; nothing to certify", w.to_f64().abs()),
        ));
        return Ok(report);
    }
    let z = IndexSet::Integers;
    let zero = SeqVector::<S>::zero(z);
    let sb = params.i64("support_bound")?;
    let nb = params.i64("norm_bound")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: Vec<SeqVector<S>> =
        (0..params.usize("target_count")?).map(|_| random_vector(&mut rng, z, (-sb, sb), 4, nb, 8)).collect::<Result<_>>()?;
    let schedule = EpsSchedule::<S::Real>::harmonic(m);
    let k_cap = SearchConfig::default().k_cap;
    let outcomes: Vec<Result<JWitness<S>>> = targets
        .par_iter()
        .map(|y| synthesize_shift_jmix_witness(&t, &zero, y, &d, &schedule, 1, k_cap, p))
        .collect();
    let mut mix = Vec::new();
    let mut failed = 0;
    let mut inexact = 0;
    for (y, o) in targets.iter().zip(outcomes) {
        match o {
            Ok(w) => {
                for tr in &w.triples {
                    let back = t.apply_inverse_power(tr.time, y)?;
                    if !tr.distance.is_zero() || !vectors_agree(&tr.point, &back)? {
                        inexact += 1;
                    }
                }
                mix.push(w);
            }
            Err(e) if e.is_not_found() => failed += 1,
            Err(e) => return Err(e),
        }
    }
    report.push(SubCheck::new(
        "mixing-from-zero",
        Verdict::from_bool(failed == 0 && inexact == 0),
        true,
        format!("{}/{} targets have consecutive-time witnesses from 0; {inexact} triples differ from T^-k y", mix.len(), targets.len()),
    ));

    let x = params.vector::<S>("x", z)?;
    let y = params.vector::<S>("y", z)?;
    let mut rungs = Vec::new();
    let mut any_found = false;
    let mut last_by_budget = false;
    for budget in params.u64_list("budgets")? {
        let cfg = SearchConfig { budget, seed, ..SearchConfig::default() };
        let (outcome, reason) = match search_j_witness(&t, &x, &y, &d, &schedule, &cfg, p) {
            Ok(_) => {
                any_found = true;
                ("found", String::new())
            }
            Err(e @ Error::BudgetExhausted(_)) => ("budget-exhausted", e.to_string()),
            Err(e) if e.is_not_found() => ("range-exhausted", e.to_string()),
            Err(e) => return Err(e),
        };
        last_by_budget = outcome == "budget-exhausted";
        rungs.push(json!({"budget": budget, "outcome": outcome, "reason": reason}));
    }
    let verdict = if any_found {
        Verdict::Fail
    } else if last_by_budget || rungs.is_empty() {
        Verdict::Indecisive
    } else {
        Verdict::Pass
    };
    report.push(
        SubCheck::new("no-witness-from-nonzero-point", verdict, true, format!("search from a non-zero point over {} budgets", rungs.len()))
            .with_detail(json!({ "rungs": rungs })),
    );

    // any witness point would satisfy ||x_n - T^-k y|| <= ||T^-k|| d
    let tol: S::Real = params.real("collapse_tol")?;
    let mut trace = Vec::new();
    let mut collapsed = true;
    for k in [10, 100, 1000, k_cap] {
        let (value, small) = match t.apply_inverse_power(k, &y) {
            Ok(v) => {
                let n = norm(&v, p);
                (n.to_json(), n.lt(&tol))
            }
            Err(Error::Overflow { log2 }) => (json!(format!("below 2^-{log2:.0}")), true),
            Err(e) => return Err(e),
        };
        let op_norm = -(k as f64) * w.to_f64().abs().log2();
        if k == k_cap {
            collapsed = small;
        }
        trace.push(json!({"k": k, "norm_inverse_image": value, "log2_norm_inverse": op_norm}));
    }
    report.push(
        SubCheck::new(
            "collapse-diagnostic",
            Verdict::from_bool(collapsed),
            true,
            format!("||T^-k y|| below {} at k = {k_cap}", tol.to_f64()),
        )
        .with_detail(json!({ "trace": trace })),
    );
    report.push(reverify_check(&t, &mix));
    report.residuals = distance_range(&mix);
    report.witnesses = mix.iter().map(JWitness::to_json).collect();
    Ok(report)
}

/// Projects a witness onto the two parts of a direct sum and re-verifies
/// each projection on its own operator.
fn decompose<S: Scalar>(split: &RieszSplit<S>, x: &SeqVector<S>, y: &SeqVector<S>, w: &DWitness<S>) -> Result<()> {
    let (x1, x2) = split.split(x);
    let (y1, y2) = split.split(y);
    match w {
        DWitness::Orbit(cw) => {
            for (op, base, target) in [(&split.contracting, &x1, &y1), (&split.expanding, &x2, &y2)] {
                let dist = norm(&op.apply_power(cw.time, base)?.sub(target)?, cw.norm_tag);
                let part = CoarseWitness {
                    time: cw.time,
                    achieved_distance: dist,
                    target: target.clone(),
                    base: base.clone(),
                    bound: cw.bound.clone(),
                    norm_tag: cw.norm_tag,
                };
                part.verify(op)?;
            }
        }
        DWitness::Limit(jw) => {
            for (i, (op, base, target)) in [(&split.contracting, &x1, &y1), (&split.expanding, &x2, &y2)].into_iter().enumerate() {
                let triples = jw
                    .triples
                    .iter()
                    .map(|tr| {
                        let (p1, p2) = split.split(&tr.point);
                        let point = if i == 0 { p1 } else { p2 };
                        Ok(JTriple {
                            distance: norm(&op.apply_power(tr.time, &point)?.sub(target)?, jw.norm_tag),
                            perturbation: norm(&point.sub(base)?, jw.norm_tag),
                            point,
                            time: tr.time,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let part = JWitness {
                    base: base.clone(),
                    target: target.clone(),
                    bound: jw.bound.clone(),
                    norm_tag: jw.norm_tag,
                    schedule: jw.schedule.clone(),
                    triples,
                    mix: jw.mix,
                };
                part.verify(op)?;
            }
        }
    }
    Ok(())
}

pub(super) fn riesz_blocks<S: Scalar>(params: &Params, seed: u64) -> Result<CertificateReport> {
    let t: ShiftOperator<S> = params.operator("operator")?;
    let d: S::Real = params.positive("d")?;
    let m = schedule_len(params)?;
    let p = NormTag::PInf;
    let mut report = CertificateReport::new(
        "riesz-blocks",
        "D(x,T,d) ⊂ D(x1,T1,d) + D(x2,T2,d) with the contracting part bounded",
        t.to_json(),
        mode_name::<S>(),
        params.to_json(),
        seed,
    );
    let horizon = params.u64("horizon")?;
    let split = match t.riesz_blocks(RIESZ_MARGIN, horizon) {
        Ok(s) => s,
        Err(Error::Indecisive(msg)) => {
            report.push(SubCheck::new("block-classification", Verdict::Indecisive, false, msg));
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.push(SubCheck::new("block-classification", Verdict::Pass, true, "every block radius is away from one").with_detail(split.to_json()));
    let index_set = t.index_set();
    let x = params.vector::<S>("x", index_set)?;
    let (x1, _) = split.split(&x);
    let t1 = &split.contracting;

    let window = params.i64("window")?;
    let mut sup_orbit: f64 = 0.0;
    let mut current = x1.clone();
    for n in 0..=horizon {
        if n > 0 {
            current = t1.apply(&current)?;
        }
        sup_orbit = sup_orbit.max(norm(&current, p).to_f64());
    }
    let reach = window + 4 * horizon as i64;
    let trace = t1.spectral_radius_estimate(horizon, Band::finite(-reach, reach))?;
    let sup_power = trace
        .quotients
        .iter()
        .enumerate()
        .map(|(i, q)| q.powi(i as i32 + 1))
        .fold(1.0, f64::max);
    let schedule = EpsSchedule::<S::Real>::harmonic(m);
    let eps1 = schedule.values()[0].to_f64();
    let bound = sup_orbit + sup_power * eps1 + d.to_f64();
    let bound_real = S::Real::from_f64(bound * (1.0 + 1e-12));

    let y1_cap = params.real::<S::Real>("y1_scale")? * d.clone();
    let nb = params.i64("norm_bound")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = params.usize("sample_count")?;
    let lo = if index_set == IndexSet::Naturals { 0 } else { -window };
    let mut targets = Vec::with_capacity(count);
    for _ in 0..count {
        let shape = random_vector::<S>(&mut rng, index_set, (lo, window), 4, nb, 8)?;
        let (_, y2) = split.split(&shape);
        let y1_idx: Vec<i64> = split.split(&shape).0.indices().collect();
        let y1 = SeqVector::from_entries(
            index_set,
            y1_idx.into_iter().map(|i| {
                let mut n = 0;
                while n == 0 {
                    n = rng.random_range(-15..=15);
                }
                (i, S::from_real(y1_cap.clone() * S::Real::from_ratio(&crate::scalar::ratio(n, 16))))
            }),
        )?;
        targets.push(y1.add(&y2)?);
    }
    let cfg = SearchConfig { k_cap: params.u64("k_cap")?, budget: params.u64("budget")?, seed, ..SearchConfig::default() };
    let outcomes: Vec<Result<Option<DWitness<S>>>> = targets
        .par_iter()
        .map(|y| match d_witness(&t, &x, y, &d, horizon, &schedule, &cfg, p) {
            Ok(w) => Ok(Some(w)),
            Err(e) if e.is_not_found() => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut found = Vec::new();
    let mut decompose_failures = Vec::new();
    let mut bound_failures = 0;
    let mut max_y1: f64 = 0.0;
    for (i, (y, o)) in targets.iter().zip(outcomes).enumerate() {
        let Some(w) = o? else { continue };
        if let Err(e) = decompose(&split, &x, y, &w) {
            decompose_failures.push(json!({"target": i, "reason": e.to_string()}));
        }
        let y1n = norm(&split.split(y).0, p);
        max_y1 = max_y1.max(y1n.to_f64());
        if !y1n.le(&bound_real) {
            bound_failures += 1;
        }
        found.push(w);
    }
    report.push(SubCheck::new(
        "targets-witnessed",
        if found.len() == targets.len() { Verdict::Pass } else { Verdict::Indecisive },
        true,
        format!("{}/{} sampled targets witnessed in D(x,T,d)", found.len(), targets.len()),
    ));
    report.push(
        SubCheck::new(
            "band-decomposition",
            Verdict::from_bool(decompose_failures.is_empty()),
            false,
            format!("{} of {} witnesses split into verified component witnesses", found.len() - decompose_failures.len(), found.len()),
        )
        .with_detail(json!({ "failures": decompose_failures.iter().take(10).collect::<Vec<_>>() })),
    );
    report.push(
        SubCheck::new(
            "contracting-part-bounded",
            Verdict::from_bool(bound_failures == 0),
            true,
            format!("largest witnessed ||y1|| = {max_y1:.6} against bound {bound:.6}"),
        )
        .with_detail(json!({ "sup_orbit": sup_orbit, "sup_power_norm": sup_power, "eps1": eps1, "d": d.to_f64(), "bound": bound })),
    );

    let center = params.vector::<S>("cone_center", index_set)?;
    let cone = OpenCone::new(center, params.positive("cone_radius")?, p)?;
    let c = ConeSampler::default().sample(&cone, 1, seed ^ 0x00c0_ffee)?.remove(0);
    let (c1, _) = split.split(&c);
    if c1.is_zero() {
        report.push(SubCheck::new("lambda-ladder", Verdict::Pass, true, "cone point has no contracting component"));
    } else {
        let c1n = norm(&c1, p).to_f64();
        let steps = params.u64("lambda_steps")?;
        let lcfg = SearchConfig { budget: params.u64("lambda_budget")?, ..cfg.clone() };
        let min_factor = params.ratio("min_ratio_factor").map(|r| S::Real::from_ratio(&r).to_f64())?;
        let rungs: Vec<Result<Value>> = (0..=steps)
            .into_par_iter()
            .map(|j| {
                let lambda = S::Real::from_int(2).powi(j as i32);
                let target = c.scale_real(&lambda);
                let ratio = bound / (lambda.to_f64() * c1n);
                let witnessed = match d_witness(&t, &x, &target, &d, horizon, &schedule, &lcfg, p) {
                    Ok(_) => true,
                    Err(e) if e.is_not_found() => false,
                    Err(e) => return Err(e),
                };
                Ok(json!({"j": j, "lambda": lambda.to_f64(), "ratio": ratio, "witnessed": witnessed}))
            })
            .collect();
        let rungs: Vec<Value> = rungs.into_iter().collect::<Result<_>>()?;
        let ratios: Vec<f64> = rungs.iter().map(|r| r["ratio"].as_f64().unwrap_or(f64::NAN)).collect();
        let factors: Vec<f64> = ratios.windows(2).map(|w| w[0] / w[1]).collect();
        let monotone = factors.iter().all(|f| *f >= min_factor);
        // a witness at ratio below one would put ||λ c1|| above the bound
        let inconsistent = rungs.iter().filter(|r| r["witnessed"] == true && r["ratio"].as_f64().unwrap_or(0.0) < 1.0).count();
        report.push(
            SubCheck::new(
                "lambda-ladder",
                Verdict::from_bool(monotone && inconsistent == 0),
                true,
                format!(
                    "bound / ||λ c1|| falls from {:.3e} to {:.3e}; smallest step factor {:.4}; {inconsistent} witnesses beyond the bound",
                    ratios.first().copied().unwrap_or(0.0),
                    ratios.last().copied().unwrap_or(0.0),
                    factors.iter().cloned().fold(f64::INFINITY, f64::min)
                ),
            )
            .with_detail(json!({ "cone_point": c.to_json(), "rungs": rungs })),
        );
    }
    let failures: Vec<String> = found.iter().filter_map(|w| w.verify(&t).err().map(|e| e.to_string())).collect();
    report.push(SubCheck::new(
        "independent-reverification",
        Verdict::from_bool(failures.is_empty()),
        false,
        format!("{} witnesses re-checked, {} failed", found.len(), failures.len()),
    ));
    let orbit_hits = found.iter().filter(|w| w.branch() == "orbit").count();
    report.residuals = json!({
        "orbit_branch": orbit_hits,
        "limit_branch": found.len() - orbit_hits,
        "max_contracting_norm": max_y1,
        "bound": bound,
    });
    report.witnesses = found.iter().map(DWitness::to_json).collect();
    Ok(report)
}

pub(super) fn scaled_family<S: Scalar>(params: &Params, seed: u64) -> Result<CertificateReport> {
    let t: ShiftOperator<S> = params.operator("operator")?;
    let d: S::Real = params.positive("d")?;
    let m = schedule_len(params)?;
    let p = NormTag::P2;
    let mut report = CertificateReport::new(
        "prop15",
        "mixing witnesses for t_k y from t_k x, divided by t_k, certify y ∈ J^mix(x,T)",
        t.to_json(),
        mode_name::<S>(),
        params.to_json(),
        seed,
    );
    let x = params.vector::<S>("x", t.index_set())?;
    let y = params.vector::<S>("y", t.index_set())?;
    let base: S::Real = params.positive("scale_base")?;
    let scales: Vec<S::Real> = (1..=params.u64("scale_count")?).map(|k| base.powi(k as i32)).collect();
    let target_eps: S::Real = params.positive("target_eps")?;
    let n_start = params.u64("n_start")?;
    let schedule = EpsSchedule::<S::Real>::harmonic(m);
    let cfg = SearchConfig { seed, ..SearchConfig::default() };
    let members: Vec<Result<JWitness<S>>> = scales
        .par_iter()
        .map(|s| jmix_witness(&t, &x.scale_real(s), &y.scale_real(s), &d, &schedule, n_start, &cfg, p))
        .collect();
    let mut family = Vec::with_capacity(scales.len());
    for (s, w) in scales.iter().zip(members) {
        match w {
            Ok(w) => family.push((s.clone(), w)),
            Err(e) => {
                report.push(SubCheck::new("family-construction", Verdict::Fail, false, format!("scale {}: {e}", s.to_f64())));
                return Ok(report);
            }
        }
    }
    report.push(SubCheck::new("family-construction", Verdict::Pass, false, format!("{} scaled mixing witnesses", family.len())));
    match rescale_j_witness_family(&t, &family, &target_eps) {
        Ok(cert) => {
            let reverified = cert.verify(&t).is_ok();
            let max_dist = cert.triples.iter().map(|tr| tr.distance.to_f64()).fold(0.0, f64::max);
            report.push(
                SubCheck::new(
                    "rescaled-certificate",
                    Verdict::from_bool(reverified),
                    true,
                    format!(
                        "{} times from member {} with distances below d/t_m = {:.3e} < {:.3e}",
                        cert.triples.len(),
                        cert.first_member + 1,
                        cert.bound.to_f64(),
                        target_eps.to_f64()
                    ),
                )
                .with_detail(json!({ "times": cert.times(), "max_distance": max_dist })),
            );
            report.residuals = json!({ "max_distance": max_dist, "bound": cert.bound.to_json(), "first_member": cert.first_member });
            report.witnesses = vec![cert.to_json()];
        }
        Err(e) => report.push(SubCheck::new("rescaled-certificate", Verdict::Fail, true, e.to_string())),
    }
    Ok(report)
}

pub(super) fn coarse_density<S: Scalar>(params: &Params, seed: u64) -> Result<CertificateReport> {
    let d: S::Real = params.positive("d")?;
    let p = NormTag::P2;
    let mut k_ladder = params.u64_list("k_ladder")?;
    k_ladder.sort_unstable();
    k_ladder.dedup();
    let k_max = k_ladder.last().copied().unwrap_or(0);
    let instance = params.str("instance")?;
    let (t, x, y, witnesses): (ShiftOperator<S>, _, _, Vec<CoarseWitness<S>>) = match instance {
        "synthesized" => {
            let t = preset::<S>("constant-2-unilateral")?;
            let y = params.vector::<S>("target", t.index_set())?;
            let per = params.usize("placements_per_decade")?;
            let mut targets = Vec::new();
            let mut earliest = Vec::new();
            for (g, _) in k_ladder.iter().enumerate() {
                let start = if g == 0 { 1 } else { k_ladder[g - 1] + 1 };
                for _ in 0..per {
                    targets.push(y.clone());
                    earliest.push(start);
                }
            }
            let seed_vec = synthesize_orbit_seed_with_times(&t, &targets, &earliest, &d, p, k_max)?;
            (t, seed_vec.base, y, seed_vec.witnesses)
        }
        "prop32-orbit" => {
            let t = preset::<S>("paper-prop32")?;
            let y = params.vector::<S>("target", t.index_set())?;
            let x = SeqVector::basis(t.index_set(), 0)?;
            let w = coarse_orbit_contains(&t, &x, &d, &y, k_max, p)?;
            (t, x, y, w.into_iter().collect())
        }
        other => return Err(Error::Config(format!("unknown coarse-density instance `{other}`"))),
    };
    let mut report = CertificateReport::new(
        "prop21",
        "targets of O(x,T,d) rescale into O(M x/d, T, M) for every M, and a coarsely dense orbit returns infinitely often",
        t.to_json(),
        mode_name::<S>(),
        params.to_json(),
        seed,
    );
    let m_ladder: Vec<S::Real> = params.real_list("m_ladder")?;
    let mut rescaled = Vec::new();
    let mut failures = Vec::new();
    for w in &witnesses {
        for mm in &m_ladder {
            match rescale_coarse_witness(&t, w, mm) {
                Ok(r) => rescaled.push(r),
                Err(e) => failures.push(format!("M = {}: {e}", mm.to_f64())),
            }
        }
    }
    if witnesses.is_empty() {
        report.warnings.push("no coarse witnesses: the rescaling check holds vacuously".into());
    }
    report.push(
        SubCheck::new(
            "rescaling-ladder",
            Verdict::from_bool(failures.is_empty()),
            false,
            format!("{} witnesses rescaled over {} values of M", witnesses.len(), m_ladder.len()),
        )
        .with_detail(json!({ "failures": failures })),
    );
    let radius = params.real::<S::Real>("radius_factor")? * d.clone();
    let counts: Vec<usize> = k_ladder
        .par_iter()
        .map(|k| orbit_points_near(&t, &x, &y, &radius, *k, p))
        .collect::<Result<_>>()?;
    let increasing = counts.windows(2).all(|w| w[0] < w[1]);
    let verdict = if increasing {
        Verdict::Pass
    } else if counts.iter().all(|c| *c <= 1) {
        Verdict::NotApplicable
    } else {
        Verdict::Fail
    };
    report.push(
        SubCheck::new(
            "returns-grow-with-horizon",
            verdict,
            true,
            format!("distinct orbit points within {} of y: {:?} for horizons {:?}", radius.to_f64(), counts, k_ladder),
        )
        .with_detail(json!({ "horizons": k_ladder, "counts": counts })),
    );
    let bad = rescaled.iter().chain(&witnesses).filter(|w| w.verify(&t).is_err()).count();
    report.push(SubCheck::new(
        "independent-reverification",
        Verdict::from_bool(bad == 0),
        false,
        format!("{} coarse witnesses re-checked, {bad} failed", rescaled.len() + witnesses.len()),
    ));
    report.residuals = json!({
        "max_distance": witnesses.iter().map(|w| w.achieved_distance.to_f64()).fold(0.0, f64::max),
        "orbit_seed": x.to_json(),
    });
    report.witnesses = witnesses.iter().chain(&rescaled).map(CoarseWitness::to_json).collect();
    Ok(report)
}

pub(super) fn amplification(params: &Params, seed: u64) -> Result<CertificateReport> {
    let t = preset::<Exact>("constant-2-unilateral")?;
    let mut report = CertificateReport::new(
        "prop22",
        "coarse witnesses for y/λ^n amplify to points within λ^n d of y",
        t.to_json(),
        "exact+float",
        params.to_json(),
        seed,
    );
    let lambda = params.ratio("lambda")?;
    let d = params.ratio("d")?;
    let one = crate::scalar::ratio_int(1);
    if !(Real::is_positive(&lambda) && lambda < one) {
        report.push(SubCheck::new("hypothesis-lambda", Verdict::Fail, false, format!("λ = {lambda} is outside (0, 1)")));
        return Ok(report);
    }
    if !Real::is_positive(&d) {
        return Err(Error::Config("d must be positive".into()));
    }
    let steps = params.usize("steps")?;
    let y = params.vector::<Exact>("y", t.index_set())?;
    let targets: Vec<_> = (1..=steps).map(|n| y.scale_real(&(one.clone() / lambda.powi(n as i32)))).collect();
    let inst = synthesize_orbit_seed(&t, &targets, &d, NormTag::P2, 1, params.u64("k_cap")?)?;
    let x = inst.base;
    let exact = amplify_coarse_witnesses(&t, &x, &y, &d, &lambda, &[], &inst.witnesses);
    let exact = match exact {
        Ok(pts) => pts,
        Err(e) => {
            report.push(SubCheck::new("exact-amplification", Verdict::Fail, false, e.to_string()));
            return Ok(report);
        }
    };
    let exact_ok = exact.iter().all(|pt| pt.distance.le(&pt.bound) && pt.distance.same_as(&pt.original_distance.scale(&lambda.powi(pt.n as i32))));
    report.push(SubCheck::new(
        "exact-amplification",
        Verdict::from_bool(exact_ok && exact.len() == steps),
        false,
        format!("{} amplified distances within λ^n d, equal to λ^n times the original", exact.len()),
    ));

    let tf = t.to_float();
    let xf = x.to_float();
    let yf = y.to_float();
    let lf = lambda.to_f64();
    let df = Real::to_f64(&d);
    let coarse_f: Vec<CoarseWitness<Float>> = inst
        .witnesses
        .iter()
        .map(|w| {
            let target = w.target.to_float();
            let dist = norm(&tf.apply_power(w.time, &xf)?.sub(&target)?, NormTag::P2);
            Ok(CoarseWitness { time: w.time, achieved_distance: dist, target, base: xf.clone(), bound: df, norm_tag: NormTag::P2 })
        })
        .collect::<Result<_>>()?;
    let float_check = amplify_coarse_witnesses(&tf, &xf, &yf, &df, &lf, &[], &coarse_f).map(|pts| {
        let mut worst: f64 = 0.0;
        let mut ok = pts.len() == exact.len();
        for (pf, pe) in pts.iter().zip(&exact) {
            let de = pe.distance.to_f64();
            let rel = (pf.distance - de).abs() / de.max(f64::MIN_POSITIVE);
            if pf.distance != de {
                worst = worst.max(rel);
            }
            ok &= pf.distance == de || rel <= 1e-9;
            ok &= pf.distance <= pf.bound * (1.0 + 1e-9);
        }
        (ok, worst)
    });
    match float_check {
        Ok((ok, worst)) => report.push(SubCheck::new(
            "float-agreement",
            Verdict::from_bool(ok),
            false,
            format!("float distances agree with the exact ones to relative {worst:.2e}"),
        )),
        Err(e) => report.push(SubCheck::new("float-agreement", Verdict::Fail, false, e.to_string())),
    }
    let ratios: Vec<f64> = exact.iter().map(|pt| pt.distance.to_f64() / pt.bound.to_f64()).collect();
    let bounds: Vec<f64> = exact.iter().map(|pt| pt.bound.to_f64()).collect();
    let geometric = bounds.windows(2).all(|w| (w[1] / w[0] - lf).abs() <= 1e-12) && ratios.iter().all(|r| *r < 1.0);
    report.push(
        SubCheck::new("geometric-decrease", Verdict::from_bool(geometric), true, "amplified distances stay below bounds shrinking by λ per step")
            .with_detail(json!({ "bounds": bounds, "distance_over_bound": ratios })),
    );
    report.residuals = json!({ "distances": exact.iter().map(|pt| pt.distance.to_f64()).collect::<Vec<_>>(), "orbit_seed": x.to_json() });
    report.witnesses = exact.iter().map(|pt| pt.to_json()).collect();
    Ok(report)
}
