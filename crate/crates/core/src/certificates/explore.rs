//! Randomised evidence drivers for two open questions: whether a coarse
//! orbit that covers a cone must cover everything, and whether coarsely
//! D-class shifts are coarsely J-class. Nothing here is a verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::limit_sets::{d_witness, search_j_witness, EpsSchedule, SearchConfig};
use crate::orbits::{coarse_density_report, coarse_orbit_contains};
use crate::scalar::{parse_real_json, ratio, Exact, Real};
use crate::spaces::{ConeSampler, IndexSet, NormTag, OpenCone, SeqVector};
use crate::operators::{ShiftOperator, WeightRule};
use num_rational::BigRational;

#[derive(Debug, Clone)]
pub struct ExploreReport {
    pub family: Value,
    pub trials: usize,
    pub seed: u64,
    /// Instances ranked by cone coverage minus global coverage.
    pub cone_versus_global: Vec<Value>,
    /// Instances ranked by D-witness rate minus J-witness rate.
    pub d_versus_j: Vec<Value>,
}

impl ExploreReport {
    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family,
            "trials": self.trials,
            "seed": self.seed,
            "note": "evidence only; rankings are by anomaly score and assert nothing",
            "cone_versus_global": self.cone_versus_global,
            "d_versus_j": self.d_versus_j,
        })
    }
}

struct Family {
    kind: String,
    weights: Vec<BigRational>,
    d: BigRational,
    horizon: u64,
    samples: usize,
    budget: u64,
}

fn parse_family(family: &Value) -> Result<Family> {
    let empty = Map::new();
    let obj = match family {
        Value::Null => &empty,
        Value::Object(o) => o,
        _ => return Err(Error::Config("family must be an object".into())),
    };
    const KEYS: &[&str] = &["kind", "weights", "d", "horizon", "samples", "budget"];
    if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown key `{k}` in family")));
    }
    let kind = obj.get("kind").and_then(Value::as_str).unwrap_or("piecewise-two-sided").to_string();
    if !matches!(kind.as_str(), "piecewise-two-sided" | "constant") {
        return Err(Error::Config(format!("operator kind `{kind}` is outside the explored families")));
    }
    let weights = match obj.get("weights") {
        None => vec![ratio(1, 2), ratio(1, 1), ratio(2, 1), ratio(3, 1)],
        Some(Value::Array(a)) if !a.is_empty() => a.iter().map(parse_real_json).collect::<Result<_>>()?,
        Some(_) => return Err(Error::Config("`weights` must be a non-empty array".into())),
    };
    if weights.iter().any(|w| !Real::is_positive(w)) {
        return Err(Error::Config("family weights must be positive".into()));
    }
    let d = match obj.get("d") {
        None => ratio(1, 1),
        Some(v) => parse_real_json(v)?,
    };
    let int = |key: &str, default: u64| -> Result<u64> {
        match obj.get(key) {
            None => Ok(default),
            Some(v) => v.as_u64().ok_or_else(|| Error::Config(format!("`{key}` must be a non-negative integer"))),
        }
    };
    Ok(Family { kind, weights, d, horizon: int("horizon", 48)?, samples: int("samples", 16)? as usize, budget: int("budget", 400)? })
}

fn random_small<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> Result<SeqVector<Exact>> {
    let entries: Vec<(i64, Exact)> = (0..rng.random_range(1..=3))
        .map(|_| {
            let n = rng.random_range(1..=32) * if rng.random::<bool>() { 1 } else { -1 };
            (rng.random_range(lo..=hi), crate::scalar::Scalar::from_real(ratio(n, 8)))
        })
        .collect();
    SeqVector::from_entries(IndexSet::Integers, entries)
}

/// Runs `trials` random instances of the family.
pub fn explore_questions(family: &Value, trials: usize, seed: u64) -> Result<ExploreReport> {
    let fam = parse_family(family)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(trials);
    for i in 0..trials {
        let pos = fam.weights[rng.random_range(0..fam.weights.len())].clone();
        let nonpos = if fam.kind == "constant" { pos.clone() } else { fam.weights[rng.random_range(0..fam.weights.len())].clone() };
        let x = random_small(&mut rng, -4, 4)?;
        let center = SeqVector::basis(IndexSet::Integers, rng.random_range(-3..=3))?;
        let targets: Vec<SeqVector<Exact>> = (0..fam.samples).map(|_| random_small(&mut rng, -4, 4)).collect::<Result<_>>()?;
        instances.push((i, pos, nonpos, x, center, targets, rng.random::<u64>()));
    }
    let d = fam.d.clone();
    let rows: Vec<Result<(Value, Value)>> = instances
        .into_par_iter()
        .map(|(i, pos, nonpos, x, center, targets, sub_seed)| {
            let t = ShiftOperator::bilateral_backward(WeightRule::PiecewiseTwoSided {
                positive: crate::scalar::Scalar::from_real(pos.clone()),
                nonpositive: crate::scalar::Scalar::from_real(nonpos.clone()),
            })?;
            let p = NormTag::PInf;
            let cone = OpenCone::new(center, ratio(1, 2), p)?;
            let sampler = ConeSampler { lambda_range: (0.5, 4.0), ..ConeSampler::default() };
            let cone_report = coarse_density_report(&t, &x, &d, &cone, &sampler, fam.samples, fam.horizon, sub_seed)?;
            let mut global_hits = 0;
            let mut d_hits = 0;
            let mut j_hits = 0;
            let cfg = SearchConfig { k_cap: fam.horizon, probe_factor: 1, budget: fam.budget, seed: sub_seed, ..SearchConfig::default() };
            let schedule = EpsSchedule::<BigRational>::harmonic(3);
            for y in &targets {
                if coarse_orbit_contains(&t, &x, &d, y, fam.horizon, p)?.is_some() {
                    global_hits += 1;
                }
                match d_witness(&t, &x, y, &d, fam.horizon, &schedule, &cfg, p) {
                    Ok(_) => d_hits += 1,
                    Err(e) if e.is_not_found() => {}
                    Err(e) => return Err(e),
                }
                match search_j_witness(&t, &x, y, &d, &schedule, &cfg, p) {
                    Ok(_) => j_hits += 1,
                    Err(e) if e.is_not_found() => {}
                    Err(e) => return Err(e),
                }
            }
            let n = targets.len().max(1) as f64;
            let global = global_hits as f64 / n;
            let (dr, jr) = (d_hits as f64 / n, j_hits as f64 / n);
            let instance = json!({
                "trial": i,
                "weights": {"positive": pos.to_string(), "nonpositive": nonpos.to_string()},
                "x": x.to_json(),
            });
            Ok((
                json!({"instance": instance, "cone_coverage": cone_report.hit_ratio, "global_coverage": global, "score": cone_report.hit_ratio - global}),
                json!({"instance": instance, "d_rate": dr, "j_rate": jr, "score": dr - jr}),
            ))
        })
        .collect();
    let rows: Vec<(Value, Value)> = rows.into_iter().collect::<Result<_>>()?;
    let rank = |mut v: Vec<Value>| {
        // stable sort keeps trial order among equal scores
        v.sort_by(|a, b| b["score"].as_f64().unwrap_or(0.0).total_cmp(&a["score"].as_f64().unwrap_or(0.0)));
        v
    };
    let (q1, q2): (Vec<Value>, Vec<Value>) = rows.into_iter().unzip();
    Ok(ExploreReport { family: family.clone(), trials, seed, cone_versus_global: rank(q1), d_versus_j: rank(q2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_give_empty_evidence() {
        let r = explore_questions(&Value::Null, 0, 1).unwrap();
        assert!(r.cone_versus_global.is_empty() && r.d_versus_j.is_empty());
    }

    #[test]
    fn out_of_scope_kinds_are_rejected() {
        assert!(matches!(explore_questions(&json!({"kind": "unitary"}), 1, 0), Err(Error::Config(_))));
        assert!(matches!(explore_questions(&json!({"colour": 1}), 1, 0), Err(Error::Config(_))));
    }

    #[test]
    fn evidence_is_deterministic() {
        let family = json!({"horizon": 16, "samples": 4, "budget": 50});
        let a = explore_questions(&family, 3, 9).unwrap().to_json();
        let b = explore_questions(&family, 3, 9).unwrap().to_json();
        assert_eq!(a, b);
        assert_eq!(a["cone_versus_global"].as_array().unwrap().len(), 3);
    }
}
