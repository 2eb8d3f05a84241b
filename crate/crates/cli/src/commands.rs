use std::path::Path;

use orbitscope::certificates::{
    aggregate_exit_code, explore_questions, run_all, timing_json, write_report_bundle, CertificateReport, SuiteConfig,
};
use orbitscope::limit_sets::{d_witness, jmix_witness, search_j_witness, EpsSchedule, SearchConfig};
use orbitscope::operators::{operator_from_json, ShiftOperator};
use orbitscope::orbits::{coarse_orbit_contains, orbit};
use orbitscope::scalar::{parse_ratio, Real, Scalar};
use orbitscope::spaces::{IndexSet, SeqVector};
use orbitscope::{Error, Result};
use serde_json::{json, Value};

use crate::config::Resolved;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum WitnessKind {
    Coarse,
    J,
    Jmix,
    D,
}

impl WitnessKind {
    fn tag(self) -> &'static str {
        match self {
            WitnessKind::Coarse => "coarse",
            WitnessKind::J => "j",
            WitnessKind::Jmix => "jmix",
            WitnessKind::D => "d",
        }
    }
}

/// A vector given either as JSON (`{"index_set", "entries"}`) or as a term
/// expression such as `e0 + 1/2*e-3`.
pub fn parse_vector<S: Scalar>(text: &str, index_set: IndexSet) -> Result<SeqVector<S>> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let value: Value = serde_json::from_str(trimmed).map_err(|e| Error::Parse(format!("vector JSON: {e}")))?;
        let v = SeqVector::from_json(&value)?;
        if v.index_set() != index_set {
            return Err(Error::IndexSetMismatch { left: index_set, right: v.index_set() });
        }
        Ok(v)
    } else {
        SeqVector::parse_terms(index_set, trimmed)
    }
}

fn parse_real<S: Scalar>(text: &str) -> Result<S::Real> {
    Ok(S::Real::from_ratio(&parse_ratio(text)?))
}

fn operator<S: Scalar>(cfg: &Resolved) -> Result<ShiftOperator<S>> {
    operator_from_json(&cfg.operator)
}

pub fn orbit_csv<S: Scalar>(cfg: &Resolved, x: &str, k: u64) -> Result<String> {
    let t = operator::<S>(cfg)?;
    let x = parse_vector::<S>(x, t.index_set())?;
    Ok(orbit(&t, &x, k, cfg.norm)?.to_csv())
}

/// The witness as JSON, or an error; `Error::is_not_found` marks a search
/// that ended without one.
pub fn witness<S: Scalar>(cfg: &Resolved, kind: WitnessKind, x: &str, y: &str, d: &str) -> Result<Value> {
    let t = operator::<S>(cfg)?;
    let x = parse_vector::<S>(x, t.index_set())?;
    let y = parse_vector::<S>(y, t.index_set())?;
    let d = parse_real::<S>(d)?;
    let schedule = EpsSchedule::<S::Real>::harmonic(cfg.schedule_length);
    let search = SearchConfig { k_cap: cfg.k_cap, budget: cfg.budget, seed: cfg.seed, ..SearchConfig::default() };
    let p = cfg.norm;
    let witness = match kind {
        WitnessKind::Coarse => coarse_orbit_contains(&t, &x, &d, &y, cfg.horizon, p)?
            .ok_or_else(|| Error::NotFound(format!("no orbit point within the horizon {}", cfg.horizon)))?
            .to_json(),
        WitnessKind::J => search_j_witness(&t, &x, &y, &d, &schedule, &search, p)?.to_json(),
        WitnessKind::Jmix => jmix_witness(&t, &x, &y, &d, &schedule, 1, &search, p)?.to_json(),
        WitnessKind::D => d_witness(&t, &x, &y, &d, cfg.horizon, &schedule, &search, p)?.to_json(),
    };
    Ok(json!({ "status": "found", "kind": kind.tag(), "witness": witness }))
}

pub fn not_found_json(kind: WitnessKind, err: &Error) -> Value {
    json!({ "status": "not-found", "kind": kind.tag(), "reason": err.to_string() })
}

pub fn certify(cfg: &Resolved, names: &[String], out_dir: &Path) -> Result<(Vec<CertificateReport>, i32)> {
    let names = if names.is_empty() { vec!["all".to_string()] } else { names.to_vec() };
    let suite = SuiteConfig { mode: cfg.mode, seed: cfg.seed, names, overrides: cfg.certificates.clone() };
    let reports = run_all(&suite)?;
    write_report_bundle(&reports, out_dir)?;
    let timing = serde_json::to_string_pretty(&timing_json(&reports))?;
    std::fs::write(out_dir.join("timing.json"), timing + "\n")?;
    let code = aggregate_exit_code(&reports);
    Ok((reports, code))
}

pub fn explore(cfg: &Resolved, family: Option<&str>, trials: Option<usize>) -> Result<Value> {
    let family = match family {
        Some(text) => serde_json::from_str(text).map_err(|e| Error::Config(format!("family JSON: {e}")))?,
        None => cfg.family.clone(),
    };
    Ok(explore_questions(&family, trials.unwrap_or(cfg.trials), cfg.seed)?.to_json())
}
