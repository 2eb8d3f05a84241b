//! Runnable finite-scale reproductions with machine-readable reports.
//!
//! Every certificate reads its parameters from the versioned
//! `defaults.json` (overridable per run), derives all randomness from one
//! seed, re-verifies each embedded witness in a separate pass and reports a
//! verdict per sub-check. `INDECISIVE` marks budget or hypothesis limits,
//! never a refutation.

mod explore;
mod instances;
mod params;
mod reports;

pub use explore::{explore_questions, ExploreReport};
pub use params::Params;
pub use reports::{CertificateReport, SubCheck, Verdict};

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{Exact, Float, NumericMode};

/// Versioned default parameters.
pub const DEFAULTS_JSON: &str = include_str!("defaults.json");

pub const CERTIFICATE_NAMES: &[&str] =
    &["prop32", "prop36-contraction", "prop36-expansion", "riesz-blocks", "prop15", "prop21", "prop22"];

pub fn defaults() -> Value {
    serde_json::from_str(DEFAULTS_JSON).expect("bundled defaults are valid JSON")
}

/// Which certificates to run, in which mode, with which overrides.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub mode: NumericMode,
    pub seed: u64,
    pub names: Vec<String>,
    /// `{name: {parameter: value}}` merged over the defaults.
    pub overrides: Value,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            mode: NumericMode::Exact,
            seed: 0,
            names: CERTIFICATE_NAMES.iter().map(|s| s.to_string()).collect(),
            overrides: Value::Object(Default::default()),
        }
    }
}

/// Seed of the named certificate (FNV-1a of the name mixed with the run seed).
fn derive_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ h
}

fn resolve_names(names: &[String]) -> Result<Vec<&'static str>> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(CERTIFICATE_NAMES.iter().copied());
            continue;
        }
        match CERTIFICATE_NAMES.iter().find(|n| **n == name) {
            Some(n) => out.push(*n),
            None => return Err(Error::Config(format!("unknown certificate `{name}`; known: {}", CERTIFICATE_NAMES.join(", ")))),
        }
    }
    out.dedup();
    Ok(out)
}

/// Runs one named certificate.
pub fn run_certificate(name: &str, mode: NumericMode, overrides: Option<&Value>, seed: u64) -> Result<CertificateReport> {
    let defaults = defaults();
    let base = defaults["certificates"]
        .get(name)
        .ok_or_else(|| Error::Config(format!("unknown certificate `{name}`")))?;
    let params = Params::merged(name, base, overrides)?;
    let started = Instant::now();
    let mut report = match (name, mode) {
        ("prop22", _) => instances::amplification(&params, seed)?,
        (_, NumericMode::Exact) => run_in_mode::<Exact>(name, &params, seed)?,
        (_, NumericMode::Float) => run_in_mode::<Float>(name, &params, seed)?,
    };
    report.runtime = started.elapsed();
    Ok(report)
}

fn run_in_mode<S: crate::scalar::Scalar>(name: &str, params: &Params, seed: u64) -> Result<CertificateReport> {
    match name {
        "prop32" => instances::coarse_j_class_shift::<S>(params, seed),
        "prop36-contraction" => instances::contraction::<S>(params, seed),
        "prop36-expansion" => instances::expansion::<S>(params, seed),
        "riesz-blocks" => instances::riesz_blocks::<S>(params, seed),
        "prop15" => instances::scaled_family::<S>(params, seed),
        "prop21" => instances::coarse_density::<S>(params, seed),
        other => Err(Error::Config(format!("unknown certificate `{other}`"))),
    }
}

/// Runs the selected certificates in parallel; reports come back in the
/// order of the selection.
pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<CertificateReport>> {
    let names = resolve_names(&cfg.names)?;
    let overrides = match &cfg.overrides {
        Value::Object(map) => map.clone(),
        Value::Null => Default::default(),
        _ => return Err(Error::Config("certificate overrides must be an object".into())),
    };
    if let Some(k) = overrides.keys().find(|k| !CERTIFICATE_NAMES.contains(&k.as_str())) {
        return Err(Error::Config(format!("overrides name unknown certificate `{k}`")));
    }
    names
        .par_iter()
        .map(|name| run_certificate(name, cfg.mode, overrides.get(*name), derive_seed(cfg.seed, name)))
        .collect()
}

/// Exit status of a bundle: 0 all pass, 4 some indecisive, 5 some failure.
pub fn aggregate_exit_code(reports: &[CertificateReport]) -> i32 {
    match Verdict::combine(reports.iter().map(|r| r.verdict)) {
        Verdict::Fail => 5,
        Verdict::Indecisive => 4,
        _ => 0,
    }
}

/// Writes `<name>.json` per report plus `index.json` into `dir`, creating
/// it if needed. Runtimes are left out; see [`timing_json`].
pub fn write_report_bundle(reports: &[CertificateReport], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(reports.len() + 1);
    let mut entries = Vec::with_capacity(reports.len());
    for report in reports {
        let file = format!("{}.json", report.name);
        let path = dir.join(&file);
        fs::write(&path, pretty(&report.to_json())?)?;
        written.push(path);
        entries.push(json!({ "name": report.name, "verdict": report.verdict, "file": file }));
    }
    let index = json!({
        "defaults_version": defaults()["version"],
        "verdict": Verdict::combine(reports.iter().map(|r| r.verdict)),
        "exit_code": aggregate_exit_code(reports),
        "certificates": entries,
    });
    let path = dir.join("index.json");
    fs::write(&path, pretty(&index)?)?;
    written.push(path);
    Ok(written)
}

/// Wall-clock seconds per certificate.
pub fn timing_json(reports: &[CertificateReport]) -> Value {
    let per: serde_json::Map<String, Value> =
        reports.iter().map(|r| (r.name.clone(), json!(r.runtime.as_secs_f64()))).collect();
    json!({ "seconds": per, "total": reports.iter().map(|r| r.runtime.as_secs_f64()).sum::<f64>() })
}

fn pretty(value: &Value) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
