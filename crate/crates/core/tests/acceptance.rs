//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use orbitscope::certificates::{run_all, run_certificate, write_report_bundle, CertificateReport, SuiteConfig, Verdict};
use orbitscope::operators::preset;
use orbitscope::orbits::orbit;
use orbitscope::spaces::{IndexSet, NormTag, SeqVector};
use orbitscope::{Exact, NumericMode};
use serde_json::Value;

const SEED: u64 = 0;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn certify(name: &str, mode: NumericMode) -> CertificateReport {
    run_certificate(name, mode, None, SEED).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn passed(report: &CertificateReport, check: &str) -> bool {
    report.sub_check(check).is_some_and(|c| c.verdict == Verdict::Pass)
}

fn summary(report: &CertificateReport, check: &str) -> String {
    report.sub_check(check).map_or_else(|| format!("{check} missing"), |c| c.summary.clone())
}

fn param(report: &CertificateReport, key: &str) -> Value {
    report.parameters[key].clone()
}

fn coarse_j_reproduction() -> Outcome {
    let report = certify("prop32", NumericMode::Exact);
    let setup = param(&report, "operator") == "paper-prop32"
        && param(&report, "d") == "2"
        && param(&report, "sample_count") == 100
        && param(&report, "support_bound") == 20
        && param(&report, "norm_bound") == 10
        && param(&report, "m") == 5;
    let t = preset::<Exact>("paper-prop32").unwrap();
    let e0 = SeqVector::basis(IndexSet::Integers, 0).unwrap();
    let trace = orbit(&t, &e0, 10_000, NormTag::PInf).unwrap();
    let unit = trace.norms.iter().all(|n| n.is_rational() && n.rational_part() == &num_rational::BigRational::from_integer(1.into()));
    let checks = ["orbit-sup-norm-one", "synthesis-all-targets", "independent-reverification"];
    let ok = setup && unit && checks.iter().all(|c| passed(&report, c)) && report.runtime <= Duration::from_secs(60);
    outcome(
        ok,
        format!(
            "{}; {}; orbit norms recomputed over {} steps; {:.1}s",
            summary(&report, "synthesis-all-targets"),
            summary(&report, "independent-reverification"),
            trace.norms.len() - 1,
            report.runtime.as_secs_f64()
        ),
    )
}

fn quarter_tolerance_refusal() -> Outcome {
    let report = certify("prop32", NumericMode::Exact);
    let Some(check) = report.sub_check("forced-quarter-tolerance") else {
        return outcome(false, "sub-check missing");
    };
    let outcomes = check.detail["outcomes"].as_array().cloned().unwrap_or_default();
    let setup = param(&report, "forced_d") == "1/4" && param(&report, "forced_count") == 50 && check.detail["budget"] == 1_000_000;
    let acceptable = outcomes.iter().all(|o| match o["outcome"].as_str() {
        Some("no-family") => true,
        Some("contradiction") => {
            let c = &o["check"];
            c["contradicts"] == true && !c["bound_near_one"].is_null() && !c["bound_near_zero"].is_null()
        }
        _ => false,
    });
    outcome(setup && outcomes.len() == 50 && acceptable && check.verdict == Verdict::Pass, check.summary.clone())
}

fn rescaling() -> Outcome {
    let report = certify("prop15", NumericMode::Exact);
    let setup = param(&report, "scale_base") == "2" && param(&report, "scale_count") == 12 && param(&report, "target_eps") == "1/1000";
    let ok = setup
        && passed(&report, "family-construction")
        && passed(&report, "rescaled-certificate")
        && report.runtime <= Duration::from_secs(10);
    outcome(ok, format!("{}; {:.2}s", summary(&report, "rescaled-certificate"), report.runtime.as_secs_f64()))
}

fn amplification() -> Outcome {
    let report = certify("prop22", NumericMode::Exact);
    let distances = report.residuals["distances"].as_array().map_or(0, Vec::len);
    let setup = param(&report, "lambda") == "1/2" && param(&report, "steps") == 10;
    let ok = setup
        && distances == 10
        && ["exact-amplification", "float-agreement", "geometric-decrease"].iter().all(|c| passed(&report, c));
    outcome(ok, format!("{}; {}", summary(&report, "exact-amplification"), summary(&report, "float-agreement")))
}

fn contraction() -> Outcome {
    let report = certify("prop36-contraction", NumericMode::Exact);
    let estimate = report.sub_check("gelfand-trace").and_then(|c| c.detail["estimate"].as_f64()).unwrap_or(f64::NAN);
    let setup = param(&report, "weight") == "1/2"
        && param(&report, "inside_count") == 200
        && param(&report, "outside_count") == 50
        && param(&report, "outside_budget") == 100_000
        && param(&report, "gelfand_n") == 64;
    let checks = ["gelfand-trace", "inner-ball-witnessed", "outer-targets-unwitnessed", "independent-reverification"];
    let ok = setup && (estimate - 0.5).abs() <= 0.005 && checks.iter().all(|c| passed(&report, c));
    outcome(
        ok,
        format!(
            "{}; {}; Gelfand estimate {estimate:.6}",
            summary(&report, "inner-ball-witnessed"),
            summary(&report, "outer-targets-unwitnessed")
        ),
    )
}

fn expansion() -> Outcome {
    let report = certify("prop36-expansion", NumericMode::Exact);
    let rungs = report
        .sub_check("no-witness-from-nonzero-point")
        .and_then(|c| c.detail["rungs"].as_array().cloned())
        .unwrap_or_default();
    let budgets: Vec<u64> = rungs.iter().filter_map(|r| r["budget"].as_u64()).collect();
    let none_found = !rungs.is_empty() && rungs.iter().all(|r| r["outcome"] != "found");
    let setup = param(&report, "target_count") == 100 && param(&report, "x") == "e1" && budgets == [1_000, 10_000, 100_000];
    let checks = ["mixing-from-zero", "no-witness-from-nonzero-point", "collapse-diagnostic", "independent-reverification"];
    let ok = setup && none_found && checks.iter().all(|c| passed(&report, c));
    outcome(ok, format!("{}; {}", summary(&report, "mixing-from-zero"), summary(&report, "collapse-diagnostic")))
}

fn riesz_blocks() -> Outcome {
    let report = certify("riesz-blocks", NumericMode::Exact);
    let ratios: Vec<f64> = report
        .sub_check("lambda-ladder")
        .and_then(|c| c.detail["rungs"].as_array().cloned())
        .unwrap_or_default()
        .iter()
        .filter_map(|r| r["ratio"].as_f64())
        .collect();
    let smallest = ratios.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
    let setup = param(&report, "operator") == "two-band-riesz" && param(&report, "sample_count") == 1000;
    let checks = ["block-classification", "targets-witnessed", "band-decomposition", "lambda-ladder", "independent-reverification"];
    let ok = setup && ratios.len() >= 2 && smallest >= 1.9 && checks.iter().all(|c| passed(&report, c));
    outcome(ok, format!("{}; smallest ratio factor per doubling {smallest:.4}", summary(&report, "band-decomposition")))
}

fn oracle_equivalences() -> Outcome {
    let power = common::power_matches_iteration(500, SEED + 101);
    let agreement = common::synthesis_agrees_with_search(100, SEED + 102);
    let cone = common::euclidean_cone_closed_form_matches_minimisation(1000, SEED + 103);
    let line = |what: &str, t: &common::Tally| format!("{what} {}/{}", t.agreed, t.total);
    let mismatch = [&power, &agreement, &cone].iter().find_map(|t| t.first_mismatch.clone());
    outcome(
        power.all_agree() && agreement.all_agree() && cone.all_agree() && power.total == 500 && agreement.total == 100 && cone.total == 1000,
        format!(
            "{}, {}, {}{}",
            line("powers", &power),
            line("synthesis/search", &agreement),
            line("P2 cones", &cone),
            mismatch.map_or(String::new(), |m| format!("; first mismatch: {m}"))
        ),
    )
}

fn read_bundle(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let root = std::env::temp_dir().join(format!("orbitscope-acceptance-{}", std::process::id()));
    let cfg = SuiteConfig { seed: SEED, ..SuiteConfig::default() };
    let mut bundles = Vec::new();
    let mut slowest = Duration::ZERO;
    for run in 0..2 {
        let started = Instant::now();
        let reports = run_all(&cfg).expect("suite runs");
        let dir = root.join(format!("run{run}"));
        write_report_bundle(&reports, &dir).expect("bundle written");
        slowest = slowest.max(started.elapsed());
        bundles.push(read_bundle(&dir));
    }
    let _ = fs::remove_dir_all(&root);
    let identical = bundles[0] == bundles[1];
    let ok = identical && bundles[0].len() == 8 && slowest <= Duration::from_secs(300);
    outcome(
        ok,
        format!(
            "{} files, bundles {}; slowest suite run {:.1}s",
            bundles[0].len(),
            if identical { "byte-identical" } else { "differ" },
            slowest.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("coarse J-class shift, 100 synthesized witnesses", coarse_j_reproduction),
        ("quarter tolerance admits no consistent family", quarter_tolerance_refusal),
        ("rescaled family reaches 1e-3", rescaling),
        ("amplification by 1/2 over ten steps", amplification),
        ("contraction: ball inclusion and Gelfand trace", contraction),
        ("expansion: mixing from zero, none from e1", expansion),
        ("two-band Riesz decomposition", riesz_blocks),
        ("oracle equivalences", oracle_equivalences),
        ("deterministic report bundle", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = run();
        if !result.pass {
            failures += 1;
        }
        println!(
            "criterion {} {} {name} ({:.1}s): {}",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
