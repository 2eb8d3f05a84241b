//! Randomised oracle comparisons shared by the integration and acceptance tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_rational::BigRational;
use orbitscope::limit_sets::{search_j_witness, synthesize_shift_j_witness, EpsSchedule, SearchConfig};
use orbitscope::operators::{Block, Motion, ShiftOperator, WeightRule};
use orbitscope::scalar::{ratio, Magnitude, Scalar};
use orbitscope::spaces::{cone_contains_by_minimization, Band, IndexSet, NormTag, OpenCone, SeqVector};
use orbitscope::Exact;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one oracle run: how many instances agreed, and a description
/// of the first disagreement.
#[derive(Debug, Default)]
pub struct Tally {
    pub agreed: usize,
    pub total: usize,
    pub first_mismatch: Option<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.agreed += 1;
        } else if self.first_mismatch.is_none() {
            self.first_mismatch = Some(describe());
        }
    }

    pub fn all_agree(&self) -> bool {
        self.total > 0 && self.agreed == self.total
    }
}

fn small_rational(rng: &mut ChaCha8Rng, max_num: i64, den: i64) -> BigRational {
    ratio(rng.random_range(-max_num..=max_num), den)
}

fn nonzero_weight(rng: &mut ChaCha8Rng) -> Exact {
    loop {
        let den = rng.random_range(1..=4);
        let re = small_rational(rng, 6, den);
        let im = if rng.random_bool(0.25) { small_rational(rng, 3, 2) } else { ratio(0, 1) };
        let w = Exact::from_parts(&re, &im);
        if !w.is_zero() {
            return w;
        }
    }
}

fn random_rule(rng: &mut ChaCha8Rng) -> WeightRule<Exact> {
    match rng.random_range(0..4) {
        0 => WeightRule::Constant(nonzero_weight(rng)),
        1 => WeightRule::PiecewiseTwoSided { positive: nonzero_weight(rng), nonpositive: nonzero_weight(rng) },
        2 => WeightRule::Periodic((0..rng.random_range(1..=4)).map(|_| nonzero_weight(rng)).collect()),
        _ => {
            let entries: BTreeMap<i64, Exact> = (0..rng.random_range(1..=5))
                .map(|_| (rng.random_range(-6..=6), nonzero_weight(rng)))
                .collect();
            WeightRule::Table { entries, default: nonzero_weight(rng) }
        }
    }
}

fn random_operator(rng: &mut ChaCha8Rng) -> ShiftOperator<Exact> {
    let motion = |rng: &mut ChaCha8Rng| *[Motion::Backward, Motion::Forward, Motion::Diagonal].choose(rng).unwrap();
    let built = match rng.random_range(0..6) {
        0 => ShiftOperator::unilateral_backward(random_rule(rng)),
        1 => ShiftOperator::bilateral_backward(random_rule(rng)),
        2 => ShiftOperator::bilateral_forward(random_rule(rng)),
        3 => ShiftOperator::diagonal(IndexSet::Naturals, random_rule(rng)),
        4 => ShiftOperator::diagonal(IndexSet::Integers, random_rule(rng)),
        _ => {
            let split = rng.random_range(-4..=4);
            let blocks = vec![
                Block { band: Band::up_to(split - 1), motion: motion(rng), weights: random_rule(rng) },
                Block { band: Band::from(split), motion: motion(rng), weights: random_rule(rng) },
            ];
            ShiftOperator::block_sum(IndexSet::Integers, blocks)
        }
    };
    built.expect("random operator is well formed")
}

fn random_vector(rng: &mut ChaCha8Rng, index_set: IndexSet, lo: i64, hi: i64, max_num: i64) -> SeqVector<Exact> {
    let lo = if index_set == IndexSet::Naturals { lo.max(0) } else { lo };
    let len = rng.random_range(1..=6);
    let entries: Vec<(i64, Exact)> = (0..len)
        .map(|_| {
            let den = rng.random_range(1..=8);
            let re = small_rational(rng, max_num, den);
            let im = if rng.random_bool(0.2) { small_rational(rng, max_num, 4) } else { ratio(0, 1) };
            (rng.random_range(lo..=hi), Exact::from_parts(&re, &im))
        })
        .collect();
    SeqVector::from_entries(index_set, entries).unwrap()
}

/// `apply_power(n, v)` against `n` successive `apply` calls, exact equality.
pub fn power_matches_iteration(count: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    for _ in 0..count {
        let t = random_operator(&mut rng);
        let v = random_vector(&mut rng, t.index_set(), -10, 10, 9);
        let n = rng.random_range(0..=24);
        let fast = t.apply_power(n, &v).unwrap();
        let mut slow = v.clone();
        for _ in 0..n {
            slow = t.apply(&slow).unwrap();
        }
        tally.record(fast == slow, || format!("n = {n}, v = {v:?}: {fast:?} vs {slow:?}"));
    }
    tally
}

/// Backward shifts whose weights are all of modulus at least 2 or all of
/// modulus at most 1/2, base point 0, targets with sup-norm at least 1 and
/// bounds at most 1/4. Synthesis and search must agree on whether a
/// witness exists, and every witness found must verify.
pub fn synthesis_agrees_with_search(count: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    let schedule = EpsSchedule::<BigRational>::harmonic(4);
    let cap = 200;
    for i in 0..count {
        let expanding = rng.random_bool(0.5);
        let weight = |rng: &mut ChaCha8Rng| {
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            let (n, d) = *[(2, 1), (5, 2), (3, 1), (4, 1)].choose(rng).unwrap();
            let w = if expanding { ratio(sign * n, d) } else { ratio(sign * d, n) };
            Exact::from_parts(&w, &ratio(0, 1))
        };
        let rule = if rng.random_bool(0.5) {
            WeightRule::Constant(weight(&mut rng))
        } else {
            WeightRule::Periodic(vec![weight(&mut rng), weight(&mut rng)])
        };
        let bilateral = rng.random_bool(0.5);
        let t = if bilateral {
            ShiftOperator::bilateral_backward(rule)
        } else {
            ShiftOperator::unilateral_backward(rule)
        }
        .unwrap();
        let index_set = t.index_set();
        let mut y = random_vector(&mut rng, index_set, -6, 6, 12);
        let peak = rng.random_range(if bilateral { -6 } else { 0 }..=6);
        y = y.add(&SeqVector::from_entries(index_set, [(peak, Exact::from_parts(&ratio(3, 2), &ratio(0, 1)))]).unwrap()).unwrap();
        if y.norm(NormTag::PInf).to_f64() < 1.0 {
            y = y.scale_real(&ratio(2, 1));
        }
        let d = ratio(1, *[4, 5, 8].choose(&mut rng).unwrap());
        let p = *[NormTag::P1, NormTag::P2, NormTag::PInf].choose(&mut rng).unwrap();
        let x = SeqVector::zero(index_set);
        let synthesized = synthesize_shift_j_witness(&t, &x, &y, &d, &schedule, 1, cap, p);
        let cfg = SearchConfig { k_cap: cap, budget: 200_000, seed: seed ^ i as u64, ..SearchConfig::default() };
        let searched = search_j_witness(&t, &x, &y, &d, &schedule, &cfg, p);
        let settled = |r: &orbitscope::Result<_>| match r {
            Ok(_) => Some(true),
            Err(e) if e.is_not_found() => Some(false),
            Err(_) => None,
        };
        let verified = [&synthesized, &searched]
            .iter()
            .all(|r| r.as_ref().map_or(true, |w| w.verify(&t).is_ok()));
        let ok = settled(&synthesized).is_some()
            && settled(&synthesized) == settled(&searched)
            && settled(&synthesized) == Some(expanding)
            && verified;
        tally.record(ok, || {
            format!(
                "instance {i}: expanding {expanding}, synthesis {:?}, search {:?}",
                synthesized.as_ref().map(|w| w.times()),
                searched.as_ref().map(|w| w.times())
            )
        });
    }
    tally
}

/// Euclidean cone membership through the closed form against numeric
/// minimisation of the gap `||x - λc|| - λr` over `λ > 0`.
pub fn euclidean_cone_closed_form_matches_minimisation(count: usize, seed: u64) -> Tally {
    cone_forms_agree(count, seed, NormTag::P2)
}

pub fn cone_forms_agree(count: usize, seed: u64, p: NormTag) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    let mut produced = 0;
    while produced < count {
        let center = random_vector(&mut rng, IndexSet::Integers, -3, 3, 8);
        let c_norm = center.norm(p).to_f64();
        if c_norm == 0.0 {
            continue;
        }
        let radius = ratio((c_norm * rng.random_range(0.05..0.95) * 64.0).floor().max(1.0) as i64, 64);
        let Ok(cone) = OpenCone::new(center.clone(), radius, p) else { continue };
        let x = if rng.random_bool(0.5) {
            let lambda = ratio(rng.random_range(1..=40), 8);
            center.scale_real(&lambda).add(&random_vector(&mut rng, IndexSet::Integers, -4, 4, 4)).unwrap()
        } else {
            random_vector(&mut rng, IndexSet::Integers, -4, 4, 8)
        };
        produced += 1;
        let closed = cone.contains(&x).unwrap();
        let numeric = cone_contains_by_minimization(&cone, &x).unwrap();
        tally.record(closed == numeric, || format!("x = {x:?}, center = {center:?}: {closed} vs {numeric}"));
    }
    tally
}
