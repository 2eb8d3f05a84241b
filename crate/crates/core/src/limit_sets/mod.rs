//! Finite certificates for the coarse limit sets `J(x,T,d)`, `J^mix(x,T,d)`
//! and `D(x,T,d) = O(x,T,d) ∪ J(x,T,d)`.
//!
//! A [`JWitness`] lists triples `(x_i, k_i, dist_i)` with `||x_i - x|| < ε_i`,
//! strictly increasing `k_i` and `||T^{k_i} x_i - y|| < d`. It certifies
//! membership only to the depth of its schedule.

mod solver;
mod transforms;

pub use solver::{
    d_witness, jmix_witness, search_j_witness, synthesize_shift_j_witness, synthesize_shift_jmix_witness, SearchConfig,
};
pub use transforms::{
    amplify_coarse_witnesses, contradiction_check, rescale_j_witness_family, shrink_j_witness, AmplifiedPoint,
    Contradiction, MixCertificate, MixTriple,
};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::operators::ShiftOperator;
use crate::orbits::CoarseWitness;
use crate::scalar::{Magnitude, Real, Scalar};
use crate::spaces::{norm, NormTag, SeqVector};

/// Strictly decreasing positive radii `ε_1 > ε_2 > ... > ε_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSchedule<R> {
    values: Vec<R>,
    rule: String,
}

impl<R: Real> EpsSchedule<R> {
    /// `ε_i = 1/i` for `i = 1..=m`.
    pub fn harmonic(m: usize) -> Self {
        Self::harmonic_scaled(m, &R::one())
    }

    /// `ε_i = c/i`.
    pub fn harmonic_scaled(m: usize, c: &R) -> Self {
        let values = (1..=m).map(|i| c.clone() / R::from_int(i as i64)).collect();
        EpsSchedule { values, rule: format!("{}/i", c.to_f64()) }
    }

    pub fn from_values(values: Vec<R>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("schedule needs at least one radius".into()));
        }
        if !values.iter().all(Real::is_positive) {
            return Err(Error::InvalidArgument("schedule radii must be positive".into()));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("schedule radii must strictly decrease".into()));
        }
        Ok(EpsSchedule { values, rule: "explicit".into() })
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn rule(&self) -> &str {
        &self.rule
    }

    pub fn scaled(&self, factor: &R) -> Self {
        EpsSchedule {
            values: self.values.iter().map(|v| v.clone() * factor.clone()).collect(),
            rule: format!("{} * ({})", factor.to_f64(), self.rule),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "rule": self.rule, "values": self.values.iter().map(Real::to_json).collect::<Vec<_>>() })
    }
}

#[derive(Debug, Clone)]
pub struct JTriple<S: Scalar> {
    pub point: SeqVector<S>,
    pub time: u64,
    /// `||T^time point - target||`.
    pub distance: S::Norm,
    /// `||point - base||`.
    pub perturbation: S::Norm,
}

#[derive(Debug, Clone)]
pub struct JWitness<S: Scalar> {
    pub base: SeqVector<S>,
    pub target: SeqVector<S>,
    pub bound: S::Real,
    pub norm_tag: NormTag,
    pub schedule: EpsSchedule<S::Real>,
    pub triples: Vec<JTriple<S>>,
    /// Times are consecutive (`J^mix`).
    pub mix: bool,
}

impl<S: Scalar> JWitness<S> {
    /// Re-checks every inequality with fresh [`ShiftOperator::apply_power`] calls.
    pub fn verify(&self, t: &ShiftOperator<S>) -> Result<()> {
        let fail = |msg: String| Err(Error::VerificationFailed(msg));
        if self.triples.len() != self.schedule.len() {
            return fail(format!("{} triples for a schedule of length {}", self.triples.len(), self.schedule.len()));
        }
        for (i, (tr, eps)) in self.triples.iter().zip(self.schedule.values()).enumerate() {
            if i > 0 {
                let prev = self.triples[i - 1].time;
                if tr.time <= prev {
                    return fail(format!("times {prev}, {} are not increasing", tr.time));
                }
                if self.mix && tr.time != prev + 1 {
                    return fail(format!("times {prev}, {} are not consecutive", tr.time));
                }
            } else if tr.time == 0 {
                return fail("times must be positive".into());
            }
            let pert = norm(&tr.point.sub(&self.base)?, self.norm_tag);
            if !pert.lt(eps) {
                return fail(format!("triple {i}: perturbation {} is not below {}", pert.to_f64(), eps.to_f64()));
            }
            let image = t.apply_power(tr.time, &tr.point)?;
            let dist = norm(&image.sub(&self.target)?, self.norm_tag);
            if !dist.lt(&self.bound) {
                return fail(format!("triple {i}: distance {} is not below {}", dist.to_f64(), self.bound.to_f64()));
            }
            if !dist.same_as(&tr.distance) || !pert.same_as(&tr.perturbation) {
                return fail(format!("triple {i}: recorded values differ from recomputed ones"));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<u64> {
        self.triples.iter().map(|t| t.time).collect()
    }

    /// Largest recorded distance.
    pub fn max_distance(&self) -> f64 {
        self.triples.iter().map(|t| t.distance.to_f64()).fold(0.0, f64::max)
    }

    /// The witness for `λy` from `λx` at bound `λd` (`λ > 0`).
    pub fn scaled(&self, lambda: &S::Real) -> Result<Self> {
        if !lambda.is_positive() {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        Ok(JWitness {
            base: self.base.scale_real(lambda),
            target: self.target.scale_real(lambda),
            bound: self.bound.clone() * lambda.clone(),
            norm_tag: self.norm_tag,
            schedule: self.schedule.scaled(lambda),
            triples: self
                .triples
                .iter()
                .map(|t| JTriple {
                    point: t.point.scale_real(lambda),
                    time: t.time,
                    distance: t.distance.scale(lambda),
                    perturbation: t.perturbation.scale(lambda),
                })
                .collect(),
            mix: self.mix,
        })
    }

    /// The same triples read as a witness at a larger bound.
    pub fn with_bound(&self, bound: S::Real) -> Result<Self> {
        if bound < self.bound {
            return Err(Error::InvalidArgument("a witness only transfers to larger bounds".into()));
        }
        Ok(JWitness { bound, ..self.clone() })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": if self.mix { "jmix" } else { "j" },
            "base": self.base.to_json(),
            "target": self.target.to_json(),
            "bound": self.bound.to_json(),
            "norm": self.norm_tag,
            "schedule": self.schedule.to_json(),
            "triples": self.triples.iter().map(|t| json!({
                "time": t.time,
                "point": t.point.to_json(),
                "distance": t.distance.to_json(),
                "perturbation": t.perturbation.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Witness for `D(x,T,d)`: one branch only.
#[derive(Debug, Clone)]
pub enum DWitness<S: Scalar> {
    Orbit(CoarseWitness<S>),
    Limit(JWitness<S>),
}

impl<S: Scalar> DWitness<S> {
    pub fn verify(&self, t: &ShiftOperator<S>) -> Result<()> {
        match self {
            DWitness::Orbit(w) => w.verify(t),
            DWitness::Limit(w) => w.verify(t),
        }
    }

    pub fn branch(&self) -> &'static str {
        match self {
            DWitness::Orbit(_) => "orbit",
            DWitness::Limit(_) => "limit",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            DWitness::Orbit(w) => json!({"branch": "orbit", "witness": w.to_json()}),
            DWitness::Limit(w) => json!({"branch": "limit", "witness": w.to_json()}),
        }
    }
}
