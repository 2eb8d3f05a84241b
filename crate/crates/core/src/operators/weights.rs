use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{parse_scalar_json, Real, Scalar};

/// Weight sequence `n ↦ α_n` of a shift or diagonal operator.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule<S> {
    Constant(S),
    /// `positive` for `n >= 1`, `nonpositive` for `n <= 0`.
    PiecewiseTwoSided { positive: S, nonpositive: S },
    /// `α_n = values[n mod len]`.
    Periodic(Vec<S>),
    Table { entries: BTreeMap<i64, S>, default: S },
}

/// Product of consecutive weights, with its magnitude tracked in `log2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProduct<S> {
    pub value: S,
    pub log2_magnitude: f64,
    pub phase: Complex64,
}

impl<S: Scalar> WeightProduct<S> {
    pub fn one() -> Self {
        WeightProduct { value: S::one(), log2_magnitude: 0.0, phase: Complex64::new(1.0, 0.0) }
    }

    pub fn zero() -> Self {
        WeightProduct { value: S::zero(), log2_magnitude: f64::NEG_INFINITY, phase: Complex64::new(0.0, 0.0) }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn to_json(&self) -> Value {
        let (re, im) = self.value.to_json_parts();
        json!({
            "value": [re, im],
            "log2_magnitude": crate::scalar::json_f64(self.log2_magnitude),
            "phase": [self.phase.re, self.phase.im],
        })
    }
}

/// Magnitude (log2) and phase of a weight raised to `count`.
fn power_parts<S: Scalar>(w: &S, count: u64) -> (f64, Complex64) {
    if count == 0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let c = w.to_c64();
    (count as f64 * w.log2_abs(), Complex64::from_polar(1.0, c.arg() * count as f64))
}

/// Number of `n` in `[lo, hi]` with `n ≡ r (mod len)`.
fn residue_count(lo: i64, hi: i64, r: i64, len: i64) -> u64 {
    if hi < lo {
        return 0;
    }
    ((hi - r).div_euclid(len) - (lo - 1 - r).div_euclid(len)) as u64
}

impl<S: Scalar> WeightRule<S> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidOperator(format!("{what} weight must be non-zero")));
        match self {
            WeightRule::Constant(w) if w.is_zero() => bad("constant"),
            WeightRule::PiecewiseTwoSided { positive, nonpositive } if positive.is_zero() || nonpositive.is_zero() => {
                bad("piecewise")
            }
            WeightRule::Periodic(v) if v.is_empty() => {
                Err(Error::InvalidOperator("periodic weights need at least one value".into()))
            }
            WeightRule::Periodic(v) if v.iter().any(Scalar::is_zero) => bad("periodic"),
            WeightRule::Table { entries, default } if default.is_zero() || entries.values().any(Scalar::is_zero) => {
                bad("table")
            }
            _ => Ok(()),
        }
    }

    pub fn weight(&self, n: i64) -> S {
        match self {
            WeightRule::Constant(w) => w.clone(),
            WeightRule::PiecewiseTwoSided { positive, nonpositive } => {
                if n >= 1 {
                    positive.clone()
                } else {
                    nonpositive.clone()
                }
            }
            WeightRule::Periodic(v) => v[n.rem_euclid(v.len() as i64) as usize].clone(),
            WeightRule::Table { entries, default } => entries.get(&n).unwrap_or(default).clone(),
        }
    }

    /// `(weight, multiplicity)` pairs whose product is `α_lo ⋯ α_hi`.
    fn factor_counts(&self, lo: i64, hi: i64) -> Vec<(S, u64)> {
        if hi < lo {
            return Vec::new();
        }
        match self {
            WeightRule::Constant(w) => vec![(w.clone(), (hi - lo + 1) as u64)],
            WeightRule::PiecewiseTwoSided { positive, nonpositive } => {
                let pos = if hi >= 1 { (hi - lo.max(1) + 1).max(0) as u64 } else { 0 };
                let non = if lo <= 0 { (hi.min(0) - lo + 1).max(0) as u64 } else { 0 };
                vec![(positive.clone(), pos), (nonpositive.clone(), non)]
            }
            WeightRule::Periodic(v) => {
                let len = v.len() as i64;
                v.iter().enumerate().map(|(r, w)| (w.clone(), residue_count(lo, hi, r as i64, len))).collect()
            }
            WeightRule::Table { entries, default } => {
                let mut out: Vec<(S, u64)> = entries.range(lo..=hi).map(|(_, w)| (w.clone(), 1)).collect();
                let listed = out.len() as u64;
                out.push((default.clone(), (hi - lo + 1) as u64 - listed));
                out
            }
        }
    }

    /// `log2 |α_lo ⋯ α_hi|` without forming the product.
    pub fn range_log2(&self, lo: i64, hi: i64) -> f64 {
        self.factor_counts(lo, hi)
            .iter()
            .filter(|(_, c)| *c > 0)
            .map(|(w, c)| *c as f64 * w.log2_abs())
            .sum()
    }

    /// `log2 |α_lo ⋯ α_hi|` and the unit phase of the product.
    pub fn range_log2_phase(&self, lo: i64, hi: i64) -> (f64, Complex64) {
        let mut log2 = 0.0;
        let mut phase = Complex64::new(1.0, 0.0);
        for (w, c) in self.factor_counts(lo, hi) {
            let (l, p) = power_parts(&w, c);
            log2 += l;
            phase *= p;
        }
        (log2, phase)
    }

    /// `α_lo ⋯ α_hi` (empty product when `hi < lo`).
    ///
    /// In the float mode a product beyond `2^900` is an [`Error::Overflow`].
    pub fn range_product(&self, lo: i64, hi: i64) -> Result<WeightProduct<S>> {
        let factors = self.factor_counts(lo, hi);
        let mut log2 = 0.0;
        let mut phase = Complex64::new(1.0, 0.0);
        for (w, c) in &factors {
            let (l, p) = power_parts(w, *c);
            log2 += l;
            phase *= p;
        }
        if S::MODE == crate::scalar::NumericMode::Float && log2 > 900.0 {
            return Err(Error::Overflow { log2 });
        }
        let mut value = S::one();
        for (w, c) in factors {
            if c > 0 {
                value = value * w.powu(c);
            }
        }
        Ok(WeightProduct { value, log2_magnitude: log2, phase })
    }

    /// Weights whose values are set explicitly away from the rule's default
    /// (the listed table entries), used to size spectral windows.
    pub fn listed_indices(&self) -> Option<(i64, i64)> {
        match self {
            WeightRule::Table { entries, .. } => {
                Some((*entries.keys().next()?, *entries.keys().next_back()?))
            }
            WeightRule::PiecewiseTwoSided { .. } => Some((0, 1)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let w = |s: &S| {
            let (re, im) = s.to_json_parts();
            json!([re, im])
        };
        match self {
            WeightRule::Constant(v) => json!({"kind": "constant", "value": w(v)}),
            WeightRule::PiecewiseTwoSided { positive, nonpositive } => json!({
                "kind": "piecewise-two-sided",
                "positive": w(positive),
                "nonpositive": w(nonpositive),
            }),
            WeightRule::Periodic(v) => json!({"kind": "periodic", "values": v.iter().map(w).collect::<Vec<_>>()}),
            WeightRule::Table { entries, default } => json!({
                "kind": "table",
                "entries": entries.iter().map(|(k, v)| json!([k, w(v)])).collect::<Vec<_>>(),
                "default": w(default),
            }),
        }
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| Error::Config("weights must be an object".into()))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("weights need a `kind`".into()))?;
        let allowed: &[&str] = match kind {
            "constant" => &["kind", "value"],
            "piecewise-two-sided" => &["kind", "positive", "nonpositive"],
            "periodic" => &["kind", "values"],
            "table" => &["kind", "entries", "default"],
            other => return Err(Error::Config(format!("unknown weight kind `{other}`"))),
        };
        if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key `{k}` for {kind} weights")));
        }
        let field = |name: &str| -> Result<S> {
            let v = obj.get(name).ok_or_else(|| Error::Config(format!("{kind} weights need `{name}`")))?;
            parse_scalar_json(v)
        };
        let rule = match kind {
            "constant" => WeightRule::Constant(field("value")?),
            "piecewise-two-sided" => WeightRule::PiecewiseTwoSided {
                positive: field("positive")?,
                nonpositive: field("nonpositive")?,
            },
            "periodic" => {
                let values = obj
                    .get("values")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Config("periodic weights need a `values` array".into()))?;
                WeightRule::Periodic(values.iter().map(parse_scalar_json).collect::<Result<_>>()?)
            }
            _ => {
                let raw = obj
                    .get("entries")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Config("table weights need an `entries` array".into()))?;
                let mut entries = BTreeMap::new();
                for e in raw {
                    let pair = e
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| Error::Config(format!("bad table entry {e}")))?;
                    let n = pair[0].as_i64().ok_or_else(|| Error::Config(format!("bad table index {}", pair[0])))?;
                    entries.insert(n, parse_scalar_json(&pair[1])?);
                }
                WeightRule::Table { entries, default: field("default")? }
            }
        };
        rule.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(rule)
    }

    /// Same rule with every weight mapped through `f`.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> WeightRule<T> {
        match self {
            WeightRule::Constant(w) => WeightRule::Constant(f(w)),
            WeightRule::PiecewiseTwoSided { positive, nonpositive } => {
                WeightRule::PiecewiseTwoSided { positive: f(positive), nonpositive: f(nonpositive) }
            }
            WeightRule::Periodic(v) => WeightRule::Periodic(v.iter().map(&f).collect()),
            WeightRule::Table { entries, default } => WeightRule::Table {
                entries: entries.iter().map(|(k, v)| (*k, f(v))).collect(),
                default: f(default),
            },
        }
    }
}

/// Real weight `p/q` in any mode.
pub fn real_weight<S: Scalar>(num: i64, den: i64) -> S {
    S::from_real(S::Real::from_ratio(&crate::scalar::ratio(num, den)))
}
