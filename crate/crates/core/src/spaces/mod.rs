//! Finitely supported sequence vectors over the naturals or the integers.

mod cone;

pub use cone::{cone_contains_by_minimization, ConeSampler, OpenCone};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{parse_complex_json, Magnitude, Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexSet {
    #[serde(rename = "N")]
    Naturals,
    #[serde(rename = "Z")]
    Integers,
}

impl IndexSet {
    pub fn admits(self, index: i64) -> bool {
        match self {
            IndexSet::Naturals => index >= 0,
            IndexSet::Integers => true,
        }
    }

    pub fn as_band(self) -> Band {
        match self {
            IndexSet::Naturals => Band::from(0),
            IndexSet::Integers => Band::all(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            IndexSet::Naturals => "N",
            IndexSet::Integers => "Z",
        }
    }
}

impl std::str::FromStr for IndexSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" | "naturals" => Ok(IndexSet::Naturals),
            "Z" | "integers" => Ok(IndexSet::Integers),
            other => Err(Error::Parse(format!("unknown index set `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormTag {
    #[serde(rename = "1")]
    P1,
    #[serde(rename = "2")]
    P2,
    #[serde(rename = "inf")]
    PInf,
}

impl std::str::FromStr for NormTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "p1" | "P1" => Ok(NormTag::P1),
            "2" | "p2" | "P2" => Ok(NormTag::P2),
            "inf" | "pinf" | "PInf" | "sup" => Ok(NormTag::PInf),
            other => Err(Error::Parse(format!("unknown norm `{other}`"))),
        }
    }
}

/// Closed integer interval, possibly unbounded on either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Band {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Band {
    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Self {
        Band { lo, hi }
    }

    pub fn all() -> Self {
        Band { lo: None, hi: None }
    }

    pub fn from(lo: i64) -> Self {
        Band { lo: Some(lo), hi: None }
    }

    pub fn up_to(hi: i64) -> Self {
        Band { lo: None, hi: Some(hi) }
    }

    pub fn finite(lo: i64, hi: i64) -> Self {
        Band { lo: Some(lo), hi: Some(hi) }
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo.is_none_or(|lo| i >= lo) && self.hi.is_none_or(|hi| i <= hi)
    }

    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(lo), Some(hi)) if lo > hi)
    }

    pub fn intersect(&self, other: &Band) -> Band {
        let lo = match (self.lo, other.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Band { lo, hi }
    }

    pub fn overlaps(&self, other: &Band) -> bool {
        !self.intersect(other).is_empty()
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Some(lo) => write!(f, "[{lo}, ")?,
            None => write!(f, "(-inf, ")?,
        }
        match self.hi {
            Some(hi) => write!(f, "{hi}]"),
            None => write!(f, "+inf)"),
        }
    }
}

/// A finitely supported vector in canonical sparse form: no stored zeros.
#[derive(Clone, PartialEq)]
pub struct SeqVector<S> {
    index_set: IndexSet,
    entries: BTreeMap<i64, S>,
}

impl<S: Scalar> fmt::Debug for SeqVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SeqVector[{}]{{", self.index_set.tag())?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let c = v.to_c64();
            if c.im == 0.0 {
                write!(f, "{k}: {}", c.re)?;
            } else {
                write!(f, "{k}: {}", c)?;
            }
        }
        write!(f, "}}")
    }
}

impl<S: Scalar> SeqVector<S> {
    pub fn zero(index_set: IndexSet) -> Self {
        SeqVector { index_set, entries: BTreeMap::new() }
    }

    /// Unit basis vector `e_n`.
    pub fn basis(index_set: IndexSet, n: i64) -> Result<Self> {
        Self::from_entries(index_set, [(n, S::one())])
    }

    /// Builds a vector; repeated indices are summed and zeros dropped.
    pub fn from_entries<I>(index_set: IndexSet, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, S)>,
    {
        let mut v = Self::zero(index_set);
        for (i, value) in entries {
            if !index_set.admits(i) {
                return Err(Error::NegativeIndex(i));
            }
            v.add_at(i, value);
        }
        Ok(v)
    }

    pub fn index_set(&self) -> IndexSet {
        self.index_set
    }

    pub fn get(&self, i: i64) -> Option<&S> {
        self.entries.get(&i)
    }

    /// Value at `i`, zero outside the support.
    pub fn at(&self, i: i64) -> S {
        self.entries.get(&i).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &S)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(min, max)` of the support.
    pub fn support_bounds(&self) -> Option<(i64, i64)> {
        let lo = *self.entries.keys().next()?;
        let hi = *self.entries.keys().next_back()?;
        Some((lo, hi))
    }

    pub(crate) fn add_at(&mut self, i: i64, value: S) {
        if value.is_zero() {
            return;
        }
        match self.entries.entry(i) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + value;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn ensure_same_index_set(&self, other: &Self) -> Result<()> {
        if self.index_set != other.index_set {
            return Err(Error::IndexSetMismatch { left: self.index_set, right: other.index_set });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_same_index_set(other)?;
        let mut out = self.clone();
        for (i, v) in other.iter() {
            out.add_at(i, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.ensure_same_index_set(other)?;
        let mut out = self.clone();
        for (i, v) in other.iter() {
            out.add_at(i, -v.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, a: &S) -> Self {
        if a.is_zero() {
            return Self::zero(self.index_set);
        }
        SeqVector {
            index_set: self.index_set,
            entries: self.entries.iter().map(|(k, v)| (*k, v.clone() * a.clone())).collect(),
        }
    }

    pub fn scale_real(&self, r: &S::Real) -> Self {
        if *r == S::Real::zero() {
            return Self::zero(self.index_set);
        }
        SeqVector {
            index_set: self.index_set,
            entries: self.entries.iter().map(|(k, v)| (*k, v.scale(r))).collect(),
        }
    }

    /// Coordinates inside `band`.
    pub fn restrict(&self, band: &Band) -> Self {
        SeqVector {
            index_set: self.index_set,
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| band.contains(**k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Coordinates whose index satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(i64) -> bool) -> Self {
        SeqVector {
            index_set: self.index_set,
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep(**k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn norm(&self, p: NormTag) -> S::Norm {
        norm(self, p)
    }

    /// `||self||_2^2`, exact in the exact mode.
    pub fn norm_sq(&self) -> S::Real {
        self.entries.values().fold(S::Real::zero(), |acc, v| acc + v.abs_sq())
    }

    /// `Re <self, other>`.
    pub fn re_inner(&self, other: &Self) -> S::Real {
        self.entries
            .iter()
            .filter_map(|(k, v)| other.entries.get(k).map(|w| v.re_inner(w)))
            .fold(S::Real::zero(), |acc, x| acc + x)
    }

    /// Converts to another scalar field through the f64 approximation.
    pub fn to_float(&self) -> SeqVector<crate::scalar::Float> {
        SeqVector {
            index_set: self.index_set,
            entries: self.entries.iter().map(|(k, v)| (*k, v.to_c64())).collect(),
        }
    }

    /// `{"index_set": "N"|"Z", "entries": [[index, re, im], ...]}` sorted by index.
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(k, v)| {
                let (re, im) = v.to_json_parts();
                json!([k, re, im])
            })
            .collect();
        json!({ "index_set": self.index_set.tag(), "entries": entries })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("vector must be a JSON object".into()))?;
        for key in obj.keys() {
            if key != "index_set" && key != "entries" {
                return Err(Error::Parse(format!("unknown vector key `{key}`")));
            }
        }
        let index_set: IndexSet = obj
            .get("index_set")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("missing `index_set`".into()))?
            .parse()?;
        let raw = obj
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing `entries` array".into()))?;
        let mut entries = Vec::with_capacity(raw.len());
        for e in raw {
            let arr = e
                .as_array()
                .filter(|a| a.len() == 2 || a.len() == 3)
                .ok_or_else(|| Error::Parse(format!("bad vector entry {e}")))?;
            let index = arr[0]
                .as_i64()
                .ok_or_else(|| Error::Parse(format!("bad vector index {}", arr[0])))?;
            let value = if arr.len() == 3 {
                let re = parse_complex_json(&arr[1])?.0;
                let im = parse_complex_json(&arr[2])?.0;
                S::from_parts(&re, &im)
            } else {
                crate::scalar::parse_scalar_json(&arr[1])?
            };
            entries.push((index, value));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, _) in &entries {
            if !seen.insert(*i) {
                return Err(Error::Parse(format!("duplicate vector index {i}")));
            }
        }
        Self::from_entries(index_set, entries)
    }

    /// Parses `e0`, `3*e2`, `e0 + 1/2*e-3 - 0.4*e1`.
    pub fn parse_terms(index_set: IndexSet, text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("cannot parse vector expression `{text}`"));
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "0" {
            return Ok(Self::zero(index_set));
        }
        let mut terms = Vec::new();
        let mut current = String::new();
        let chars: Vec<char> = compact.chars().collect();
        for (pos, &c) in chars.iter().enumerate() {
            let prev = if pos > 0 { Some(chars[pos - 1]) } else { None };
            // a sign starts a new term unless it follows `e`, `*`, `/`
            if (c == '+' || c == '-') && pos > 0 && !matches!(prev, Some('e') | Some('*') | Some('/')) {
                terms.push(std::mem::take(&mut current));
            }
            current.push(c);
        }
        terms.push(current);
        let mut entries = Vec::new();
        for term in terms {
            let term = term.strip_prefix('+').unwrap_or(&term).to_string();
            let (negative, body) = match term.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, term),
            };
            let (coef, basis) = match body.split_once('*') {
                Some((c, b)) => (crate::scalar::parse_ratio(c)?, b.to_string()),
                None => (crate::scalar::ratio_int(1), body),
            };
            let index: i64 = basis.strip_prefix('e').ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let coef = if negative { -coef } else { coef };
            entries.push((index, S::from_parts(&coef, &crate::scalar::ratio_int(0))));
        }
        Self::from_entries(index_set, entries)
    }
}

/// Exact p-norm of the finite support.
pub fn norm<S: Scalar>(v: &SeqVector<S>, p: NormTag) -> S::Norm {
    match p {
        NormTag::P2 => S::Norm::sqrt_of(&v.norm_sq()),
        NormTag::PInf => {
            let mut best: Option<S::Real> = None;
            for x in v.entries.values() {
                let q = x.abs_sq();
                if best.as_ref().is_none_or(|b| q > *b) {
                    best = Some(q);
                }
            }
            match best {
                Some(q) => S::Norm::sqrt_of(&q),
                None => S::Norm::zero(),
            }
        }
        NormTag::P1 => {
            let squares: Vec<S::Real> = v.entries.values().map(|x| x.abs_sq()).collect();
            S::Norm::sum_sqrt(squares.iter())
        }
    }
}

/// `||a - b||_p < bound` under the strictness policy of the mode.
pub fn distance_below<S: Scalar>(
    a: &SeqVector<S>,
    b: &SeqVector<S>,
    p: NormTag,
    bound: &S::Real,
) -> Result<bool> {
    Ok(norm(&a.sub(b)?, p).lt(bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, ratio_int, Exact, Float};
    use num_complex::Complex;

    fn ev(entries: &[(i64, i64)]) -> SeqVector<Exact> {
        SeqVector::from_entries(
            IndexSet::Integers,
            entries.iter().map(|&(i, v)| (i, Complex::new(ratio_int(v), ratio_int(0)))),
        )
        .unwrap()
    }

    #[test]
    fn norms_of_basic_vectors() {
        let e0 = SeqVector::<Exact>::basis(IndexSet::Integers, 0).unwrap();
        assert!(norm(&e0, NormTag::PInf).same_as(&Magnitude::from_real(&ratio_int(1))));
        let zero = SeqVector::<Exact>::zero(IndexSet::Integers);
        assert!(norm(&zero, NormTag::P2).is_zero());
        let v = ev(&[(0, 1), (1, 1)]);
        assert!(norm(&v, NormTag::P1).same_as(&Magnitude::from_real(&ratio_int(2))));
    }

    #[test]
    fn canonical_form_drops_zeros() {
        let v = ev(&[(0, 1), (1, 0), (2, -3)]);
        assert_eq!(v.support_len(), 2);
        let w = v.sub(&v).unwrap();
        assert!(w.is_zero());
    }

    #[test]
    fn naturals_reject_negative_indices() {
        let r = SeqVector::<Exact>::basis(IndexSet::Naturals, -1);
        assert!(matches!(r, Err(Error::NegativeIndex(-1))));
    }

    #[test]
    fn mixing_index_sets_is_an_error() {
        let a = SeqVector::<Float>::basis(IndexSet::Naturals, 0).unwrap();
        let b = SeqVector::<Float>::basis(IndexSet::Integers, 0).unwrap();
        assert!(matches!(a.add(&b), Err(Error::IndexSetMismatch { .. })));
    }

    #[test]
    fn json_format_matches_contract() {
        let v = SeqVector::<Exact>::from_entries(
            IndexSet::Integers,
            [(-1, Complex::new(ratio(1, 2), ratio_int(0))), (3, Complex::new(ratio_int(2), ratio(-1, 3)))],
        )
        .unwrap();
        let j = v.to_json();
        assert_eq!(
            j.to_string(),
            r#"{"entries":[[-1,"1/2","0/1"],[3,"2/1","-1/3"]],"index_set":"Z"}"#
        );
        let back = SeqVector::<Exact>::from_json(&j).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn json_rejects_garbage() {
        assert!(SeqVector::<Exact>::from_json(&json!({"index_set": "Q", "entries": []})).is_err());
        assert!(SeqVector::<Exact>::from_json(&json!({"index_set": "Z"})).is_err());
        assert!(SeqVector::<Exact>::from_json(&json!({"index_set": "Z", "entries": [[0, 1], [0, 2]]})).is_err());
        assert!(SeqVector::<Exact>::from_json(&json!({"index_set": "Z", "entries": [], "x": 1})).is_err());
    }

    #[test]
    fn parses_term_expressions() {
        let v = SeqVector::<Exact>::parse_terms(IndexSet::Integers, "e0 + 1/2*e-3 - 0.5*e1").unwrap();
        assert_eq!(v.at(0), Complex::new(ratio_int(1), ratio_int(0)));
        assert_eq!(v.at(-3), Complex::new(ratio(1, 2), ratio_int(0)));
        assert_eq!(v.at(1), Complex::new(ratio(-1, 2), ratio_int(0)));
        assert!(SeqVector::<Exact>::parse_terms(IndexSet::Integers, "x1").is_err());
        assert!(SeqVector::<Exact>::parse_terms(IndexSet::Integers, "0").unwrap().is_zero());
    }
}
