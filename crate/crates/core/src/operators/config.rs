//! Operator configuration in JSON and the named presets.

use serde_json::Value;

use super::{real_weight, Block, Motion, ShiftOperator, WeightRule};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spaces::{Band, IndexSet};

pub const PRESET_NAMES: &[&str] = &[
    "paper-prop32",
    "constant-2-unilateral",
    "constant-half-unilateral",
    "constant-2-bilateral",
    "constant-half-diagonal",
    "constant-3-diagonal",
    "two-band-riesz",
];

/// Builds a named operator.
///
/// `paper-prop32` is the bilateral backward shift with `α_n = 2` for
/// `n >= 1` and `α_n = 1` for `n <= 0`; `two-band-riesz` is a backward
/// shift with weight `1/2` on `(-∞, -1]` and weight `2` on `[0, ∞)`.
pub fn preset<S: Scalar>(name: &str) -> Result<ShiftOperator<S>> {
    let w = |n, d| WeightRule::Constant(real_weight::<S>(n, d));
    match name {
        "paper-prop32" => ShiftOperator::bilateral_backward(WeightRule::PiecewiseTwoSided {
            positive: real_weight(2, 1),
            nonpositive: real_weight(1, 1),
        }),
        "constant-2-unilateral" => ShiftOperator::unilateral_backward(w(2, 1)),
        "constant-half-unilateral" => ShiftOperator::unilateral_backward(w(1, 2)),
        "constant-2-bilateral" => ShiftOperator::bilateral_backward(w(2, 1)),
        "constant-half-diagonal" => ShiftOperator::diagonal(IndexSet::Integers, w(1, 2)),
        "constant-3-diagonal" => ShiftOperator::diagonal(IndexSet::Integers, w(3, 1)),
        "two-band-riesz" => ShiftOperator::block_sum(
            IndexSet::Integers,
            vec![
                Block { band: Band::up_to(-1), motion: Motion::Backward, weights: w(1, 2) },
                Block { band: Band::from(0), motion: Motion::Backward, weights: w(2, 1) },
            ],
        ),
        other => Err(Error::Config(format!("unknown operator preset `{other}`"))),
    }
}

fn reject_unknown(obj: &serde_json::Map<String, Value>, allowed: &[&str], what: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::Config(format!("unknown key `{k}` in {what}"))),
        None => Ok(()),
    }
}

fn parse_band(v: &Value) -> Result<Band> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::Config(format!("band must be [lo, hi], got {v}")))?;
    let end = |e: &Value| -> Result<Option<i64>> {
        match e {
            Value::Null => Ok(None),
            other => other.as_i64().map(Some).ok_or_else(|| Error::Config(format!("bad band end {other}"))),
        }
    };
    Ok(Band::new(end(&pair[0])?, end(&pair[1])?))
}

/// Parses `{"preset": name}` or
/// `{"shape", "index_set", "weights"}` / `{"shape": "block-direct-sum", "index_set", "blocks"}`.
pub fn operator_from_json<S: Scalar>(value: &Value) -> Result<ShiftOperator<S>> {
    if let Value::String(name) = value {
        return preset(name);
    }
    let obj = value.as_object().ok_or_else(|| Error::Config("operator must be a JSON object".into()))?;
    if let Some(name) = obj.get("preset") {
        reject_unknown(obj, &["preset"], "operator")?;
        return preset(name.as_str().ok_or_else(|| Error::Config("preset must be a string".into()))?);
    }
    let shape = obj
        .get("shape")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Config("operator needs a `shape`".into()))?;
    let index_set: Option<IndexSet> = match obj.get("index_set") {
        Some(v) => Some(
            v.as_str()
                .ok_or_else(|| Error::Config("index_set must be a string".into()))?
                .parse()
                .map_err(|e: Error| Error::Config(e.to_string()))?,
        ),
        None => None,
    };
    let weights = || -> Result<WeightRule<S>> {
        WeightRule::from_json(obj.get("weights").ok_or_else(|| Error::Config("operator needs `weights`".into()))?)
    };
    let require = |expected: IndexSet| -> Result<()> {
        match index_set {
            Some(i) if i != expected => Err(Error::Config(format!("{shape} requires index set {}", expected.tag()))),
            _ => Ok(()),
        }
    };
    let op = match shape {
        "unilateral-backward" => {
            reject_unknown(obj, &["shape", "index_set", "weights"], "operator")?;
            require(IndexSet::Naturals)?;
            ShiftOperator::unilateral_backward(weights()?)
        }
        "bilateral-backward" => {
            reject_unknown(obj, &["shape", "index_set", "weights"], "operator")?;
            require(IndexSet::Integers)?;
            ShiftOperator::bilateral_backward(weights()?)
        }
        "bilateral-forward" => {
            reject_unknown(obj, &["shape", "index_set", "weights"], "operator")?;
            require(IndexSet::Integers)?;
            ShiftOperator::bilateral_forward(weights()?)
        }
        "diagonal" => {
            reject_unknown(obj, &["shape", "index_set", "weights"], "operator")?;
            ShiftOperator::diagonal(index_set.unwrap_or(IndexSet::Integers), weights()?)
        }
        "block-direct-sum" => {
            reject_unknown(obj, &["shape", "index_set", "blocks"], "operator")?;
            let raw = obj
                .get("blocks")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Config("block-direct-sum needs a `blocks` array".into()))?;
            let mut blocks = Vec::with_capacity(raw.len());
            for b in raw {
                let bo = b.as_object().ok_or_else(|| Error::Config("block must be an object".into()))?;
                reject_unknown(bo, &["band", "shape", "weights"], "block")?;
                let motion = match bo.get("shape").and_then(Value::as_str) {
                    Some("backward") => Motion::Backward,
                    Some("forward") => Motion::Forward,
                    Some("diagonal") => Motion::Diagonal,
                    other => return Err(Error::Config(format!("unknown block shape {other:?}"))),
                };
                let band = parse_band(bo.get("band").ok_or_else(|| Error::Config("block needs `band`".into()))?)?;
                let weights = WeightRule::from_json(
                    bo.get("weights").ok_or_else(|| Error::Config("block needs `weights`".into()))?,
                )?;
                blocks.push(Block { band, motion, weights });
            }
            ShiftOperator::block_sum(index_set.unwrap_or(IndexSet::Integers), blocks)
        }
        other => return Err(Error::Config(format!("unknown operator shape `{other}`"))),
    };
    op.map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })
}
