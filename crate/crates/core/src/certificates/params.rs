use num_rational::BigRational;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::operators::{operator_from_json, ShiftOperator};
use crate::scalar::{parse_real_json, Real, Scalar};
use crate::spaces::{IndexSet, SeqVector};

/// Certificate parameters: the defaults with overrides applied. Overrides
/// may only replace keys the defaults define.
#[derive(Debug, Clone)]
pub struct Params {
    name: String,
    values: Map<String, Value>,
}

impl Params {
    pub fn merged(name: &str, defaults: &Value, overrides: Option<&Value>) -> Result<Params> {
        let mut values = defaults
            .as_object()
            .cloned()
            .ok_or_else(|| Error::Config(format!("defaults for `{name}` must be an object")))?;
        match overrides {
            None | Some(Value::Null) => {}
            Some(Value::Object(over)) => {
                for (k, v) in over {
                    if !values.contains_key(k) {
                        return Err(Error::Config(format!("unknown parameter `{k}` for certificate `{name}`")));
                    }
                    values.insert(k.clone(), v.clone());
                }
            }
            Some(other) => return Err(Error::Config(format!("overrides for `{name}` must be an object, got {other}"))),
        }
        Ok(Params { name: name.to_string(), values })
    }

    fn get(&self, key: &str) -> Result<&Value> {
        self.values
            .get(key)
            .ok_or_else(|| Error::Config(format!("certificate `{}` has no parameter `{key}`", self.name)))
    }

    fn bad(&self, key: &str, what: &str) -> Error {
        Error::Config(format!("parameter `{key}` of `{}` must be {what}", self.name))
    }

    pub fn ratio(&self, key: &str) -> Result<BigRational> {
        parse_real_json(self.get(key)?).map_err(|e| Error::Config(format!("parameter `{key}`: {e}")))
    }

    pub fn real<R: Real>(&self, key: &str) -> Result<R> {
        Ok(R::from_ratio(&self.ratio(key)?))
    }

    pub fn positive<R: Real>(&self, key: &str) -> Result<R> {
        let r: R = self.real(key)?;
        if !r.is_positive() {
            return Err(self.bad(key, "positive"));
        }
        Ok(r)
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.get(key)?.as_u64().ok_or_else(|| self.bad(key, "a non-negative integer"))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.u64(key)? as usize)
    }

    pub fn i64(&self, key: &str) -> Result<i64> {
        self.get(key)?.as_i64().ok_or_else(|| self.bad(key, "an integer"))
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.get(key)?.as_str().ok_or_else(|| self.bad(key, "a string"))
    }

    pub fn u64_list(&self, key: &str) -> Result<Vec<u64>> {
        let arr = self.get(key)?.as_array().ok_or_else(|| self.bad(key, "an array"))?;
        arr.iter().map(|v| v.as_u64().ok_or_else(|| self.bad(key, "an array of integers"))).collect()
    }

    pub fn real_list<R: Real>(&self, key: &str) -> Result<Vec<R>> {
        let arr = self.get(key)?.as_array().ok_or_else(|| self.bad(key, "an array"))?;
        arr.iter()
            .map(|v| parse_real_json(v).map(|r| R::from_ratio(&r)).map_err(|e| Error::Config(format!("parameter `{key}`: {e}"))))
            .collect()
    }

    pub fn operator<S: Scalar>(&self, key: &str) -> Result<ShiftOperator<S>> {
        operator_from_json(self.get(key)?)
    }

    /// A vector written as terms (`"e0 + 1/2*e-3"`) or as vector JSON.
    pub fn vector<S: Scalar>(&self, key: &str, index_set: IndexSet) -> Result<SeqVector<S>> {
        let v = match self.get(key)? {
            Value::String(s) => SeqVector::parse_terms(index_set, s)?,
            other => SeqVector::from_json(other)?,
        };
        if v.index_set() != index_set {
            return Err(Error::Config(format!("parameter `{key}` lives on the wrong index set")));
        }
        Ok(v)
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.values.clone())
    }
}
