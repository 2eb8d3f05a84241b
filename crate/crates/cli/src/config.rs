//! The run configuration file and its command-line overrides.

use std::path::{Path, PathBuf};

use orbitscope::spaces::NormTag;
use orbitscope::{Error, NumericMode, Result};
use serde::Deserialize;
use serde_json::Value;

/// Contents of a `--config` JSON file. Every key is optional; unknown keys
/// are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Option<NumericMode>,
    pub seed: Option<u64>,
    /// Preset name or operator object.
    pub operator: Option<Value>,
    pub norm: Option<NormTag>,
    /// Orbit length scanned for coarse witnesses and the orbit branch of D.
    pub horizon: Option<u64>,
    pub k_cap: Option<u64>,
    pub budget: Option<u64>,
    /// Depth `m` of the `1/i` tolerance schedule.
    pub schedule_length: Option<usize>,
    pub out: Option<PathBuf>,
    /// Per-certificate parameter overrides.
    pub certificates: Option<Value>,
    /// Operator family for `explore`.
    pub family: Option<Value>,
    pub trials: Option<usize>,
}

/// A configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub mode: NumericMode,
    pub seed: u64,
    pub operator: Value,
    pub norm: NormTag,
    pub horizon: u64,
    pub k_cap: u64,
    pub budget: u64,
    pub schedule_length: usize,
    pub out: Option<PathBuf>,
    pub certificates: Value,
    pub family: Value,
    pub trials: usize,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve(self, seed: Option<u64>, mode: Option<NumericMode>, out: Option<PathBuf>) -> Result<Resolved> {
        let resolved = Resolved {
            mode: mode.or(self.mode).unwrap_or(NumericMode::Exact),
            seed: seed.or(self.seed).unwrap_or(0),
            operator: self.operator.unwrap_or_else(|| Value::String("paper-prop32".into())),
            norm: self.norm.unwrap_or(NormTag::PInf),
            horizon: self.horizon.unwrap_or(10_000),
            k_cap: self.k_cap.unwrap_or(10_000),
            budget: self.budget.unwrap_or(1_000_000),
            schedule_length: self.schedule_length.unwrap_or(5),
            out: out.or(self.out),
            certificates: self.certificates.unwrap_or_else(|| Value::Object(Default::default())),
            family: self.family.unwrap_or_else(|| Value::Object(Default::default())),
            trials: self.trials.unwrap_or(8),
        };
        if resolved.schedule_length == 0 {
            return Err(Error::Config("schedule_length must be at least 1".into()));
        }
        if resolved.k_cap == 0 {
            return Err(Error::Config("k_cap must be at least 1".into()));
        }
        orbitscope::operators::operator_from_json::<orbitscope::Exact>(&resolved.operator)?;
        Ok(resolved)
    }
}
