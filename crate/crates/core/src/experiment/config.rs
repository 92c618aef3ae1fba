//! Flat `key = value` sweep configuration; repeated grid keys extend the grid.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{invalid, GsbmError, Result};
use crate::generator::ModelParams;
use crate::prob::Prob;

/// Keys whose values accumulate into a grid.
pub const GRID_KEYS: [&str; 5] = ["lambda", "a", "b", "d", "n"];
/// Keys taking a single value.
pub const SCALAR_KEYS: [&str; 7] = ["trials", "seed", "chi", "delta", "estimator", "out", "timing"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    TwoPhase,
    Genie,
    Phase1Only,
}

impl FromStr for Estimator {
    type Err = GsbmError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "two-phase" => Ok(Estimator::TwoPhase),
            "genie" => Ok(Estimator::Genie),
            "phase1-only" => Ok(Estimator::Phase1Only),
            other => invalid(format!("unknown estimator {other:?} (two-phase, genie, phase1-only)")),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::TwoPhase => "two-phase",
            Estimator::Genie => "genie",
            Estimator::Phase1Only => "phase1-only",
        })
    }
}

/// How the block volume factor is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChiChoice {
    /// Solver value, or the practical value when the solver has none.
    Theory,
    Practical,
    Fixed(f64),
}

impl FromStr for ChiChoice {
    type Err = GsbmError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "theory" => Ok(ChiChoice::Theory),
            "practical" => Ok(ChiChoice::Practical),
            other => match other.parse::<f64>() {
                Ok(x) if x.is_finite() && x > 0.0 => Ok(ChiChoice::Fixed(x)),
                _ => invalid(format!("chi must be theory, practical or a positive number, got {other:?}")),
            },
        }
    }
}

/// One grid point with the algorithm settings applied to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPoint {
    pub params: ModelParams,
    pub chi: ChiChoice,
    pub delta: Option<f64>,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub a_values: Vec<Prob>,
    pub b_values: Vec<Prob>,
    pub dims: Vec<usize>,
    pub ns: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub chi: ChiChoice,
    pub delta: Option<f64>,
    pub estimator: Estimator,
    pub out: Option<PathBuf>,
    /// Wall-clock columns are zero unless set, keeping output byte-stable.
    pub record_timing: bool,
}

impl SweepConfig {
    /// Grid points ordered by lambda, then a, b, d, n (last varies fastest).
    pub fn points(&self) -> Result<Vec<TrialPoint>> {
        let mut out = Vec::new();
        for &lambda in &self.lambdas {
            for &a in &self.a_values {
                for &b in &self.b_values {
                    for &d in &self.dims {
                        for &n in &self.ns {
                            out.push(TrialPoint {
                                params: ModelParams::new(lambda, n, a, b, d)?,
                                chi: self.chi,
                                delta: self.delta,
                                estimator: self.estimator,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Raw key/value settings; later sources override earlier ones key by key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Vec<String>>,
}

fn split_list(value: &str) -> impl Iterator<Item = String> + '_ {
    value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty())
}

impl RawConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| GsbmError::Parse { line: idx + 1, msg };
            let (key, value) =
                line.split_once('=').ok_or_else(|| parse_err(format!("expected key = value, got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            if GRID_KEYS.contains(&key) {
                raw.entries.entry(key.to_string()).or_default().extend(split_list(value));
            } else if SCALAR_KEYS.contains(&key) {
                if raw.entries.contains_key(key) {
                    return Err(parse_err(format!("{key} may appear only once")));
                }
                raw.entries.insert(key.to_string(), vec![value.to_string()]);
            } else {
                return Err(parse_err(format!("unknown key {key:?}")));
            }
        }
        Ok(raw)
    }

    /// Replaces every value of `key`; grid keys accept comma lists.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let values: Vec<String> = if GRID_KEYS.contains(&key) {
            split_list(value).collect()
        } else if SCALAR_KEYS.contains(&key) {
            vec![value.trim().to_string()]
        } else {
            return invalid(format!("unknown key {key:?}"));
        };
        if values.is_empty() {
            return invalid(format!("{key} needs a value"));
        }
        self.entries.insert(key.to_string(), values);
        Ok(())
    }

    fn list<T: FromStr>(&self, key: &str, default: Option<&str>) -> Result<Vec<T>> {
        let values: Vec<String> = match (self.entries.get(key), default) {
            (Some(v), _) => v.clone(),
            (None, Some(d)) => vec![d.to_string()],
            (None, None) => return invalid(format!("missing required key {key}")),
        };
        values
            .iter()
            .map(|v| v.parse::<T>().map_err(|_| GsbmError::InvalidInput(format!("bad value {v:?} for {key}"))))
            .collect()
    }

    fn scalar<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => {
                v[0].parse().map(Some).map_err(|_| GsbmError::InvalidInput(format!("bad value {:?} for {key}", v[0])))
            }
        }
    }

    pub fn into_sweep(self) -> Result<SweepConfig> {
        let a_values: Vec<Prob> = self.list("a", None)?;
        let b_values: Vec<Prob> = self.list("b", None)?;
        let trials = self.scalar::<usize>("trials")?.unwrap_or(1);
        if trials == 0 {
            return invalid("trials must be at least 1");
        }
        let delta = self.scalar::<f64>("delta")?;
        if let Some(x) = delta {
            if !(x.is_finite() && x > 0.0) {
                return invalid(format!("delta must be positive, got {x}"));
            }
        }
        let estimator = match self.entries.get("estimator") {
            Some(v) => v[0].parse()?,
            None => Estimator::TwoPhase,
        };
        let chi = match self.entries.get("chi") {
            Some(v) => v[0].parse()?,
            None => ChiChoice::Theory,
        };
        let config = SweepConfig {
            lambdas: self.list("lambda", None)?,
            a_values,
            b_values,
            dims: self.list("d", Some("1"))?,
            ns: self.list("n", Some("10000"))?,
            trials,
            seed: self.scalar::<u64>("seed")?.unwrap_or(0),
            chi,
            delta,
            estimator,
            out: self.scalar::<PathBuf>("out")?,
            record_timing: self.scalar::<bool>("timing")?.unwrap_or(false),
        };
        config.points()?;
        Ok(config)
    }
}
