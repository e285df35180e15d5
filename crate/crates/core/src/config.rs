//! Key-value experiment files.
//!
//! ```text
//! # comments start with '#'
//! experiment = spacing-mc
//! law.kind   = two_point
//! law.params = q=0.3
//! a          = 1.0
//! N          = 100, 200, 400
//! seed       = 42
//! trials     = 2000
//! output     = out/spacing
//! ```
//!
//! Missing keys take the defaults of [`ExperimentConfig::default`]; unknown
//! or repeated keys are rejected.

use crate::ensembles::{LawKind, WignerSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const KEYS: [&str; 8] = ["experiment", "law.kind", "law.params", "a", "N", "seed", "trials", "output"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub law: LawKind,
    pub a: f64,
    /// Matrix sizes, run in order.
    pub n_ladder: Vec<usize>,
    pub seed: u64,
    pub trials: usize,
    pub output: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            law: LawKind::Bernoulli,
            a: 1.0,
            n_ladder: vec![200],
            seed: 0,
            trials: 100,
            output: None,
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("invalid value '{value}' for key '{key}'"))
}

/// `k=v` pairs separated by commas or whitespace.
pub fn parse_params(s: &str) -> Result<Vec<(String, f64)>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| bad("law.params", p))?;
            let v: f64 = v.trim().parse().map_err(|_| bad("law.params", p))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

pub fn parse_usize_list(key: &str, s: &str) -> Result<Vec<usize>> {
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad(key, s))).collect()
}

pub fn parse_f64_list(key: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad(key, s))).collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key '{k}'", lineno + 1)));
            }
            if seen.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: key '{k}' given twice", lineno + 1)));
            }
        }
        let mut c = Self::default();
        let params = match seen.get("law.params") {
            Some(p) => parse_params(p)?,
            None => Vec::new(),
        };
        if let Some(kind) = seen.get("law.kind") {
            c.law = LawKind::parse(kind, &params)?;
        } else if !params.is_empty() {
            return Err(Error::Config("law.params given without law.kind".into()));
        }
        if let Some(v) = seen.get("a") {
            c.a = v.parse().map_err(|_| bad("a", v))?;
        }
        if let Some(v) = seen.get("N") {
            c.n_ladder = parse_usize_list("N", v)?;
        }
        if let Some(v) = seen.get("seed") {
            c.seed = v.parse().map_err(|_| bad("seed", v))?;
        }
        if let Some(v) = seen.get("trials") {
            c.trials = v.parse().map_err(|_| bad("trials", v))?;
        }
        c.experiment = seen.get("experiment").cloned();
        c.output = seen.get("output").cloned();
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return Err(Error::Config(format!("a must be finite and >= 0, got {}", self.a)));
        }
        if self.n_ladder.is_empty() || self.n_ladder.contains(&0) {
            return Err(Error::Config("N must list positive sizes".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        self.spec().map(|_| ())
    }

    pub fn spec(&self) -> Result<WignerSpec> {
        let s = WignerSpec::from_kind(self.law).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = "# x\nexperiment = spacing-mc\nlaw.kind = two_point\nlaw.params = q=0.3\na = 1.5 # inline\nN = 100, 200\nseed = 42\ntrials = 2000\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.law, LawKind::TwoPointAsymmetric { q: 0.3 });
        assert_eq!(c.a, 1.5);
        assert_eq!(c.n_ladder, vec![100, 200]);
        assert_eq!((c.seed, c.trials), (42, 2000));
        assert_eq!(c.experiment.as_deref(), Some("spacing-mc"));
    }

    #[test]
    fn defaults_when_empty() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn rejects_schema_violations() {
        for text in ["colour = red", "a = -1", "a = 1\na = 2", "N = 0", "trials = x", "law.kind = cauchy", "justtext", "law.params = q=0.2"] {
            assert!(matches!(ExperimentConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
