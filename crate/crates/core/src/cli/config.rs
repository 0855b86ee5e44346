//! Flat `section.key = value` experiment files.
//!
//! Blank lines and `#` comments are ignored. Every key must be known; values
//! are validated by building the underlying laws.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::distributions::{InterarrivalKind, RegVarLaw, SlowlyVarying, WeibullLaw};
use crate::error::{Error, Result};
use crate::forkjoin_sim::{ModelParams, DEFAULT_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Parse(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSection {
    pub alpha: f64,
    pub q: f64,
    pub beta: f64,
    #[serde(rename = "L")]
    pub slowly: SlowlyVarying,
    pub mu: f64,
    pub interarrival: InterarrivalKind,
    pub n: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSection {
    pub horizon: f64,
    pub grid_step: f64,
    pub replications: usize,
    pub seed: u64,
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub run: RunSection,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelSection {
                alpha: 0.8,
                q: 1.0,
                beta: 2.0,
                slowly: SlowlyVarying::Constant(1.0),
                mu: 1.0,
                interarrival: InterarrivalKind::Exponential,
                n: 256,
            },
            run: RunSection {
                horizon: 1.0,
                grid_step: 0.1,
                replications: 1000,
                seed: 0,
                budget: DEFAULT_BUDGET,
            },
            output: OutputSection {
                path: None,
                format: OutputFormat::Csv,
            },
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("bad value `{value}` for {key}")))
}

impl ExperimentConfig {
    /// Applies one `section.key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let m = &mut self.model;
        let r = &mut self.run;
        match key {
            "model.alpha" => m.alpha = parse(key, value)?,
            "model.q" => m.q = parse(key, value)?,
            "model.beta" => m.beta = parse(key, value)?,
            "model.L" => m.slowly = value.parse()?,
            "model.mu" => m.mu = parse(key, value)?,
            "model.interarrival" => m.interarrival = value.parse()?,
            "model.n" => m.n = parse(key, value)?,
            "run.horizon" => r.horizon = parse(key, value)?,
            "run.grid_step" => r.grid_step = parse(key, value)?,
            "run.replications" => r.replications = parse(key, value)?,
            "run.seed" => r.seed = parse(key, value)?,
            "run.budget" => r.budget = parse(key, value)?,
            "output.path" => self.output.path = Some(PathBuf::from(value)),
            "output.format" => self.output.format = value.parse()?,
            _ => return Err(Error::Parse(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Parses file contents on top of the defaults. Does not validate.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg = Self::parse_text(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes every key; floats use the shortest round-tripping form.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let r = &self.run;
        let mut s = String::new();
        let _ = writeln!(s, "model.alpha = {}", m.alpha);
        let _ = writeln!(s, "model.q = {}", m.q);
        let _ = writeln!(s, "model.beta = {}", m.beta);
        let _ = writeln!(s, "model.L = {}", m.slowly);
        let _ = writeln!(s, "model.mu = {}", m.mu);
        let _ = writeln!(s, "model.interarrival = {}", m.interarrival);
        let _ = writeln!(s, "model.n = {}", m.n);
        let _ = writeln!(s, "run.horizon = {}", r.horizon);
        let _ = writeln!(s, "run.grid_step = {}", r.grid_step);
        let _ = writeln!(s, "run.replications = {}", r.replications);
        let _ = writeln!(s, "run.seed = {}", r.seed);
        let _ = writeln!(s, "run.budget = {}", r.budget);
        if let Some(p) = &self.output.path {
            let _ = writeln!(s, "output.path = {}", p.display());
        }
        let _ = writeln!(s, "output.format = {}", self.output.format);
        s
    }

    pub fn weibull(&self) -> Result<WeibullLaw> {
        WeibullLaw::new(self.model.alpha, self.model.q)
    }

    pub fn regvar(&self) -> Result<RegVarLaw> {
        RegVarLaw::new(self.model.beta, self.model.slowly)
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        ModelParams::with_drift(self.weibull()?, self.regvar()?, m.interarrival, m.mu, m.n)
    }

    pub fn validate(&self) -> Result<()> {
        self.model_params()?;
        let r = &self.run;
        if r.replications == 0 {
            return Err(Error::invalid("run.replications must be > 0"));
        }
        if !(r.horizon.is_finite() && r.horizon > 0.0) {
            return Err(Error::invalid(format!("run.horizon must be > 0, got {}", r.horizon)));
        }
        if !(r.grid_step.is_finite() && r.grid_step > 0.0 && r.grid_step <= r.horizon) {
            return Err(Error::invalid(format!(
                "run.grid_step must lie in (0, horizon], got {}",
                r.grid_step
            )));
        }
        Ok(())
    }
}
