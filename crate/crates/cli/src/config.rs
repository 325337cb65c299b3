//! Experiment manifests and flag merging.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bellcheck_core::report::{RunSpec, QUANTUM_MODEL};
use bellcheck_core::{zoo, AnglePair, Schedule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: String,
    pub n_per_series: usize,
    pub seed: u64,
    pub angles: Option<AnglePair>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub schedule: Schedule,
}

/// The manifest file: every key optional, flags fill in or override.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<String>,
    #[serde(alias = "n")]
    pub n_per_series: Option<usize>,
    pub seed: Option<u64>,
    pub angles: Option<AnglePair>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub schedule: Option<Schedule>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    /// Layers `flags` over `self` and checks the result.
    pub fn merge(self, flags: ConfigFile) -> Result<ExperimentConfig, ConfigError> {
        let model = flags
            .model
            .or(self.model)
            .ok_or_else(|| ConfigError("no model given".into()))?;
        if model != QUANTUM_MODEL && !zoo::MODEL_NAMES.contains(&model.as_str()) {
            return Err(ConfigError(format!(
                "unknown model `{model}` (expected {QUANTUM_MODEL} or one of {})",
                zoo::MODEL_NAMES.join(", ")
            )));
        }
        let n_per_series = flags.n_per_series.or(self.n_per_series).unwrap_or(10_000);
        if n_per_series == 0 {
            return Err(ConfigError("n_per_series must be at least 1".into()));
        }
        Ok(ExperimentConfig {
            model,
            n_per_series,
            seed: flags.seed.or(self.seed).unwrap_or(0),
            angles: flags.angles.or(self.angles),
            output: flags.output.or(self.output),
            format: flags.format.or(self.format).unwrap_or_default(),
            schedule: flags.schedule.or(self.schedule).unwrap_or_default(),
        })
    }
}

impl ExperimentConfig {
    pub fn run_spec(&self, threads: Option<usize>) -> RunSpec {
        RunSpec {
            model: self.model.clone(),
            n_per_series: self.n_per_series,
            seed: self.seed,
            angles: self.angles,
            schedule: self.schedule,
            threads,
        }
    }
}

/// A real number, optionally written as a multiple of pi: `0.5`, `pi/4`,
/// `3pi/4`, `-pi`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| format!("bad angle `{t}`"));
    };
    let coeff = match &t[..at] {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c
            .trim_end_matches('*')
            .parse::<f64>()
            .map_err(|_| format!("bad angle `{t}`"))?,
    };
    let rest = &t[at + 2..];
    let denom = match rest.strip_prefix('/') {
        None if rest.is_empty() => 1.0,
        Some(d) => d.parse::<f64>().map_err(|_| format!("bad angle `{t}`"))?,
        None => return Err(format!("bad angle `{t}`")),
    };
    Ok(coeff * std::f64::consts::PI / denom)
}

/// `a1,a2,b1,b2`.
pub fn parse_angles(text: &str) -> Result<AnglePair, String> {
    let parts = text
        .split(',')
        .map(parse_angle)
        .collect::<Result<Vec<_>, _>>()?;
    let [a1, a2, b1, b2] = parts[..] else {
        return Err(format!(
            "expected four comma-separated angles, got {}",
            parts.len()
        ));
    };
    AnglePair::new(a1, a2, b1, b2).map_err(|e| e.to_string())
}

/// Four comma-separated exact rationals such as `1/2,0,-3/8,1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalQuad(pub [bellcheck_core::Rational; 4]);

impl FromStr for RationalQuad {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split(',')
            .map(|p| {
                bellcheck_core::scalar::parse_rational(p)
                    .ok_or_else(|| format!("bad number `{}`", p.trim()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let n = parts.len();
        parts
            .try_into()
            .map(RationalQuad)
            .map_err(|_| format!("expected four comma-separated values, got {n}"))
    }
}
