//! Run configuration: flags over an optional JSON file over defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bergman_core::weights::parse_weight;
use bergman_core::{Precision, WeightSpecF64};
use clap::ValueEnum;
use serde::Deserialize;

pub const OUTPUT_DIR_ENV: &str = "BERGMAN_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Every field optional; the same shape is accepted from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub weight: Option<String>,
    pub alpha: Option<f64>,
    pub n_max: Option<usize>,
    pub radial: Option<usize>,
    pub angular: Option<usize>,
    pub p: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub precision: Option<Precision>,
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `self` win over `other`.
    pub fn or(self, other: Self) -> Self {
        Self {
            weight: self.weight.or(other.weight),
            alpha: self.alpha.or(other.alpha),
            n_max: self.n_max.or(other.n_max),
            radial: self.radial.or(other.radial),
            angular: self.angular.or(other.angular),
            p: self.p.or(other.p),
            tol: self.tol.or(other.tol),
            format: self.format.or(other.format),
            output: self.output.or(other.output),
            precision: self.precision.or(other.precision),
        }
    }
}

/// Per-subcommand defaults for the fields that differ between commands.
#[derive(Debug, Clone)]
pub struct Defaults {
    pub n_max: usize,
    pub p: Vec<f64>,
    pub tol: f64,
    pub format: Format,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub weight: WeightSpecF64,
    pub n_max: usize,
    pub radial: usize,
    pub angular: usize,
    pub p: Vec<f64>,
    pub tol: f64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub precision: Precision,
}

pub const DEFAULT_WEIGHT: &str = "alpha=0;M=one";

impl RunConfig {
    pub fn resolve(partial: PartialConfig, defaults: Defaults) -> Result<Self> {
        let text = partial.weight.unwrap_or_else(|| DEFAULT_WEIGHT.to_string());
        let text = match partial.alpha {
            Some(a) => with_alpha(&text, a)?,
            None => text,
        };
        let weight = parse_weight(&text)?;
        let cfg = Self {
            weight,
            n_max: partial.n_max.unwrap_or(defaults.n_max),
            radial: partial.radial.unwrap_or(bergman_core::funcspace::DEFAULT_RADIAL),
            angular: partial.angular.unwrap_or(bergman_core::funcspace::DEFAULT_ANGULAR),
            p: partial.p.unwrap_or(defaults.p),
            tol: partial.tol.unwrap_or(defaults.tol),
            format: partial.format.unwrap_or(defaults.format),
            output: partial.output,
            precision: partial.precision.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.radial < 8 {
            bail!("radial node count must be at least 8, got {}", self.radial);
        }
        if self.angular < 4 || !self.angular.is_power_of_two() {
            bail!("angular node count must be a power of two >= 4, got {}", self.angular);
        }
        if self.n_max < 1 {
            bail!("n-max must be at least 1");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            bail!("tolerance must be positive and finite, got {}", self.tol);
        }
        if self.p.is_empty() {
            bail!("need at least one exponent p");
        }
        for &p in &self.p {
            if !(p > 1.0 && p.is_finite()) {
                bail!("exponent p = {p} must lie in (1, inf)");
            }
        }
        Ok(())
    }
}

/// Replaces the `alpha=` field of a weight spec.
fn with_alpha(spec: &str, alpha: f64) -> Result<String> {
    let m = spec
        .split(';')
        .find_map(|part| part.strip_prefix("M="))
        .with_context(|| format!("weight spec `{spec}` has no M= field"))?;
    Ok(format!("alpha={alpha};M={m}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> Defaults {
        Defaults {
            n_max: 10,
            p: vec![2.0],
            tol: 1e-12,
            format: Format::Csv,
        }
    }

    #[test]
    fn flags_win_over_file() {
        let flags = PartialConfig {
            n_max: Some(5),
            ..Default::default()
        };
        let file: PartialConfig = serde_json::from_str(r#"{"n_max": 7, "tol": 1e-3, "weight": "alpha=1;M=one"}"#).unwrap();
        let cfg = RunConfig::resolve(flags.or(file), defaults()).unwrap();
        assert_eq!(cfg.n_max, 5);
        assert_eq!(cfg.tol, 1e-3);
        assert_eq!(cfg.weight.label(), "alpha=1;M=one");
        assert_eq!(cfg.radial, 256);
    }

    #[test]
    fn alpha_override() {
        let flags = PartialConfig {
            weight: Some("alpha=0;M=poly-r2:2,-1".into()),
            alpha: Some(1.5),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(flags, defaults()).unwrap();
        assert_eq!(cfg.weight.alpha(), 1.5);
    }

    #[test]
    fn rejects_bad_configuration() {
        for bad in [
            PartialConfig { radial: Some(4), ..Default::default() },
            PartialConfig { angular: Some(12), ..Default::default() },
            PartialConfig { tol: Some(0.0), ..Default::default() },
            PartialConfig { p: Some(vec![1.0]), ..Default::default() },
            PartialConfig { weight: Some("alpha=-1;M=one".into()), ..Default::default() },
        ] {
            assert!(RunConfig::resolve(bad, defaults()).is_err());
        }
        assert!(serde_json::from_str::<PartialConfig>(r#"{"nmax": 3}"#).is_err());
    }
}
