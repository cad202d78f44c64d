//! Experiment configuration: JSON file merged under command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mapflow::{IntegratorConfig, Params, Qp4Normalization};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_steps: Option<usize>,
    /// Fixed-step RK4 instead of Dormand-Prince.
    pub rk4_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub x0: Option<Vec<f64>>,
    /// 1-based.
    pub time_index: Option<usize>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub normalization: Option<Qp4Normalization>,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    pub grid: Option<Vec<String>>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn map_id(&self) -> Result<&str, CliError> {
        self.map.as_deref().ok_or_else(|| CliError::Usage("no map given (use --map or the config file)".into()))
    }

    pub fn params(&self) -> Params {
        self.params.clone()
    }

    /// 0-based time index, if one was given.
    pub fn time_index0(&self) -> Result<Option<usize>, CliError> {
        match self.time_index {
            Some(0) => Err(CliError::Usage("--time-index is 1-based".into())),
            Some(t) => Ok(Some(t - 1)),
            None => Ok(None),
        }
    }

    pub fn span(&self) -> Result<(f64, f64), CliError> {
        match (self.t0, self.t1) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(CliError::Usage("both --t0 and --t1 are required".into())),
        }
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let s = &self.integrator;
        let mut cfg = match s.rk4_step {
            Some(h) => IntegratorConfig::rk4(h),
            None => {
                let d = IntegratorConfig::default();
                let (rt, at) = match d.method {
                    mapflow::Method::DormandPrince { rel_tol, abs_tol } => (rel_tol, abs_tol),
                    mapflow::Method::Rk4 { .. } => unreachable!("default is adaptive"),
                };
                IntegratorConfig::dormand_prince(s.rtol.unwrap_or(rt), s.atol.unwrap_or(at))
            }
        };
        if let Some(n) = s.max_steps {
            cfg.max_steps = n;
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

/// Parses `key=value` with a numeric value.
pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("parameter `{k}` needs a number, got `{v}`"))?;
    Ok((k.trim().to_string(), v))
}

/// Comma-separated coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl std::str::FromStr for Point {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad coordinate `{p}`")))
            .collect::<Result<_, _>>()
            .map(Point)
    }
}
