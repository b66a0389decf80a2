use std::fs;
use std::path::{Path, PathBuf};

use dephaser_core::{
    BathParams, DephasingEvaluator, Engine, EngineKind, Scenario, SearchMode, SeriesTail, SpectralDensity,
    SystemParams, TabulatedDensity,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub t_max: f64,
    /// samples along one time axis
    pub points: usize,
    /// samples per axis of two-time grids
    pub grid_points: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            t_max: 10.0,
            points: 1000,
            grid_points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Everything a command needs. Resolved from defaults, then an optional
/// JSON file, then command-line flags, each overriding the previous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub bath: BathParams,
    pub system: SystemParams,
    pub engine: EngineKind,
    /// Matsubara remainder handling of the analytic engine
    pub tail: SeriesTail,
    /// CSV of `omega,J` samples; replaces the Brownian density in the quadrature engines
    pub spectral_table: Option<PathBuf>,
    pub scenario: Scenario,
    pub search: SearchMode,
    pub window: WindowConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bath: BathParams::figure(),
            system: SystemParams::default(),
            engine: EngineKind::Analytic,
            tail: SeriesTail::Truncated,
            spectral_table: None,
            scenario: Scenario::SingleTime,
            search: SearchMode::AnalyticPair,
            window: WindowConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.bath.validate()?;
        if !self.system.epsilon.is_finite() {
            return Err(CliError::Config(format!("epsilon must be finite, got {}", self.system.epsilon)));
        }
        let w = &self.window;
        if !(w.t_max > 0.0 && w.t_max.is_finite()) {
            return Err(CliError::Config(format!("t_max must be positive and finite, got {}", w.t_max)));
        }
        if w.points < 2 || w.grid_points < 2 {
            return Err(CliError::Config(format!(
                "grids need at least 2 points, got points = {}, grid_points = {}",
                w.points, w.grid_points
            )));
        }
        if let Scenario::Prepared { t1 } = self.scenario {
            if !(t1 >= 0.0 && t1.is_finite()) {
                return Err(CliError::Config(format!("t1 must be non-negative and finite, got {t1}")));
            }
        }
        if self.spectral_table.is_some() && matches!(self.engine, EngineKind::Analytic | EngineKind::Hight) {
            return Err(CliError::Config(
                "a tabulated spectral density needs a quadrature engine (freq-quad or time-quad); \
                 the analytic and hight engines describe the Brownian density only"
                    .into(),
            ));
        }
        Ok(())
    }

    pub fn evaluator(&self) -> Result<DephasingEvaluator, CliError> {
        self.validate()?;
        let sd = match &self.spectral_table {
            Some(path) => SpectralDensity::Tabulated(read_table(path)?),
            None => self.bath.spectral_density(),
        };
        let beta = self.bath.beta;
        let engine = match self.engine {
            EngineKind::Analytic => Engine::AnalyticBrownian {
                params: self.bath,
                tail: self.tail,
            },
            EngineKind::Hight => Engine::HighTemperature(self.bath),
            EngineKind::FreqQuad => Engine::FrequencyQuadrature { sd, beta },
            EngineKind::TimeQuad => Engine::TimeDoubleQuadrature { sd, beta },
        };
        Ok(DephasingEvaluator::new(engine)?)
    }
}

/// Reads `omega,J` rows; a non-numeric first line is taken as a header.
pub fn read_table(path: &Path) -> Result<TabulatedDensity, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (mut omega, mut values) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [w, j] => w.parse::<f64>().ok().zip(j.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((w, j)) => {
                omega.push(w);
                values.push(j);
            }
            None if omega.is_empty() && i == 0 => continue,
            None => {
                return Err(CliError::Config(format!(
                    "{}:{}: expected two numbers `omega,J`, got `{line}`",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(TabulatedDensity::new(omega, values)?)
}
