//! Experiment configuration files (TOML).
//!
//! ```toml
//! epochs = 50
//! batch_size = 512
//! seeds = [0, 1, 2, 3, 4]
//! data = "data/mnist-subset"
//! subset = true
//! precision = "f32"
//!
//! [model]
//! kind = "logistic_regression"
//!
//! [[optimizer]]
//! method = "fomoh-kd"
//! k = 2
//! eta = 0.04221
//! scheduler = { kind = "plateau", factor = 0.1 }
//! ```

use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::models::{self, Network, Precision};
use crate::optim::{Method, OptimizerConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    LogisticRegression,
    Mlp { sizes: Vec<usize> },
    CnnSmall,
}

impl ModelSpec {
    pub fn build(&self) -> Result<Network> {
        match self {
            ModelSpec::LogisticRegression => Ok(models::logistic_regression()),
            ModelSpec::Mlp { sizes } => models::mlp(sizes),
            ModelSpec::CnnSmall => Ok(models::cnn_small()),
        }
    }
}

/// An optimizer entry of an experiment, optionally with its own batch size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSpec {
    #[serde(flatten)]
    pub optimizer: OptimizerConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
}

// serde's flatten drops deny_unknown_fields, so split the table by hand.
impl<'de> Deserialize<'de> for MethodSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut table = toml::Table::deserialize(d)?;
        let batch_size = match table.remove("batch_size") {
            None => None,
            Some(v) => Some(v.try_into::<usize>().map_err(D::Error::custom)?),
        };
        let optimizer = table.try_into::<OptimizerConfig>().map_err(D::Error::custom)?;
        Ok(MethodSpec { optimizer, batch_size })
    }
}

impl From<OptimizerConfig> for MethodSpec {
    fn from(optimizer: OptimizerConfig) -> Self {
        MethodSpec { optimizer, batch_size: None }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(rename = "optimizer")]
    pub optimizers: Vec<MethodSpec>,
    pub epochs: usize,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub precision: Precision,
    /// Keep the first 10k training and 2k validation rows.
    #[serde(default)]
    pub subset: bool,
    /// Further cap on training rows, for smoke runs.
    #[serde(default)]
    pub train_limit: Option<usize>,
    #[serde(default)]
    pub val_limit: Option<usize>,
    /// When false, `wall_ms` is written as 0 so outputs are byte-stable.
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.optimizers.is_empty() {
            return Err(Error::Config("no optimizer configured".into()));
        }
        let net = self.model.build()?;
        for spec in &self.optimizers {
            let o = &spec.optimizer;
            o.validate()?;
            if spec.batch_size == Some(0) {
                return Err(Error::Config(format!("{}: batch_size must be at least 1", o.label())));
            }
            if o.method == Method::FomohKd && o.k > net.dim() {
                return Err(Error::Config(format!("K={} exceeds parameter count {}", o.k, net.dim())));
            }
        }
        if let Some(d) = &self.data {
            if !d.is_dir() {
                return Err(Error::Config(format!("data directory {} does not exist", d.display())));
            }
        }
        Ok(())
    }
}

/// Rosenbrock benchmark settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosenbrockConfig {
    pub dim: usize,
    pub iterations: usize,
    #[serde(default = "default_starts")]
    pub n_seeds: usize,
    /// Seed of the stream that draws the shared starting points.
    #[serde(default)]
    pub start_seed: u64,
    /// Stop a run once `‖θ' − θ‖` falls below this; the remaining
    /// iterations repeat the final value.
    #[serde(default)]
    pub step_tol: Option<f64>,
    #[serde(rename = "optimizer")]
    pub optimizers: Vec<OptimizerConfig>,
}

fn default_starts() -> usize {
    10
}

impl RosenbrockConfig {
    /// The standard comparison at the given dimension: FGD, FoMoH,
    /// FoMoH-BP and FoMoH-KD for every K in `2..=dim`, plus Newton.
    pub fn standard(dim: usize, iterations: usize, fgd_eta: f64) -> Self {
        let mut optimizers = vec![
            OptimizerConfig::new(Method::Fgd, fgd_eta),
            OptimizerConfig::new(Method::Fomoh, 1.0),
            OptimizerConfig::new(Method::FomohBp, 1.0),
        ];
        optimizers.extend((2..=dim).map(|k| OptimizerConfig::new(Method::FomohKd, 1.0).with_k(k)));
        optimizers.push(OptimizerConfig::new(Method::Newton, 1.0));
        RosenbrockConfig { dim, iterations, n_seeds: 10, start_seed: 0, step_tol: Some(1e-12), optimizers }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RosenbrockConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Config(format!("Rosenbrock needs dim ≥ 2, got {}", self.dim)));
        }
        if self.n_seeds == 0 {
            return Err(Error::Config("n_seeds must be at least 1".into()));
        }
        for o in &self.optimizers {
            o.validate()?;
            if o.method == Method::FomohKd && o.k > self.dim {
                return Err(Error::Config(format!("K={} exceeds dimension {}", o.k, self.dim)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
epochs = 3
batch_size = 128
seeds = [0, 1]

[model]
kind = "logistic_regression"

[[optimizer]]
method = "fomoh-kd"
k = 2
eta = 0.04221
batch_size = 512
scheduler = { kind = "plateau", factor = 0.1 }

[[optimizer]]
method = "fgd"
eta = 6.497e-5
"#;

    #[test]
    fn parses_example() {
        let cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.optimizers.len(), 2);
        assert_eq!(cfg.optimizers[0].optimizer.label(), "fomoh-2d");
        assert_eq!(cfg.optimizers[0].batch_size, Some(512));
        assert_eq!(cfg.optimizers[1].batch_size, None);
        assert_eq!(cfg.precision, Precision::F64);
        assert!(cfg.record_wall_time);
    }

    #[test]
    fn rejects_unknown_optimizer_keys() {
        let text = EXAMPLE.replace("eta = 6.497e-5", "eta = 6.497e-5\nmomentum = 0.9");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn rejects_empty_seeds() {
        let text = EXAMPLE.replace("seeds = [0, 1]", "seeds = []");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = format!("bogus = 1\n{EXAMPLE}");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn rejects_missing_data_dir() {
        let text = EXAMPLE.replace("seeds = [0, 1]", "seeds = [0]\ndata = \"/nonexistent/mnist\"");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn rejects_bad_eta() {
        let text = EXAMPLE.replace("eta = 6.497e-5", "eta = -1.0");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
