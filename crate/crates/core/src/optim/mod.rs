//! Update rules and their configuration.
//!
//! Every method minimizes. The curvature-normalized line searches divide by
//! `|vᵀHv|`; the hyperplane solve keeps the signed subspace Hessian.

mod linalg;
mod scheduler;
mod steps;

pub use linalg::{inf_norm, lu_solve, solve_with_jitter, JitterPolicy, Solved};
pub use scheduler::{Scheduler, SchedulerConfig};
pub use steps::{
    fgd_step, fgd_update, fomoh_bp_step, fomoh_kd_step, fomoh_kd_update, fomoh_step, fomoh_update, newton_step,
    sample_tangents, sgd_step, CURV_FLOOR,
};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::objective::Objective;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "fgd")]
    Fgd,
    #[serde(rename = "fomoh")]
    Fomoh,
    #[serde(rename = "fomoh-bp")]
    FomohBp,
    #[serde(rename = "fomoh-kd")]
    FomohKd,
    #[serde(rename = "sgd")]
    Sgd,
    #[serde(rename = "newton")]
    Newton,
    /// Minibatch backpropagation baseline; same update as SGD.
    #[serde(rename = "bp")]
    Bp,
}

impl Method {
    pub const ALL: [Method; 7] =
        [Method::Fgd, Method::Fomoh, Method::FomohBp, Method::FomohKd, Method::Sgd, Method::Newton, Method::Bp];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Fgd => "fgd",
            Method::Fomoh => "fomoh",
            Method::FomohBp => "fomoh-bp",
            Method::FomohKd => "fomoh-kd",
            Method::Sgd => "sgd",
            Method::Newton => "newton",
            Method::Bp => "bp",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Method::Fgd | Method::Fomoh | Method::FomohKd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    pub eta: f64,
    /// Hyperplane dimension, FoMoH-KD only.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub jitter: JitterPolicy,
    #[serde(default = "default_floor")]
    pub curv_floor: f64,
    #[serde(default)]
    pub scheduler: Option<SchedulerConfig>,
    #[serde(default)]
    pub seed: u64,
}

fn default_k() -> usize {
    2
}

fn default_floor() -> f64 {
    CURV_FLOOR
}

impl OptimizerConfig {
    pub fn new(method: Method, eta: f64) -> Self {
        OptimizerConfig {
            method,
            eta,
            k: default_k(),
            jitter: JitterPolicy::default(),
            curv_floor: CURV_FLOOR,
            scheduler: None,
            seed: 0,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_scheduler(mut self, scheduler: SchedulerConfig) -> Self {
        self.scheduler = Some(scheduler);
        self
    }

    /// Short label used in output files, e.g. `fomoh-2d`.
    pub fn label(&self) -> String {
        match self.method {
            Method::FomohKd => format!("fomoh-{}d", self.k),
            m => m.name().to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if self.method == Method::FomohKd && self.k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if self.curv_floor.is_nan() || self.curv_floor <= 0.0 {
            return Err(Error::Config(format!("curv_floor must be positive, got {}", self.curv_floor)));
        }
        self.jitter.validate()?;
        if let Some(s) = &self.scheduler {
            s.validate()?;
        }
        Ok(())
    }
}

/// Diagnostics from one update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub loss_before: f64,
    /// `‖θ' − θ‖`
    pub direction_norm: f64,
    /// Subspace coefficients; for the line searches, the signed step length
    /// along the tangent.
    pub kappa: Vec<f64>,
    pub jitter_used: f64,
    pub retries: u32,
    pub rejected: bool,
    pub converged: bool,
    /// A non-finite first evaluation forced a fresh tangent.
    pub resampled: bool,
}

/// One optimization trajectory: configuration, current learning rate,
/// tangent RNG stream and scheduler state.
#[derive(Debug, Clone)]
pub struct Optimizer {
    config: OptimizerConfig,
    eta: f64,
    rng: ChaCha8Rng,
    scheduler: Option<Scheduler>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        config.validate()?;
        let scheduler = config.scheduler.map(Scheduler::new).transpose()?;
        Ok(Optimizer { eta: config.eta, rng: ChaCha8Rng::seed_from_u64(config.seed), scheduler, config })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Apply one update to `theta` in place.
    pub fn step(&mut self, f: &dyn Objective, theta: &mut Vec<f64>) -> Result<StepReport> {
        let c = &self.config;
        let eta = self.eta;
        let (next, report) = match c.method {
            Method::Fgd => fgd_step(f, theta, eta, &mut self.rng)?,
            Method::Fomoh => fomoh_step(f, theta, eta, c.curv_floor, &mut self.rng)?,
            Method::FomohBp => fomoh_bp_step(f, theta, eta, c.curv_floor)?,
            Method::FomohKd => fomoh_kd_step(f, theta, eta, c.k, &c.jitter, &mut self.rng)?,
            Method::Newton => newton_step(f, theta, eta, &c.jitter)?,
            Method::Sgd | Method::Bp => sgd_step(f, theta, eta)?,
        };
        *theta = next;
        Ok(report)
    }

    /// Advance the scheduler after `epoch` (1-based); returns the new rate.
    pub fn end_epoch(&mut self, epoch: usize, metric: f64) -> f64 {
        if let Some(s) = &mut self.scheduler {
            self.eta = s.step(self.eta, epoch, metric);
        }
        self.eta
    }
}
