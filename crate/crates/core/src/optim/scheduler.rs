//! Learning-rate schedules applied at epoch boundaries.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchedulerConfig {
    /// Multiply by `factor` every `period` epochs.
    StepDecay { factor: f64, period: usize },
    /// Multiply by `factor` once the metric has failed to improve on its
    /// best value for `patience` consecutive epochs.
    Plateau {
        factor: f64,
        #[serde(default = "one")]
        patience: usize,
    },
}

fn one() -> usize {
    1
}

impl SchedulerConfig {
    pub fn factor(&self) -> f64 {
        match *self {
            SchedulerConfig::StepDecay { factor, .. } | SchedulerConfig::Plateau { factor, .. } => factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.factor();
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!("scheduler factor must lie in (0, 1), got {f}")));
        }
        match *self {
            SchedulerConfig::StepDecay { period: 0, .. } => {
                Err(Error::Config("step_decay period must be at least 1".into()))
            }
            SchedulerConfig::Plateau { patience: 0, .. } => {
                Err(Error::Config("plateau patience must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scheduler {
    config: SchedulerConfig,
    best: f64,
    bad_epochs: usize,
}

impl Scheduler {
    pub fn new(config: SchedulerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Scheduler { config, best: f64::INFINITY, bad_epochs: 0 })
    }

    /// Learning rate after finishing `epoch` (1-based) with the given metric.
    pub fn step(&mut self, eta: f64, epoch: usize, metric: f64) -> f64 {
        match self.config {
            SchedulerConfig::StepDecay { factor, period } => {
                if epoch > 0 && epoch.is_multiple_of(period) {
                    eta * factor
                } else {
                    eta
                }
            }
            SchedulerConfig::Plateau { factor, patience } => {
                if metric < self.best {
                    self.best = metric;
                    self.bad_epochs = 0;
                    return eta;
                }
                self.bad_epochs += 1;
                if self.bad_epochs >= patience {
                    self.bad_epochs = 0;
                    eta * factor
                } else {
                    eta
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_decay_divides_by_ten_at_period() {
        let mut s = Scheduler::new(SchedulerConfig::StepDecay { factor: 0.1, period: 1000 }).unwrap();
        let mut eta = 1.0;
        for epoch in 1..1000 {
            eta = s.step(eta, epoch, 0.0);
        }
        assert_eq!(eta, 1.0);
        eta = s.step(eta, 1000, 0.0);
        assert!((eta - 0.1).abs() < 1e-15);
    }

    #[test]
    fn plateau_keeps_rate_while_improving() {
        let mut s = Scheduler::new(SchedulerConfig::Plateau { factor: 0.1, patience: 1 }).unwrap();
        let mut eta = 0.5;
        for (epoch, m) in [3.0, 2.0, 1.5, 1.0].into_iter().enumerate() {
            eta = s.step(eta, epoch + 1, m);
        }
        assert_eq!(eta, 0.5);
    }

    #[test]
    fn plateau_decays_on_first_increase() {
        let mut s = Scheduler::new(SchedulerConfig::Plateau { factor: 0.8, patience: 1 }).unwrap();
        let eta = s.step(1.0, 1, 0.5);
        let eta = s.step(eta, 2, 0.6);
        assert_eq!(eta, 0.8);
    }

    #[test]
    fn rejects_bad_factor() {
        assert!(SchedulerConfig::StepDecay { factor: 1.0, period: 1 }.validate().is_err());
        assert!(SchedulerConfig::Plateau { factor: 0.0, patience: 1 }.validate().is_err());
    }
}
