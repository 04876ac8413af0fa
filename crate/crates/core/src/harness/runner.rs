//! Training loops over MNIST-style data.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::models::{init_params, DatasetBatch, Network, Precision};
use crate::optim::{Optimizer, OptimizerConfig};
use crate::{Error, Result};

/// One row of the per-run CSV. Metrics that do not apply are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub iter: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub eta: f64,
    pub wall_ms: f64,
    /// Largest jitter used during the epoch.
    pub jitter: f64,
    /// Total jitter retries during the epoch.
    pub retries: u32,
}

/// Records of one optimizer across all seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub label: String,
    pub records: Vec<RunRecord>,
    /// Seeds stopped early, with the reason.
    pub aborted: Vec<(u64, String)>,
}

impl MethodRun {
    /// Last record of each seed that ran to completion.
    pub fn finals(&self) -> Vec<&RunRecord> {
        let mut out: Vec<&RunRecord> = Vec::new();
        for r in &self.records {
            if self.aborted.iter().any(|(s, _)| *s == r.seed) {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.seed == r.seed => *last = r,
                _ => out.push(r),
            }
        }
        out
    }
}

const EVAL_CHUNK: usize = 1000;

/// Mean loss and accuracy over a dataset, evaluated in fixed-size chunks.
pub fn evaluate(net: &Network, theta: &[f64], data: &DatasetBatch) -> Result<(f64, f64)> {
    let n = data.len();
    let (mut loss, mut acc) = (0.0, 0.0);
    for start in (0..n).step_by(EVAL_CHUNK) {
        let end = (start + EVAL_CHUNK).min(n);
        let rows: Vec<usize> = (start..end).collect();
        let chunk = if start == 0 && end == n { data.clone() } else { data.select(&rows)? };
        let w = (end - start) as f64;
        loss += w * net.loss(theta, &chunk)?;
        acc += w * net.accuracy(theta, &chunk)?;
    }
    Ok((loss / n as f64, acc / n as f64))
}

/// Everything one trajectory needs besides the optimizer.
#[derive(Debug, Clone, Copy)]
pub struct TrainSetup<'a> {
    pub net: &'a Network,
    pub train: &'a DatasetBatch,
    pub val: &'a DatasetBatch,
    pub epochs: usize,
    pub batch_size: usize,
    pub precision: Precision,
    pub record_wall_time: bool,
}

/// Outcome of a single seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<RunRecord>,
    pub theta: Vec<f64>,
    pub aborted: Option<String>,
}

/// Train one seed. Parameters, tangents and shuffles all derive from `seed`;
/// the shuffle stream is independent of the optimizer so every method sees
/// the same batches.
pub fn run_trajectory(setup: &TrainSetup<'_>, opt: &OptimizerConfig, seed: u64) -> Result<Trajectory> {
    let net = setup.net;
    if setup.batch_size == 0 {
        return Err(Error::Config("batch_size must be at least 1".into()));
    }
    let mut theta = init_params(net, seed);
    let mut optimizer = Optimizer::new(opt.clone().with_seed(seed))?;
    let mut shuffle = ChaCha8Rng::seed_from_u64(seed);
    shuffle.set_stream(1);

    let record = |iter: usize, theta: &[f64], eta: f64, wall_ms: f64, jitter: f64, retries: u32| -> Result<RunRecord> {
        let (train_loss, train_acc) = evaluate(net, theta, setup.train)?;
        let (val_loss, val_acc) = evaluate(net, theta, setup.val)?;
        Ok(RunRecord { seed, iter, train_loss, val_loss, train_acc, val_acc, eta, wall_ms, jitter, retries })
    };

    let mut records = vec![record(0, &theta, optimizer.eta(), 0.0, 0.0, 0)?];
    let mut order: Vec<usize> = (0..setup.train.len()).collect();
    for epoch in 1..=setup.epochs {
        let started = Instant::now();
        let eta = optimizer.eta();
        order.shuffle(&mut shuffle);
        let (mut steps, mut rejected, mut retries, mut jitter) = (0usize, 0usize, 0u32, 0.0f64);
        for rows in order.chunks(setup.batch_size) {
            let batch = setup.train.select(rows)?;
            let f = net.objective(&batch, setup.precision);
            let report = optimizer.step(&f, &mut theta)?;
            steps += 1;
            rejected += report.rejected as usize;
            retries += report.retries;
            jitter = jitter.max(report.jitter_used);
        }
        let wall_ms = if setup.record_wall_time { started.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        let rec = record(epoch, &theta, eta, wall_ms, jitter, retries)?;
        let val_loss = rec.val_loss;
        records.push(rec);
        if 2 * rejected > steps {
            let reason = format!("epoch {epoch}: {rejected} of {steps} steps rejected");
            return Ok(Trajectory { records, theta, aborted: Some(reason) });
        }
        optimizer.end_epoch(epoch, val_loss);
    }
    Ok(Trajectory { records, theta, aborted: None })
}

/// Run every configured optimizer over every seed. Seeds run in parallel;
/// results are returned in configuration and seed order.
pub fn run_experiment(cfg: &ExperimentConfig, train: &DatasetBatch, val: &DatasetBatch) -> Result<Vec<MethodRun>> {
    cfg.validate()?;
    let net = cfg.model.build()?;
    let train = match cfg.train_limit {
        Some(n) => train.head(n)?,
        None => train.clone(),
    };
    let val = match cfg.val_limit {
        Some(n) => val.head(n)?,
        None => val.clone(),
    };
    let base = TrainSetup {
        net: &net,
        train: &train,
        val: &val,
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        precision: cfg.precision,
        record_wall_time: cfg.record_wall_time,
    };
    cfg.optimizers
        .iter()
        .map(|spec| {
            let opt = &spec.optimizer;
            let setup = TrainSetup { batch_size: spec.batch_size.unwrap_or(cfg.batch_size), ..base };
            let runs =
                cfg.seeds.par_iter().map(|&seed| run_trajectory(&setup, opt, seed)).collect::<Result<Vec<_>>>()?;
            let mut out = MethodRun { label: opt.label(), records: Vec::new(), aborted: Vec::new() };
            for (t, &seed) in runs.into_iter().zip(&cfg.seeds) {
                out.records.extend(t.records);
                if let Some(reason) = t.aborted {
                    out.aborted.push((seed, reason));
                }
            }
            Ok(out)
        })
        .collect()
}
