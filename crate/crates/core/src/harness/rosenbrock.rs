//! Rosenbrock benchmark runs and the single-step study.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::RosenbrockConfig;
use super::runner::{MethodRun, RunRecord};
use crate::hyperdual::hessian_full;
use crate::models::rosenbrock;
use crate::objective::Objective;
use crate::optim::{
    fgd_step, fomoh_kd_step, fomoh_step, lu_solve, JitterPolicy, Optimizer, OptimizerConfig, CURV_FLOOR,
};
use crate::Result;

/// `n` starting points drawn uniformly from `[−2, 2]^dim`.
pub fn starting_points(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-2.0..=2.0)).collect()).collect()
}

/// `f` after each iteration of one run; `values[0]` is the starting loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub label: String,
    pub seed: u64,
    pub values: Vec<f64>,
    pub etas: Vec<f64>,
    pub jitter: Vec<f64>,
    pub retries: Vec<u32>,
}

impl Trace {
    /// First iteration whose value is below `tol`.
    pub fn iterations_to_reach(&self, tol: f64) -> Option<usize> {
        self.values.iter().position(|&v| v < tol)
    }

    fn into_records(self) -> Vec<RunRecord> {
        let seed = self.seed;
        (0..self.values.len())
            .map(|i| RunRecord {
                seed,
                iter: i,
                train_loss: self.values[i],
                val_loss: f64::NAN,
                train_acc: f64::NAN,
                val_acc: f64::NAN,
                eta: self.etas[i],
                wall_ms: 0.0,
                jitter: self.jitter[i],
                retries: self.retries[i],
            })
            .collect()
    }
}

/// Optimize `f` from `start` for `iterations` steps.
pub fn run_trace(
    f: &dyn Objective,
    opt: &OptimizerConfig,
    start: &[f64],
    seed: u64,
    iterations: usize,
    step_tol: Option<f64>,
) -> Result<Trace> {
    let mut optimizer = Optimizer::new(opt.clone().with_seed(seed))?;
    let mut theta = start.to_vec();
    let mut t = Trace {
        label: opt.label(),
        seed,
        values: vec![f.value(&theta)?],
        etas: vec![optimizer.eta()],
        jitter: vec![0.0],
        retries: vec![0],
    };
    for _ in 0..iterations {
        let report = optimizer.step(f, &mut theta)?;
        t.values.push(f.value(&theta)?);
        t.etas.push(optimizer.eta());
        t.jitter.push(report.jitter_used);
        t.retries.push(report.retries);
        let stalled = !report.rejected && step_tol.is_some_and(|tol| report.direction_norm < tol);
        if stalled || report.converged {
            break;
        }
    }
    let last = *t.values.last().unwrap();
    let eta = optimizer.eta();
    while t.values.len() <= iterations {
        t.values.push(last);
        t.etas.push(eta);
        t.jitter.push(0.0);
        t.retries.push(0);
    }
    Ok(t)
}

/// Every configured method from the same shared starting points; seed `i`
/// starts from point `i` and also seeds that run's tangent stream.
pub fn run_rosenbrock_suite(cfg: &RosenbrockConfig) -> Result<Vec<Vec<Trace>>> {
    cfg.validate()?;
    let f = rosenbrock(cfg.dim)?;
    let starts = starting_points(cfg.dim, cfg.n_seeds, cfg.start_seed);
    cfg.optimizers
        .iter()
        .map(|opt| {
            starts
                .par_iter()
                .enumerate()
                .map(|(i, x0)| run_trace(&f, opt, x0, i as u64, cfg.iterations, cfg.step_tol))
                .collect()
        })
        .collect()
}

/// Per-iteration median across traces of equal length.
pub fn median_curve(traces: &[Trace]) -> Vec<f64> {
    let len = traces.iter().map(|t| t.values.len()).min().unwrap_or(0);
    (0..len).map(|i| median(traces.iter().map(|t| t.values[i]).collect())).collect()
}

/// Median with NaN sorted last; mean of the middle pair for even counts.
pub fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub fn traces_to_runs(suite: Vec<Vec<Trace>>) -> Vec<MethodRun> {
    suite
        .into_iter()
        .filter(|ts| !ts.is_empty())
        .map(|ts| MethodRun {
            label: ts[0].label.clone(),
            records: ts.into_iter().flat_map(Trace::into_records).collect(),
            aborted: Vec::new(),
        })
        .collect()
}

/// Sampled single steps from one point of the 2D Rosenbrock function.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleStepStudy {
    pub point: [f64; 2],
    pub gradient: [f64; 2],
    /// `θ' − θ` of the dense Newton step (`−H⁻¹∇f`).
    pub newton: [f64; 2],
    /// `(label, θ' − θ per sample)` for FGD, FoMoH and FoMoH-2D.
    pub samples: Vec<(String, Vec<[f64; 2]>)>,
}

impl SingleStepStudy {
    pub fn mean(&self, label: &str) -> Option<[f64; 2]> {
        let (_, s) = self.samples.iter().find(|(l, _)| l == label)?;
        let n = s.len() as f64;
        Some(s.iter().fold([0.0, 0.0], |a, x| [a[0] + x[0] / n, a[1] + x[1] / n]))
    }
}

/// Default point of the study.
pub const SINGLE_STEP_POINT: [f64; 2] = [-1.0, 1.0];

/// Draw `samples` steps each of FGD (rate `fgd_eta`), FoMoH and FoMoH-2D
/// (rate 1) from `point`.
pub fn single_step_study(point: [f64; 2], samples: usize, fgd_eta: f64, seed: u64) -> Result<SingleStepStudy> {
    let f = rosenbrock(2)?;
    let theta = point.to_vec();
    let (_, g) = f.value_and_grad(&theta)?;
    let h = hessian_full(&f, &theta)?;
    let n = lu_solve(&h, &g).unwrap_or_else(|| vec![f64::NAN; 2]);
    let policy = JitterPolicy::default();
    let delta = |next: Vec<f64>| [next[0] - point[0], next[1] - point[1]];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fgd = Vec::with_capacity(samples);
    let mut fomoh = Vec::with_capacity(samples);
    let mut kd = Vec::with_capacity(samples);
    for _ in 0..samples {
        fgd.push(delta(fgd_step(&f, &theta, fgd_eta, &mut rng)?.0));
        fomoh.push(delta(fomoh_step(&f, &theta, 1.0, CURV_FLOOR, &mut rng)?.0));
        kd.push(delta(fomoh_kd_step(&f, &theta, 1.0, 2, &policy, &mut rng)?.0));
    }
    Ok(SingleStepStudy {
        point,
        gradient: [g[0], g[1]],
        newton: [-n[0], -n[1]],
        samples: vec![("fgd".into(), fgd), ("fomoh".into(), fomoh), ("fomoh-2d".into(), kd)],
    })
}

/// Study samples as `method,sample,dx,dy` rows, Newton step last.
pub fn single_step_rows(study: &SingleStepStudy) -> Vec<(String, usize, f64, f64)> {
    let mut rows = Vec::new();
    for (label, s) in &study.samples {
        rows.extend(s.iter().enumerate().map(|(i, d)| (label.clone(), i, d[0], d[1])));
    }
    rows.push(("newton".into(), 0, study.newton[0], study.newton[1]));
    rows
}
