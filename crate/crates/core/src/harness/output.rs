//! CSV and JSON emission. Output is byte-stable: rows are sorted by
//! `(method, seed, iter)` and floats are written with 9 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::rosenbrock::median;
use super::runner::{MethodRun, RunRecord};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "seed,iter,train_loss,val_loss,train_acc,val_acc,eta,wall_ms,jitter,retries";

pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.8e}")
    }
}

fn sorted(records: &[RunRecord]) -> Vec<&RunRecord> {
    let mut rs: Vec<&RunRecord> = records.iter().collect();
    rs.sort_by_key(|r| (r.seed, r.iter));
    rs
}

pub fn records_csv(records: &[RunRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in sorted(records) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.iter,
            fmt_float(r.train_loss),
            fmt_float(r.val_loss),
            fmt_float(r.train_acc),
            fmt_float(r.val_acc),
            fmt_float(r.eta),
            fmt_float(r.wall_ms),
            fmt_float(r.jitter),
            r.retries
        );
    }
    s
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Sample mean and standard deviation (n − 1 denominator; 0 for one value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

type Metric = fn(&RunRecord) -> f64;

const METRICS: [(&str, Metric); 4] = [
    ("train_loss", |r| r.train_loss),
    ("val_loss", |r| r.val_loss),
    ("train_acc", |r| r.train_acc),
    ("val_acc", |r| r.val_acc),
];

/// Final-epoch mean ± std per method, keyed by label.
pub fn summary_json(runs: &[MethodRun]) -> String {
    let mut methods = Map::new();
    for run in runs {
        let finals = run.finals();
        let mut m = Map::new();
        m.insert("completed_seeds".into(), json!(finals.len()));
        m.insert(
            "aborted".into(),
            Value::Array(run.aborted.iter().map(|(s, why)| json!({ "seed": s, "reason": why })).collect()),
        );
        for (name, get) in METRICS {
            let xs: Vec<f64> = finals.iter().map(|r| get(r)).collect();
            let stat = if xs.is_empty() {
                json!({ "mean": null, "std": null })
            } else {
                let (mean, std) = mean_std(&xs);
                json!({ "mean": finite_or_null(mean), "std": finite_or_null(std) })
            };
            m.insert(name.into(), stat);
        }
        methods.insert(run.label.clone(), Value::Object(m));
    }
    let mut s = serde_json::to_string_pretty(&json!({ "methods": methods })).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Per-iteration medians across seeds, `method,iter,<metrics>`.
pub fn median_csv(runs: &[MethodRun]) -> String {
    let mut s = String::from("method,iter,train_loss,val_loss,train_acc,val_acc\n");
    let mut runs: Vec<&MethodRun> = runs.iter().collect();
    runs.sort_by(|a, b| a.label.cmp(&b.label));
    for run in runs {
        let mut by_iter: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
        for r in &run.records {
            by_iter.entry(r.iter).or_default().push(r);
        }
        for (iter, at) in by_iter {
            let _ = write!(s, "{},{iter}", run.label);
            for (_, get) in METRICS {
                let _ = write!(s, ",{}", fmt_float(median(at.iter().map(|r| get(r)).collect())));
            }
            s.push('\n');
        }
    }
    s
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Write `<label>.csv` per method, `summary.json` and `median_curves.csv`.
pub fn emit_outputs(runs: &[MethodRun], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let mut runs: Vec<&MethodRun> = runs.iter().collect();
    runs.sort_by(|a, b| a.label.cmp(&b.label));
    let mut written = Vec::new();
    for run in &runs {
        written.push(write(dir.join(format!("{}.csv", run.label)), &records_csv(&run.records))?);
    }
    let owned: Vec<MethodRun> = runs.into_iter().cloned().collect();
    written.push(write(dir.join("summary.json"), &summary_json(&owned))?);
    written.push(write(dir.join("median_curves.csv"), &median_csv(&owned))?);
    Ok(written)
}
