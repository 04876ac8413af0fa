use ndarray::{Array2, Axis};

use crate::{Error, Result};

/// Inputs `[B, features]` with one class index per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBatch {
    inputs: Array2<f64>,
    labels: Vec<usize>,
}

impl DatasetBatch {
    pub fn new(inputs: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if inputs.nrows() == 0 {
            return Err(Error::Shape("batch must contain at least one sample".into()));
        }
        if inputs.nrows() != labels.len() {
            return Err(Error::Shape(format!("{} input rows but {} labels", inputs.nrows(), labels.len())));
        }
        Ok(DatasetBatch { inputs, labels })
    }

    pub fn inputs(&self) -> &Array2<f64> {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> usize {
        self.inputs.ncols()
    }

    /// Rows in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<DatasetBatch> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.len()) {
            return Err(Error::IndexOutOfBounds { index: bad, dim: self.len() });
        }
        DatasetBatch::new(self.inputs.select(Axis(0), rows), rows.iter().map(|&r| self.labels[r]).collect())
    }

    /// First `n` rows (or all, if fewer).
    pub fn head(&self, n: usize) -> Result<DatasetBatch> {
        let rows: Vec<usize> = (0..n.min(self.len())).collect();
        self.select(&rows)
    }
}
