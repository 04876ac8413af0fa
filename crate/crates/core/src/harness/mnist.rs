//! IDX-format MNIST reader.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::models::DatasetBatch;
use crate::{Error, Result};

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;

/// Environment variable consulted when no data directory is given.
pub const DATA_ENV: &str = "FOMOH_DATA";

/// Rows kept per split in subset mode.
pub const SUBSET_TRAIN: usize = 10_000;
pub const SUBSET_VAL: usize = 2_000;

const FILES: [(&str, &str); 2] =
    [("train-images-idx3-ubyte", "train-labels-idx1-ubyte"), ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")];

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::Idx(format!("{what}: truncated header")))
}

/// Parse an image file; returns `(count, rows, cols, pixels)` with raw bytes.
pub fn parse_images(bytes: &[u8]) -> Result<(usize, usize, usize, &[u8])> {
    let magic = be_u32(bytes, 0, "images")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Idx(format!("image magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}")));
    }
    let n = be_u32(bytes, 4, "images")? as usize;
    let rows = be_u32(bytes, 8, "images")? as usize;
    let cols = be_u32(bytes, 12, "images")? as usize;
    let need = n * rows * cols;
    let body = &bytes[16..];
    if body.len() < need {
        return Err(Error::Idx(format!("images: expected {need} pixel bytes, found {}", body.len())));
    }
    Ok((n, rows, cols, &body[..need]))
}

pub fn parse_labels(bytes: &[u8]) -> Result<&[u8]> {
    let magic = be_u32(bytes, 0, "labels")?;
    if magic != LABEL_MAGIC {
        return Err(Error::Idx(format!("label magic {magic:#010x}, expected {LABEL_MAGIC:#010x}")));
    }
    let n = be_u32(bytes, 4, "labels")? as usize;
    let body = &bytes[8..];
    if body.len() < n {
        return Err(Error::Idx(format!("labels: expected {n} bytes, found {}", body.len())));
    }
    Ok(&body[..n])
}

/// Decode an image/label file pair, keeping at most `limit` rows.
pub fn decode_pair(images: &[u8], labels: &[u8], limit: Option<usize>) -> Result<DatasetBatch> {
    let (n, rows, cols, pixels) = parse_images(images)?;
    let labels = parse_labels(labels)?;
    if labels.len() != n {
        return Err(Error::Idx(format!("{n} images but {} labels", labels.len())));
    }
    if n == 0 {
        return Err(Error::Idx("empty IDX file".into()));
    }
    let keep = limit.map_or(n, |l| l.min(n));
    let features = rows * cols;
    let x = Array2::from_shape_fn((keep, features), |(i, j)| pixels[i * features + j] as f64 / 255.0);
    DatasetBatch::new(x, labels[..keep].iter().map(|&y| y as usize).collect())
}

fn read(dir: &Path, name: &str) -> Result<Vec<u8>> {
    let path = dir.join(name);
    fs::read(&path).map_err(|e| Error::Idx(format!("{}: {e}", path.display())))
}

/// Resolve the dataset directory from an explicit path or [`DATA_ENV`].
pub fn data_dir(explicit: Option<&Path>) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p.to_path_buf());
    }
    std::env::var_os(DATA_ENV)
        .map(PathBuf::from)
        .ok_or_else(|| Error::Config(format!("no data directory given and {DATA_ENV} is unset")))
}

/// Load `(train, validation)` from the four standard IDX files in `dir`.
/// Subset mode keeps the first 10k training and 2k test rows.
pub fn load_mnist_idx(dir: &Path, subset: bool) -> Result<(DatasetBatch, DatasetBatch)> {
    let limits = if subset { [Some(SUBSET_TRAIN), Some(SUBSET_VAL)] } else { [None, None] };
    let mut splits =
        FILES.iter().zip(limits).map(|(&(img, lab), limit)| decode_pair(&read(dir, img)?, &read(dir, lab)?, limit));
    let train = splits.next().unwrap()?;
    let val = splits.next().unwrap()?;
    Ok((train, val))
}
