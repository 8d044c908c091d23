//! Reading and writing datasets, covariates and checkpoints.

mod checkpoint;
mod covariates;
mod preflib;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use checkpoint::{
    load_checkpoint, save_checkpoint, Checkpoint, Provenance, CHECKPOINT_VERSION,
};
pub use covariates::{load_covariates, parse_covariates, CovariateReport};
pub use preflib::{parse_preflib, parse_preflib_str, ParseReport};

use crate::error::Result;
use crate::order::Dataset;

/// Writes one ballot per line (`1: a,b,c`) under a preflib 2021 header.
pub fn write_dataset(data: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, dataset_to_string(data))?;
    Ok(())
}

pub fn dataset_to_string(data: &Dataset) -> String {
    let m = data.m();
    let mut out = String::new();
    let _ = writeln!(out, "# DATA TYPE: soi");
    let _ = writeln!(out, "# NUMBER ALTERNATIVES: {m}");
    let _ = writeln!(out, "# NUMBER VOTERS: {}", data.len());
    let _ = writeln!(out, "# NUMBER UNIQUE ORDERS: {}", data.len());
    if let Some(labels) = data.universe().labels() {
        for (i, l) in labels.iter().enumerate() {
            let _ = writeln!(out, "# ALTERNATIVE NAME {}: {l}", i + 1);
        }
    }
    for q in data.orders() {
        let _ = writeln!(out, "1: {q}");
    }
    out
}

/// Table-2 style summary of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub m: usize,
    pub mean_length: f64,
    /// Record count for each length 0..=m.
    pub histogram: Vec<usize>,
}

impl SummaryStats {
    /// Plain text block: one `key: value` line each, then the histogram
    /// as `length_k: count` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n: {}", self.n);
        let _ = writeln!(out, "m: {}", self.m);
        let _ = writeln!(out, "mean_length: {:.6}", self.mean_length);
        for (k, c) in self.histogram.iter().enumerate().skip(1) {
            let _ = writeln!(out, "length_{k}: {c}");
        }
        if self.histogram[0] > 0 {
            let _ = writeln!(out, "length_0: {}", self.histogram[0]);
        }
        out
    }
}

pub fn summary_stats(data: &Dataset) -> SummaryStats {
    let mut histogram = vec![0; data.m() + 1];
    for q in data.orders() {
        histogram[q.len()] += 1;
    }
    SummaryStats {
        n: data.len(),
        m: data.m(),
        mean_length: data.mean_length(),
        histogram,
    }
}

/// Lower-case hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}
