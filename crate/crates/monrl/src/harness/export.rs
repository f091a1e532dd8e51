//! Atomic file export: CSV (RFC 4180 quoting, one metric family per file)
//! and JSON. Every writer is deterministic so reruns are byte-identical.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::harness::metrics::RunRecord;
use crate::harness::stats::{bootstrap_ci, frequency_series};
use crate::RlError;

/// Writes via a temp file and rename so partial writes never surface.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), RlError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_csv_atomic<S: Serialize>(path: &Path, rows: &[S]) -> Result<(), RlError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| RlError::Serde(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| RlError::Serde(e.to_string()))?;
    atomic_write(path, &bytes)
}

pub fn read_csv<D: DeserializeOwned>(path: &Path) -> Result<Vec<D>, RlError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| RlError::Serde(e.to_string()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| RlError::Serde(e.to_string())))
        .collect()
}

pub fn write_json_atomic<S: Serialize>(path: &Path, value: &S) -> Result<(), RlError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| RlError::Serde(e.to_string()))?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D, RlError> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| RlError::Serde(e.to_string()))
}

/// One point of a plot-ready curve: episode index, cross-seed mean, and a
/// bootstrap interval over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct PlotPoint {
    pub x: u64,
    pub y: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Builds the x/y/lo/hi curve for a series key across seed records: the
/// smoothed per-seed series is averaged per episode with a bootstrap
/// interval over seeds.
pub fn plot_data(
    records: &[RunRecord],
    key: &str,
    window: usize,
    reps: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<PlotPoint>, RlError> {
    use rand::SeedableRng;
    if records.is_empty() {
        return Err(RlError::Config("plot-data needs at least one record".into()));
    }
    let series = frequency_series(records, key, window)?;
    let len = series.iter().map(|s| s.len()).min().unwrap_or(0);
    let mut out = Vec::with_capacity(len);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for x in 0..len {
        let vals: Vec<f64> = series.iter().map(|s| s[x]).collect();
        let (y, lo, hi) = bootstrap_ci(&vals, reps, level, &mut rng)?;
        out.push(PlotPoint { x: x as u64, y, lo, hi });
    }
    Ok(out)
}
