//! Statistics: percentile bootstrap intervals, area under the training
//! curve, smoothed frequency series, and bootstrap support for paired
//! comparisons.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::harness::metrics::{EpisodeRow, RunRecord};
use crate::RlError;

/// Percentile bootstrap of the mean: (mean, lo, hi).
pub fn bootstrap_ci(
    values: &[f64],
    reps: usize,
    level: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, f64), RlError> {
    if values.is_empty() {
        return Err(RlError::Config("bootstrap over an empty sample".into()));
    }
    if !(0.0..1.0).contains(&level) || reps == 0 {
        return Err(RlError::Config("bootstrap needs reps >= 1 and level in (0, 1)".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok((mean, mean, mean));
    }
    let mut means = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += values[rng.gen_range(0..n)];
        }
        means.push(acc / n as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite bootstrap means"));
    let alpha = (1.0 - level) / 2.0;
    let pick = |q: f64| {
        let idx = ((q * reps as f64).ceil() as usize).clamp(1, reps) - 1;
        means[idx]
    };
    Ok((mean, pick(alpha), pick(1.0 - alpha)))
}

/// Fraction of bootstrap resamples (seed indices drawn with replacement) on
/// which `holds` is true; the caller computes its paired statistic from the
/// resampled index multiset.
pub fn bootstrap_support(
    n: usize,
    reps: usize,
    rng: &mut ChaCha8Rng,
    mut holds: impl FnMut(&[usize]) -> bool,
) -> Result<f64, RlError> {
    if n == 0 || reps == 0 {
        return Err(RlError::Config("bootstrap support needs data and reps".into()));
    }
    let mut idx = vec![0usize; n];
    let mut hits = 0usize;
    for _ in 0..reps {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..n);
        }
        if holds(&idx) {
            hits += 1;
        }
    }
    Ok(hits as f64 / reps as f64)
}

/// Percentile bootstrap interval of an arbitrary statistic over resampled
/// index multisets; the point estimate uses the identity sample.
pub fn bootstrap_stat_ci(
    n: usize,
    reps: usize,
    level: f64,
    rng: &mut ChaCha8Rng,
    mut stat: impl FnMut(&[usize]) -> f64,
) -> Result<(f64, f64, f64), RlError> {
    if n == 0 || reps == 0 || !(0.0..1.0).contains(&level) {
        return Err(RlError::Config("bad bootstrap_stat_ci arguments".into()));
    }
    let identity: Vec<usize> = (0..n).collect();
    let point = stat(&identity);
    if n == 1 {
        return Ok((point, point, point));
    }
    let mut idx = vec![0usize; n];
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..n);
        }
        samples.push(stat(&idx));
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let alpha = (1.0 - level) / 2.0;
    let pick = |q: f64| {
        let i = ((q * reps as f64).ceil() as usize).clamp(1, reps) - 1;
        samples[i]
    };
    Ok((point, pick(alpha), pick(1.0 - alpha)))
}

/// Area under the training curve: the mean per-episode return.
pub fn auc(curve: &[f64]) -> f64 {
    if curve.is_empty() {
        return 0.0;
    }
    curve.iter().sum::<f64>() / curve.len() as f64
}

/// Trailing moving average with the window clipped at the start.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for i in 0..xs.len() {
        acc += xs[i];
        if i >= w {
            acc -= xs[i - w];
        }
        out.push(acc / (i.min(w - 1) + 1) as f64);
    }
    out
}

/// Extracts a per-episode series by key. Keys: `return`, `monitor-ask`,
/// `water:<plants|cactus|floor>:<1|2>`, `water:novel`, `epsilon`.
pub fn series_extractor(key: &str) -> Result<fn(&EpisodeRow) -> f64, RlError> {
    let f: fn(&EpisodeRow) -> f64 = match key {
        "return" => |r| r.return_true,
        "monitor-ask" => |r| r.asks as f64,
        "epsilon" => |r| r.epsilon,
        "water:plants:1" => |r| r.water_counts().plants(1) as f64,
        "water:plants:2" => |r| r.water_counts().plants(2) as f64,
        "water:cactus:1" => |r| r.water_cactus_z1 as f64,
        "water:cactus:2" => |r| r.water_cactus_z2 as f64,
        "water:floor:1" => |r| r.water_floor_z1 as f64,
        "water:floor:2" => |r| r.water_floor_z2 as f64,
        "water:novel" => |r| r.water_counts().novel_total() as f64,
        _ => return Err(RlError::Config(format!("unknown series key: {key}"))),
    };
    Ok(f)
}

/// Smoothed per-episode series for each record.
pub fn frequency_series(
    records: &[RunRecord],
    key: &str,
    window: usize,
) -> Result<Vec<Vec<f64>>, RlError> {
    let f = series_extractor(key)?;
    Ok(records
        .iter()
        .map(|rec| moving_average(&rec.rows.iter().map(f).collect::<Vec<_>>(), window))
        .collect())
}
