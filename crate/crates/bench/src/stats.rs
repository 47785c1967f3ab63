use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Descriptive statistics of one metric over a trial set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Population standard deviation.
    pub std: f64,
    pub iqr: f64,
}

/// Linear-interpolation quantile (type 7) of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Drops the `drop_worst` largest values, then summarizes the rest.
pub fn summarize(values: &[f64], drop_worst: usize) -> Result<SummaryStats, BenchError> {
    if values.len() <= drop_worst {
        return Err(BenchError::Contract(format!(
            "need more than {drop_worst} records, got {}",
            values.len()
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.truncate(v.len() - drop_worst);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok(SummaryStats {
        mean,
        median: quantile(&v, 0.5),
        min: v[0],
        max: v[v.len() - 1],
        std: var.sqrt(),
        iqr: quantile(&v, 0.75) - quantile(&v, 0.25),
    })
}
