//! Modulus envelopes and the parametric log transform.

use super::ScatterError;
use crate::dtcwt::{DtcwtPyramid, Plane};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Nonnegative modulus plane for one `(scale, orientation)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePlane {
    /// 1-based scale.
    pub scale: usize,
    /// 0-based orientation index.
    pub orientation: usize,
    pub values: Plane,
}

/// One envelope per subband of the pyramid, ordered by scale then
/// orientation.
pub fn modulus(pyramid: &DtcwtPyramid) -> Vec<EnvelopePlane> {
    pyramid
        .subbands
        .iter()
        .enumerate()
        .flat_map(|(j, bands)| {
            bands.iter().enumerate().map(move |(r, b)| EnvelopePlane {
                scale: j + 1,
                orientation: r,
                values: b.abs(),
            })
        })
        .collect()
}

/// Elementwise `ln(value + k)`.
pub fn log_transform(env: &Plane, k: f64) -> Result<Plane, ScatterError> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(ScatterError::NonPositiveK(k));
    }
    Ok(env.map(|v| (v + k).ln()))
}

/// 25 geometric steps from 0.1 to 20.
pub fn default_log_grid() -> Vec<f64> {
    let (lo, hi, n) = (0.1f64, 20.0f64, 25);
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| lo * ratio.powi(i)).collect()
}

/// Per-scale outcome of the mean–median search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLogReport {
    pub scale: usize,
    pub k: f64,
    /// |mean − median| of `ln(x + k)` at the chosen k.
    pub mean_median_gap: f64,
    pub skewness_before: f64,
    pub skewness_after: f64,
    pub sample_count: usize,
    /// `(k, gap)` for every grid candidate.
    pub grid: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LogParamReport {
    pub scales: Vec<ScaleLogReport>,
}

impl LogParamReport {
    /// Chosen k per scale, in scale order.
    pub fn ks(&self) -> Vec<f64> {
        self.scales.iter().map(|s| s.k).collect()
    }
}

/// Sample skewness `m3 / m2^1.5` from central moments.
pub fn skewness(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    if samples.len() < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / n;
    let (m2, m3) = samples.iter().fold((0.0, 0.0), |(m2, m3), &x| {
        let d = x - mean;
        (m2 + d * d, m3 + d * d * d)
    });
    let (m2, m3) = (m2 / n, m3 / n);
    if m2 <= 0.0 {
        0.0
    } else {
        m3 / m2.powf(1.5)
    }
}

fn median_sorted(sorted: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        f(sorted[n / 2])
    } else {
        0.5 * (f(sorted[n / 2 - 1]) + f(sorted[n / 2]))
    }
}

/// |mean − median| of `ln(x + k)` over `sorted` samples.
fn log_gap(sorted: &[f64], k: f64) -> f64 {
    let mean = sorted.par_iter().map(|&x| (x + k).ln()).sum::<f64>() / sorted.len() as f64;
    let median = median_sorted(sorted, |x| (x + k).ln());
    (mean - median).abs()
}

/// Picks the grid value of k minimising |mean − median| of `ln(x + k)`;
/// ties go to the smaller k.
pub fn tune_log_param(samples: &[f64], grid: &[f64]) -> Result<(f64, ScaleLogReport), ScatterError> {
    if samples.is_empty() {
        return Err(ScatterError::EmptyInput("log tuning samples"));
    }
    if grid.is_empty() {
        return Err(ScatterError::EmptyInput("log tuning grid"));
    }
    if let Some(&bad) = grid.iter().find(|&&k| !(k > 0.0)) {
        return Err(ScatterError::NonPositiveK(bad));
    }
    if let Some(&bad) = samples.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(ScatterError::InvalidConfig(format!("log tuning sample {bad} is not a finite nonnegative value")));
    }
    let mut sorted = samples.to_vec();
    sorted.par_sort_unstable_by(|a, b| a.total_cmp(b));

    let mut order: Vec<f64> = grid.to_vec();
    order.sort_by(|a, b| a.total_cmp(b));
    let curve: Vec<(f64, f64)> = order.iter().map(|&k| (k, log_gap(&sorted, k))).collect();
    let mut best = curve[0];
    for &(k, gap) in &curve[1..] {
        if gap < best.1 {
            best = (k, gap);
        }
    }
    let transformed: Vec<f64> = sorted.par_iter().map(|&x| (x + best.0).ln()).collect();
    let report = ScaleLogReport {
        scale: 0,
        k: best.0,
        mean_median_gap: best.1,
        skewness_before: skewness(&sorted),
        skewness_after: skewness(&transformed),
        sample_count: sorted.len(),
        grid: curve,
    };
    Ok((best.0, report))
}
