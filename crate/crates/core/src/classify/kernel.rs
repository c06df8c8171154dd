//! Gaussian kernel rows, either from a precomputed Gram matrix or computed
//! on demand behind an LRU cache.

use lru::LruCache;
use ndarray::ArrayView2;
use rayon::prelude::*;
use std::num::NonZeroUsize;
use std::sync::Arc;

pub(crate) fn sq_norms(x: ArrayView2<'_, f64>) -> Vec<f64> {
    x.rows().into_iter().map(|r| r.dot(&r)).collect()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// `exp(-gamma * ‖a - b‖²)` given precomputed squared norms.
#[inline]
pub(crate) fn rbf(a: &[f64], b: &[f64], na: f64, nb: f64, gamma: f64) -> f64 {
    (-gamma * (na + nb - 2.0 * dot(a, b)).max(0.0)).exp()
}

/// `exp(-gamma * ‖a - b‖²)` computed directly.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    (-gamma * d).exp()
}

/// Squared distances between every pair of rows, row-major `n × n`.
pub(crate) fn sq_distances(x: ArrayView2<'_, f64>) -> Vec<f64> {
    let n = x.nrows();
    let norms = sq_norms(x);
    let rows: Vec<&[f64]> = (0..n).map(|i| x.row(i).to_slice().expect("standard layout")).collect();
    let mut out = vec![0.0; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j {
                0.0
            } else if j < i {
                // filled from the mirrored pair below to keep the matrix exactly symmetric
                f64::NAN
            } else {
                (norms[i] + norms[j] - 2.0 * dot(rows[i], rows[j])).max(0.0)
            };
        }
    });
    for i in 0..n {
        for j in 0..i {
            out[i * n + j] = out[j * n + i];
        }
    }
    out
}

/// Full Gram matrix `K[i][j]`, exactly symmetric with unit diagonal.
pub fn gram_matrix(x: ArrayView2<'_, f64>, gamma: f64) -> Vec<f64> {
    sq_distances(x).into_par_iter().map(|d| (-gamma * d).exp()).collect()
}

/// Kernel rows for a subset of rows of a larger problem.
pub(crate) enum RowSource<'a> {
    /// Rows gathered from a precomputed `stride × stride` Gram matrix.
    Gram {
        gram: Arc<Vec<f64>>,
        stride: usize,
        idx: &'a [usize],
    },
    /// Rows computed on demand and cached.
    Computed {
        x: ArrayView2<'a, f64>,
        norms: Vec<f64>,
        idx: &'a [usize],
        gamma: f64,
        cache: LruCache<usize, Arc<Vec<f64>>>,
    },
}

impl<'a> RowSource<'a> {
    pub(crate) fn computed(x: ArrayView2<'a, f64>, idx: &'a [usize], gamma: f64, cache_bytes: usize) -> Self {
        let row_bytes = (idx.len() * 8).max(1);
        let rows = (cache_bytes / row_bytes).max(2);
        RowSource::Computed {
            norms: sq_norms(x),
            x,
            idx,
            gamma,
            cache: LruCache::new(NonZeroUsize::new(rows).unwrap()),
        }
    }

    pub(crate) fn len(&self) -> usize {
        match self {
            RowSource::Gram { idx, .. } | RowSource::Computed { idx, .. } => idx.len(),
        }
    }

    /// Kernel values between local row `i` and every local row.
    pub(crate) fn row(&mut self, i: usize) -> Arc<Vec<f64>> {
        match self {
            RowSource::Gram { gram, stride, idx } => {
                let base = idx[i] * *stride;
                Arc::new(idx.iter().map(|&j| gram[base + j]).collect())
            }
            RowSource::Computed {
                x,
                norms,
                idx,
                gamma,
                cache,
            } => {
                if let Some(r) = cache.get(&i) {
                    return r.clone();
                }
                let gi = idx[i];
                let xi = x.row(gi);
                let xi = xi.to_slice().expect("standard layout");
                let row: Vec<f64> = idx
                    .iter()
                    .map(|&gj| {
                        if gj == gi {
                            1.0
                        } else {
                            let xj = x.row(gj);
                            rbf(xi, xj.to_slice().expect("standard layout"), norms[gi], norms[gj], *gamma)
                        }
                    })
                    .collect();
                let row = Arc::new(row);
                cache.put(i, row.clone());
                row
            }
        }
    }
}
