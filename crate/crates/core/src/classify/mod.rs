//! One-versus-all Gaussian-kernel SVM trained with SMO.

mod kernel;
mod smo;

pub use kernel::{gram_matrix, rbf_kernel};

use kernel::{sq_distances, sq_norms, RowSource};
use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("training needs at least two classes, found {0}")]
    SingleClass(usize),
    #[error("{rows} rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error("row width {got} does not match model width {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("non-finite feature value in row {0}")]
    NonFinite(usize),
    #[error("need at least 2 folds and at most one per row, got {folds} for {rows} rows")]
    BadFolds { folds: usize, rows: usize },
    #[error("class {class} has {count} rows, fewer than {folds} folds")]
    ClassTooSmall { class: u16, count: usize, folds: usize },
    #[error("empty hyperparameter grid")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    /// Stop when the maximal KKT violation falls to this value.
    pub tol: f64,
    /// Kernel values a binary problem may consume before giving up.
    pub max_kernel_evals: u64,
    /// Memory for kernel storage. A full Gram matrix is used when it fits,
    /// otherwise an LRU row cache per binary problem.
    pub cache_bytes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 14.0,
            gamma: 2e-5,
            tol: 1e-3,
            max_kernel_evals: 10_000_000,
            cache_bytes: 512 << 20,
        }
    }
}

impl SvmParams {
    fn validate(&self) -> Result<(), ClassifyError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.c) {
            return Err(ClassifyError::NonPositive("c"));
        }
        if !ok(self.gamma) {
            return Err(ClassifyError::NonPositive("gamma"));
        }
        if !ok(self.tol) {
            return Err(ClassifyError::NonPositive("tol"));
        }
        Ok(())
    }
}

/// One class-versus-rest decision function.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub class: u16,
    /// Training-row index of each support vector.
    pub sv_indices: Vec<u32>,
    /// Support-vector rows, `n_sv × dims`.
    pub support: Array2<f64>,
    /// `α_i y_i` per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub iterations: u64,
    pub converged: bool,
}

impl BinarySvm {
    /// Decision value `Σ α_i y_i K(x_i, x) + b`.
    pub fn decision(&self, row: &[f64], gamma: f64) -> f64 {
        self.support
            .rows()
            .into_iter()
            .zip(&self.coef)
            .map(|(sv, &a)| a * rbf_kernel(sv.as_slice().expect("standard layout"), row, gamma))
            .sum::<f64>()
            + self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub gamma: f64,
    pub c: f64,
    pub dims: usize,
    /// Ascending by class id.
    pub classes: Vec<BinarySvm>,
}

impl SvmModel {
    /// Classes whose solver stopped on the kernel-evaluation cap.
    pub fn unconverged(&self) -> Vec<u16> {
        self.classes.iter().filter(|b| !b.converged).map(|b| b.class).collect()
    }

    pub fn class_ids(&self) -> Vec<u16> {
        self.classes.iter().map(|b| b.class).collect()
    }
}

/// Labels plus `rows × classes` decision values.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<u16>,
    pub decision: Array2<f64>,
}

impl Prediction {
    pub fn accuracy(&self, truth: &[u16]) -> f64 {
        if truth.is_empty() {
            return 0.0;
        }
        let hits = self.labels.iter().zip(truth).filter(|(a, b)| a == b).count();
        hits as f64 / truth.len() as f64
    }
}

fn check_rows(features: ArrayView2<'_, f64>, labels: &[u16]) -> Result<Vec<u16>, ClassifyError> {
    if features.nrows() != labels.len() {
        return Err(ClassifyError::LabelCount {
            rows: features.nrows(),
            labels: labels.len(),
        });
    }
    if let Some((r, _)) = features.rows().into_iter().enumerate().find(|(_, row)| row.iter().any(|v| !v.is_finite())) {
        return Err(ClassifyError::NonFinite(r));
    }
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(ClassifyError::SingleClass(classes.len()));
    }
    Ok(classes)
}

/// Trains on the rows `idx` of `x`, reading kernels from `gram` when given.
fn train_subset(
    x: ArrayView2<'_, f64>,
    labels: &[u16],
    idx: &[usize],
    classes: &[u16],
    params: &SvmParams,
    gram: Option<(Arc<Vec<f64>>, usize)>,
) -> SvmModel {
    let per_class_cache = params.cache_bytes / classes.len().max(1);
    let binaries = classes
        .par_iter()
        .map(|&class| {
            let y: Vec<f64> = idx.iter().map(|&i| if labels[i] == class { 1.0 } else { -1.0 }).collect();
            let mut src = match &gram {
                Some((g, stride)) => RowSource::Gram {
                    gram: g.clone(),
                    stride: *stride,
                    idx,
                },
                None => RowSource::computed(x, idx, params.gamma, per_class_cache),
            };
            let sol = smo::solve(&mut src, &y, params.c, params.tol, params.max_kernel_evals);
            let sv: Vec<usize> = (0..idx.len()).filter(|&t| sol.alpha[t] > 0.0).collect();
            let support = Array2::from_shape_fn((sv.len(), x.ncols()), |(k, d)| x[[idx[sv[k]], d]]);
            BinarySvm {
                class,
                sv_indices: sv.iter().map(|&t| idx[t] as u32).collect(),
                support,
                coef: sv.iter().map(|&t| sol.alpha[t] * y[t]).collect(),
                bias: sol.bias,
                iterations: sol.iterations,
                converged: sol.converged,
            }
        })
        .collect();
    SvmModel {
        gamma: params.gamma,
        c: params.c,
        dims: x.ncols(),
        classes: binaries,
    }
}

fn gram_fits(n: usize, params: &SvmParams) -> bool {
    n.saturating_mul(n).saturating_mul(8) <= params.cache_bytes
}

/// Trains one binary SVM per class present in `labels`.
pub fn train(features: ArrayView2<'_, f64>, labels: &[u16], params: &SvmParams) -> Result<SvmModel, ClassifyError> {
    params.validate()?;
    let classes = check_rows(features, labels)?;
    let x = features.as_standard_layout();
    let n = x.nrows();
    let idx: Vec<usize> = (0..n).collect();
    let gram = gram_fits(n, params).then(|| (Arc::new(gram_matrix(x.view(), params.gamma)), n));
    Ok(train_subset(x.view(), labels, &idx, &classes, params, gram))
}

/// Decision values for every class and the argmax label, ties going to the
/// lowest class id.
pub fn predict(model: &SvmModel, rows: ArrayView2<'_, f64>) -> Result<Prediction, ClassifyError> {
    if rows.ncols() != model.dims {
        return Err(ClassifyError::WidthMismatch {
            expected: model.dims,
            got: rows.ncols(),
        });
    }
    let rows = rows.as_standard_layout();
    // Kernel values against each distinct support vector are computed once
    // and shared by every class.
    let mut distinct: Vec<u32> = model.classes.iter().flat_map(|b| b.sv_indices.iter().copied()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let mut sv_rows: Vec<&[f64]> = vec![&[]; distinct.len()];
    let mut slots: Vec<Vec<usize>> = Vec::with_capacity(model.classes.len());
    for b in &model.classes {
        let mut s = Vec::with_capacity(b.sv_indices.len());
        for (k, id) in b.sv_indices.iter().enumerate() {
            let pos = distinct.binary_search(id).unwrap();
            sv_rows[pos] = b.support.row(k).to_slice().expect("standard layout");
            s.push(pos);
        }
        slots.push(s);
    }
    let sv_norms: Vec<f64> = sv_rows.iter().map(|r| kernel::dot(r, r)).collect();
    let row_norms = sq_norms(rows.view());
    let n_classes = model.classes.len();
    let values: Vec<f64> = (0..rows.nrows())
        .into_par_iter()
        .flat_map_iter(|r| {
            let x = rows.row(r);
            let x = x.to_slice().expect("standard layout");
            let k: Vec<f64> = sv_rows
                .iter()
                .zip(&sv_norms)
                .map(|(sv, &ns)| kernel::rbf(sv, x, ns, row_norms[r], model.gamma))
                .collect();
            model
                .classes
                .iter()
                .zip(&slots)
                .map(|(b, s)| b.coef.iter().zip(s).map(|(a, &p)| a * k[p]).sum::<f64>() + b.bias)
                .collect::<Vec<_>>()
        })
        .collect();
    let decision = Array2::from_shape_vec((rows.nrows(), n_classes), values).expect("shape");
    let labels = decision
        .rows()
        .into_iter()
        .map(|d| {
            let mut best = 0;
            for c in 1..n_classes {
                if d[c] > d[best] {
                    best = c;
                }
            }
            model.classes[best].class
        })
        .collect();
    Ok(Prediction { labels, decision })
}

/// Mean accuracy of one `(c, gamma)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub c: f64,
    pub gamma: f64,
    pub fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_c: f64,
    pub best_gamma: f64,
    pub cells: Vec<CvCell>,
}

/// Fold id per row. Rows are dealt round-robin class by class so every fold
/// sees each class. When `folds` equals the row count each row is its own
/// fold.
pub fn stratified_folds(labels: &[u16], folds: usize) -> Result<Vec<usize>, ClassifyError> {
    let n = labels.len();
    if folds < 2 || folds > n {
        return Err(ClassifyError::BadFolds { folds, rows: n });
    }
    if folds == n {
        return Ok((0..n).collect());
    }
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut out = vec![0; n];
    let mut next = 0;
    for &c in &classes {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        if members.len() < folds {
            return Err(ClassifyError::ClassTooSmall {
                class: c,
                count: members.len(),
                folds,
            });
        }
        for i in members {
            out[i] = next % folds;
            next += 1;
        }
    }
    Ok(out)
}

/// Grid search over `c_grid × gamma_grid` by k-fold accuracy. The best
/// cell wins ties toward smaller `c`, then smaller `gamma`.
pub fn cross_validate(
    features: ArrayView2<'_, f64>,
    labels: &[u16],
    c_grid: &[f64],
    gamma_grid: &[f64],
    folds: usize,
    base: &SvmParams,
) -> Result<CvResult, ClassifyError> {
    if c_grid.is_empty() || gamma_grid.is_empty() {
        return Err(ClassifyError::EmptyGrid);
    }
    check_rows(features, labels)?;
    let fold_of = stratified_folds(labels, folds)?;
    let x = features.as_standard_layout();
    let n = x.nrows();
    let dist = gram_fits(n, base).then(|| sq_distances(x.view()));

    let mut cells = Vec::new();
    for &gamma in gamma_grid {
        let gram = dist
            .as_ref()
            .map(|d| Arc::new(d.par_iter().map(|v| (-gamma * v).exp()).collect::<Vec<f64>>()));
        for &c in c_grid {
            let params = SvmParams { c, gamma, ..*base };
            params.validate()?;
            let mut fold_accuracy = Vec::with_capacity(folds);
            for f in 0..folds {
                let train_idx: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
                let test_idx: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
                let mut classes: Vec<u16> = train_idx.iter().map(|&i| labels[i]).collect();
                classes.sort_unstable();
                classes.dedup();
                if classes.len() < 2 {
                    return Err(ClassifyError::SingleClass(classes.len()));
                }
                let model = train_subset(x.view(), labels, &train_idx, &classes, &params, gram.clone().map(|g| (g, n)));
                let test = Array2::from_shape_fn((test_idx.len(), x.ncols()), |(r, d)| x[[test_idx[r], d]]);
                let truth: Vec<u16> = test_idx.iter().map(|&i| labels[i]).collect();
                fold_accuracy.push(predict(&model, test.view())?.accuracy(&truth));
            }
            let mean_accuracy = fold_accuracy.iter().sum::<f64>() / folds as f64;
            cells.push(CvCell {
                c,
                gamma,
                fold_accuracy,
                mean_accuracy,
            });
        }
    }
    let best = cells
        .iter()
        .fold(None::<&CvCell>, |acc, cell| match acc {
            None => Some(cell),
            Some(b) => {
                let better = cell.mean_accuracy > b.mean_accuracy
                    || (cell.mean_accuracy == b.mean_accuracy
                        && (cell.c < b.c || (cell.c == b.c && cell.gamma < b.gamma)));
                Some(if better { cell } else { b })
            }
        })
        .expect("nonempty grid");
    let (best_c, best_gamma) = (best.c, best.gamma);
    Ok(CvResult {
        best_c,
        best_gamma,
        cells,
    })
}

#[cfg(test)]
mod tests;
