//! End-to-end drivers shared by the command-line tool, the examples and the
//! acceptance suite: extraction into stores, selection plus SVM fitting, and
//! accuracy tables.

pub mod bench;
mod manifest;
mod table;

pub use manifest::{RunManifest, StageTiming, TOOL_VERSION};
pub use table::{AccuracyRow, AccuracyTable};

use crate::classify::{predict, train, ClassifyError, SvmModel, SvmParams};
use crate::data::{
    stratified_indices, DataError, FeatureStoreWriter, LabeledImageSet, Split, StoreManifest,
};
use crate::featsel::{apply_selection, select_all_classes, FeatselError, OlsSelection};
use crate::scatter::{Extractor, FeatureStats, ScatterError};
use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Scatter(#[from] ScatterError),
    #[error(transparent)]
    Featsel(#[from] FeatselError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl PipelineError {
    /// 2 for bad arguments or configuration, 3 for data problems, 4 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => 2,
            PipelineError::Data(_) => 3,
            PipelineError::Numerical(_) => 4,
            PipelineError::Scatter(e) => match e {
                ScatterError::Dtcwt(_) => 4,
                ScatterError::EmptyInput(_) | ScatterError::ChannelCount { .. } => 3,
                _ => 2,
            },
            PipelineError::Featsel(e) => match e {
                FeatselError::CountTooLarge { .. } => 2,
                _ => 3,
            },
            PipelineError::Classify(e) => match e {
                ClassifyError::NonFinite(_) => 4,
                ClassifyError::NonPositive(_) | ClassifyError::BadFolds { .. } | ClassifyError::EmptyGrid => 2,
                _ => 3,
            },
        }
    }
}

impl From<crate::dtcwt::DtcwtError> for PipelineError {
    fn from(e: crate::dtcwt::DtcwtError) -> Self {
        PipelineError::Scatter(e.into())
    }
}

/// Rows extracted per parallel batch when streaming into a store.
const EXTRACT_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub rows: usize,
    pub dims: usize,
    /// Mean single-image scattering time.
    pub mean_image_seconds: f64,
    pub wall_seconds: f64,
}

fn extract_chunk(extractor: &Extractor, set: &LabeledImageSet, idx: &[usize]) -> Result<Vec<(Vec<f64>, f64)>, ScatterError> {
    idx.par_iter()
        .map(|&i| {
            let img = set.image(i);
            let t = Instant::now();
            let v = extractor.extract_values(&img)?;
            Ok((v, t.elapsed().as_secs_f64()))
        })
        .collect()
}

/// Extracts `indices` of `set` (all when `None`) into an in-memory matrix
/// in index order.
pub fn extract_matrix(
    extractor: &Extractor,
    set: &LabeledImageSet,
    indices: Option<&[usize]>,
) -> Result<(Array2<f64>, Vec<u16>, ExtractReport), PipelineError> {
    let all: Vec<usize>;
    let idx = match indices {
        Some(i) => i,
        None => {
            all = (0..set.len()).collect();
            &all
        }
    };
    let wall = Instant::now();
    let mut out = Array2::zeros((idx.len(), extractor.len()));
    let mut total = 0.0;
    let mut row = 0;
    for chunk in idx.chunks(EXTRACT_CHUNK) {
        for (v, secs) in extract_chunk(extractor, set, chunk)? {
            out.row_mut(row).assign(&ndarray::ArrayView1::from(&v));
            total += secs;
            row += 1;
        }
    }
    let labels = idx.iter().map(|&i| set.labels[i]).collect();
    let report = ExtractReport {
        rows: idx.len(),
        dims: extractor.len(),
        mean_image_seconds: total / idx.len().max(1) as f64,
        wall_seconds: wall.elapsed().as_secs_f64(),
    };
    Ok((out, labels, report))
}

/// Streams the features of `set` (restricted to `indices` when given) into a
/// store at `path` with its TOML sidecar.
pub fn extract_to_store(
    extractor: &Extractor,
    set: &LabeledImageSet,
    indices: Option<&[usize]>,
    path: &Path,
) -> Result<ExtractReport, PipelineError> {
    let all: Vec<usize>;
    let idx = match indices {
        Some(i) => i,
        None => {
            all = (0..set.len()).collect();
            &all
        }
    };
    let config = extractor.config();
    let wall = Instant::now();
    let mut writer = FeatureStoreWriter::create(path, config.hash(), config.log.enabled(), extractor.layout().to_vec())?;
    let mut total = 0.0;
    for chunk in idx.chunks(EXTRACT_CHUNK) {
        for (v, secs) in extract_chunk(extractor, set, chunk)? {
            writer.push_row(&v)?;
            total += secs;
        }
    }
    let labels: Vec<u16> = idx.iter().map(|&i| set.labels[i]).collect();
    writer.finish(Some(&labels))?;
    StoreManifest::new(config, set.split, idx.len(), extractor.len()).write(path)?;
    Ok(ExtractReport {
        rows: idx.len(),
        dims: extractor.len(),
        mean_image_seconds: total / idx.len().max(1) as f64,
        wall_seconds: wall.elapsed().as_secs_f64(),
    })
}

/// Normalization restricted to the selected columns, stored next to a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedNormalization {
    pub columns: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl SelectedNormalization {
    pub fn stats(&self) -> FeatureStats {
        FeatureStats {
            mean: self.mean.clone(),
            std: self.std.clone(),
        }
    }

    pub fn sidecar_path(model: &Path) -> std::path::PathBuf {
        let mut s = model.as_os_str().to_owned();
        s.push(".norm.toml");
        s.into()
    }

    pub fn write(&self, model: &Path) -> Result<(), DataError> {
        let text = toml::to_string(self).map_err(|e| DataError::Invalid(e.to_string()))?;
        crate::data::write_atomic(&Self::sidecar_path(model), |w| w.write_all(text.as_bytes()))
    }

    pub fn read(model: &Path) -> Result<Self, DataError> {
        let path = Self::sidecar_path(model);
        let text = std::fs::read_to_string(&path).map_err(|e| DataError::io(&path, e))?;
        toml::from_str(&text).map_err(|e| DataError::Corrupt {
            path,
            what: e.to_string(),
        })
    }
}

/// Normalization, OLS selection and SVM fitted on one training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub selection: OlsSelection,
    pub normalization: SelectedNormalization,
    pub model: SvmModel,
    pub select_seconds: f64,
    pub train_seconds: f64,
}

impl FittedPipeline {
    /// Accuracy on raw test rows holding only the selected columns, in
    /// selection-union order.
    pub fn score_selected(&self, mut test: Array2<f64>, labels: &[u16]) -> Result<f64, PipelineError> {
        self.normalization.stats().apply(&mut test)?;
        Ok(predict(&self.model, test.view())?.accuracy(labels))
    }

    /// Accuracy on full-width raw test rows.
    pub fn score(&self, test: ArrayView2<'_, f64>, labels: &[u16]) -> Result<f64, PipelineError> {
        let sel = apply_selection(test, &self.selection)?;
        self.score_selected(sel, labels)
    }
}

/// Normalizes, selects `per_class` columns per class by OLS and trains the
/// SVM on the union.
pub fn fit_pipeline(
    train_x: ArrayView2<'_, f64>,
    labels: &[u16],
    per_class: usize,
    svm: &SvmParams,
) -> Result<FittedPipeline, PipelineError> {
    let mut norm = train_x.to_owned();
    let stats = FeatureStats::fit(&norm)?;
    stats.apply(&mut norm)?;
    let t = Instant::now();
    let selection = select_all_classes(norm.view(), labels, per_class)?;
    let select_seconds = t.elapsed().as_secs_f64();
    if selection.union.is_empty() {
        return Err(PipelineError::Usage("the selection is empty; nothing to train on".into()));
    }
    let selected = apply_selection(norm.view(), &selection)?;
    let t = Instant::now();
    let model = train(selected.view(), labels, svm)?;
    let train_seconds = t.elapsed().as_secs_f64();
    let picked = stats.select(&selection.union);
    Ok(FittedPipeline {
        normalization: SelectedNormalization {
            columns: selection.union.clone(),
            mean: picked.mean,
            std: picked.std,
        },
        selection,
        model,
        select_seconds,
        train_seconds,
    })
}

/// One training-set size and seed of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepPoint {
    pub size: usize,
    pub seed: u64,
}

/// Fits and scores every sweep point. `train_rows` returns the full-width
/// training rows at the given pool indices; `test_columns` returns the listed
/// columns of every test row with the test labels.
#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    label: &str,
    pool_labels: &[u16],
    class_count: usize,
    points: &[SweepPoint],
    per_class: usize,
    svm: &SvmParams,
    mut train_rows: impl FnMut(&[usize]) -> Result<Array2<f64>, PipelineError>,
    mut test_columns: impl FnMut(&[usize]) -> Result<(Array2<f64>, Vec<u16>), PipelineError>,
) -> Result<Vec<AccuracyRow>, PipelineError> {
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let idx = stratified_indices(pool_labels, class_count, p.size, p.seed)?;
        let x = train_rows(&idx)?;
        let y: Vec<u16> = idx.iter().map(|&i| pool_labels[i]).collect();
        let fitted = fit_pipeline(x.view(), &y, per_class, svm)?;
        let (test, test_labels) = test_columns(&fitted.selection.union)?;
        let accuracy = fitted.score_selected(test, &test_labels)?;
        rows.push(AccuracyRow {
            config: label.to_string(),
            train_size: p.size,
            seed: p.seed,
            selected_dims: fitted.selection.union.len(),
            feature_richness: fitted.selection.feature_richness(),
            accuracy,
            unconverged_classes: fitted.model.unconverged().len(),
            select_seconds: fitted.select_seconds,
            train_seconds: fitted.train_seconds,
        });
    }
    Ok(rows)
}

/// Reads the split recorded in a store's sidecar, if any.
pub fn store_split(path: &Path) -> Option<Split> {
    StoreManifest::read(path).ok().map(|m| m.split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ClassifyError;

    #[test]
    fn exit_codes() {
        assert_eq!(PipelineError::Usage("x".into()).exit_code(), 2);
        assert_eq!(PipelineError::Data(DataError::Invalid("x".into())).exit_code(), 3);
        assert_eq!(PipelineError::Classify(ClassifyError::NonFinite(3)).exit_code(), 4);
        assert_eq!(PipelineError::Scatter(ScatterError::NonPositiveK(0.0)).exit_code(), 2);
        assert_eq!(
            PipelineError::Featsel(FeatselError::CountTooLarge { count: 9, dims: 3, rows: 5 }).exit_code(),
            2
        );
    }

    #[test]
    fn empty_selection_is_an_error() {
        let x = Array2::from_shape_fn((20, 4), |(i, j)| ((i * 7 + j * 3) % 5) as f64);
        let y: Vec<u16> = (0..20).map(|i| (i % 2) as u16).collect();
        let err = fit_pipeline(x.view(), &y, 0, &SvmParams::default()).unwrap_err();
        assert!(matches!(err, PipelineError::Usage(_)));
    }
}
