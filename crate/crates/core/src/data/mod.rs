//! Dataset loading, subsampling, and on-disk artifacts.

mod cifar;
mod model_file;
mod store;
mod synthetic;

pub use cifar::{
    load_cifar, read_batch, stratified_indices, stratified_subsample, write_batch, CifarVariant, LabeledImageSet,
    Split, CIFAR_SIDE,
};
pub use model_file::{read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use synthetic::synthetic_textures;
pub use store::{
    FeatureStore, FeatureStoreReader, FeatureStoreWriter, StoreHeader, StoreManifest, FLAG_LABELS, FLAG_LOG, STORE_MAGIC,
    STORE_VERSION,
};

use crate::featsel::OlsSelection;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: file not found")]
    MissingFile { path: PathBuf },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(
        "{path}: truncated at byte {offset}; records are {record_size} bytes, the file holds {complete_records} complete records and a partial one"
    )]
    Truncated {
        path: PathBuf,
        offset: u64,
        record_size: usize,
        complete_records: usize,
    },
    #[error("{path}: label {label} at byte {offset} is outside 0..{class_count}")]
    LabelOutOfRange {
        path: PathBuf,
        offset: u64,
        label: u16,
        class_count: usize,
    },
    #[error("{path}: bad magic {found:?}, expected {expected:?}")]
    BadMagic {
        path: PathBuf,
        found: [u8; 4],
        expected: [u8; 4],
    },
    #[error("{path}: format version {found}, this build reads {expected}")]
    VersionMismatch { path: PathBuf, found: u32, expected: u32 },
    #[error("{path}: {what}")]
    Corrupt { path: PathBuf, what: String },
    #[error("total {total} is not divisible by {classes} classes")]
    NotDivisible { total: usize, classes: usize },
    #[error("class {class} has {available} images, {requested} requested")]
    Unavailable {
        class: u16,
        requested: usize,
        available: usize,
    },
    #[error("{0}")]
    Invalid(String),
}

impl DataError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            DataError::MissingFile { path: path.to_path_buf() }
        } else {
            DataError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed write leaves nothing behind.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), DataError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| DataError::io(dir, e))?;
    {
        let mut w = io::BufWriter::new(tmp.as_file());
        fill(&mut w).map_err(|e| DataError::io(path, e))?;
        w.flush().map_err(|e| DataError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| DataError::io(path, e.error))?;
    Ok(())
}

pub fn write_selection(path: &Path, selection: &OlsSelection) -> Result<(), DataError> {
    let text = selection.to_text();
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}

pub fn read_selection(path: &Path) -> Result<OlsSelection, DataError> {
    let text = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    OlsSelection::from_text(&text).map_err(|e| DataError::Corrupt {
        path: path.to_path_buf(),
        what: e.to_string(),
    })
}
