//! Binary feature store.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "SCTR"
//!      4     4  version (u32)
//!      8     8  config hash (u64)
//!     16     8  vector length d (u64)
//!     24     8  row count n (u64)
//!     32     4  flags (u32): bit 0 log enabled, bit 1 labels present
//!     36     4  reserved, zero
//!     40  4·n·d  rows, f32 row-major
//!          2·n  labels, u16 (when flagged)
//!            8  index map length m (u64), equal to d
//!         12·m  index records
//! ```
//!
//! All integers and floats are little-endian. An index record is
//! `resolution, layer, j1, j2, r1, r2` (u8 each, 0xFF for absent),
//! `row, col` (u16 each), `channel` (u8) and a flag byte whose bit 0 marks
//! the log as applied.
//!
//! A TOML sidecar at `<store>.toml` records the extraction config.

use super::{DataError, Split};
use crate::scatter::{FeatureDescriptor, ScatterConfig};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

pub const STORE_MAGIC: [u8; 4] = *b"SCTR";
pub const STORE_VERSION: u32 = 1;
pub const FLAG_LOG: u32 = 1;
pub const FLAG_LABELS: u32 = 2;
const HEADER_LEN: u64 = 40;
const RECORD_LEN: usize = 12;
const ABSENT: u8 = 0xFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreHeader {
    pub config_hash: u64,
    pub dims: usize,
    pub rows: usize,
    pub flags: u32,
}

impl StoreHeader {
    pub fn has_labels(&self) -> bool {
        self.flags & FLAG_LABELS != 0
    }

    pub fn log_enabled(&self) -> bool {
        self.flags & FLAG_LOG != 0
    }

    fn encode(&self) -> [u8; HEADER_LEN as usize] {
        let mut b = [0u8; HEADER_LEN as usize];
        b[0..4].copy_from_slice(&STORE_MAGIC);
        b[4..8].copy_from_slice(&STORE_VERSION.to_le_bytes());
        b[8..16].copy_from_slice(&self.config_hash.to_le_bytes());
        b[16..24].copy_from_slice(&(self.dims as u64).to_le_bytes());
        b[24..32].copy_from_slice(&(self.rows as u64).to_le_bytes());
        b[32..36].copy_from_slice(&self.flags.to_le_bytes());
        b
    }

    fn decode(path: &Path, b: &[u8; HEADER_LEN as usize]) -> Result<Self, DataError> {
        let magic: [u8; 4] = b[0..4].try_into().unwrap();
        if magic != STORE_MAGIC {
            return Err(DataError::BadMagic {
                path: path.to_path_buf(),
                found: magic,
                expected: STORE_MAGIC,
            });
        }
        let version = u32::from_le_bytes(b[4..8].try_into().unwrap());
        if version != STORE_VERSION {
            return Err(DataError::VersionMismatch {
                path: path.to_path_buf(),
                found: version,
                expected: STORE_VERSION,
            });
        }
        let u64_at = |o: usize| u64::from_le_bytes(b[o..o + 8].try_into().unwrap());
        Ok(StoreHeader {
            config_hash: u64_at(8),
            dims: u64_at(16) as usize,
            rows: u64_at(24) as usize,
            flags: u32::from_le_bytes(b[32..36].try_into().unwrap()),
        })
    }

    fn labels_offset(&self) -> u64 {
        HEADER_LEN + 4 * (self.rows as u64) * (self.dims as u64)
    }

    fn index_offset(&self) -> u64 {
        self.labels_offset() + if self.has_labels() { 2 * self.rows as u64 } else { 0 }
    }

    fn file_len(&self) -> u64 {
        self.index_offset() + 8 + (RECORD_LEN * self.dims) as u64
    }
}

fn encode_descriptor(d: &FeatureDescriptor) -> [u8; RECORD_LEN] {
    let opt = |v: Option<u8>| v.unwrap_or(ABSENT);
    let mut b = [0u8; RECORD_LEN];
    b[0] = d.resolution;
    b[1] = d.layer;
    b[2] = opt(d.j1);
    b[3] = opt(d.j2);
    b[4] = opt(d.r1);
    b[5] = opt(d.r2);
    b[6..8].copy_from_slice(&d.row.to_le_bytes());
    b[8..10].copy_from_slice(&d.col.to_le_bytes());
    b[10] = d.channel;
    b[11] = d.log_applied as u8;
    b
}

fn decode_descriptor(b: &[u8]) -> FeatureDescriptor {
    let opt = |v: u8| (v != ABSENT).then_some(v);
    FeatureDescriptor {
        resolution: b[0],
        layer: b[1],
        j1: opt(b[2]),
        j2: opt(b[3]),
        r1: opt(b[4]),
        r2: opt(b[5]),
        row: u16::from_le_bytes([b[6], b[7]]),
        col: u16::from_le_bytes([b[8], b[9]]),
        channel: b[10],
        log_applied: b[11] & 1 != 0,
    }
}

/// Extraction settings written next to a store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreManifest {
    /// Hex form of the header's config hash.
    pub config_hash: String,
    pub split: Split,
    pub rows: usize,
    pub dims: usize,
    pub config: ScatterConfig,
}

impl StoreManifest {
    pub fn new(config: &ScatterConfig, split: Split, rows: usize, dims: usize) -> Self {
        StoreManifest {
            config_hash: format!("{:016x}", config.hash()),
            split,
            rows,
            dims,
            config: config.clone(),
        }
    }

    pub fn sidecar_path(store: &Path) -> PathBuf {
        let mut s = store.as_os_str().to_owned();
        s.push(".toml");
        PathBuf::from(s)
    }

    pub fn write(&self, store: &Path) -> Result<(), DataError> {
        let text = toml::to_string(self).map_err(|e| DataError::Invalid(e.to_string()))?;
        super::write_atomic(&Self::sidecar_path(store), |w| w.write_all(text.as_bytes()))
    }

    pub fn read(store: &Path) -> Result<Self, DataError> {
        let path = Self::sidecar_path(store);
        let text = std::fs::read_to_string(&path).map_err(|e| DataError::io(&path, e))?;
        toml::from_str(&text).map_err(|e| DataError::Corrupt {
            path,
            what: e.to_string(),
        })
    }
}

/// Appends rows to a temporary file; [`FeatureStoreWriter::finish`] writes
/// the trailer and moves the file into place.
pub struct FeatureStoreWriter {
    path: PathBuf,
    tmp: tempfile::NamedTempFile,
    out: BufWriter<File>,
    header: StoreHeader,
    layout: Vec<FeatureDescriptor>,
}

impl FeatureStoreWriter {
    pub fn create(
        path: &Path,
        config_hash: u64,
        log_enabled: bool,
        layout: Vec<FeatureDescriptor>,
    ) -> Result<Self, DataError> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| DataError::io(dir, e))?;
        let file = tmp.reopen().map_err(|e| DataError::io(path, e))?;
        let header = StoreHeader {
            config_hash,
            dims: layout.len(),
            rows: 0,
            flags: if log_enabled { FLAG_LOG } else { 0 },
        };
        let mut out = BufWriter::new(file);
        out.write_all(&header.encode()).map_err(|e| DataError::io(path, e))?;
        Ok(FeatureStoreWriter {
            path: path.to_path_buf(),
            tmp,
            out,
            header,
            layout,
        })
    }

    pub fn rows_written(&self) -> usize {
        self.header.rows
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<(), DataError> {
        if row.len() != self.header.dims {
            return Err(DataError::Invalid(format!(
                "row of length {}, store width {}",
                row.len(),
                self.header.dims
            )));
        }
        for &v in row {
            self.out
                .write_all(&(v as f32).to_le_bytes())
                .map_err(|e| DataError::io(&self.path, e))?;
        }
        self.header.rows += 1;
        Ok(())
    }

    pub fn finish(mut self, labels: Option<&[u16]>) -> Result<StoreHeader, DataError> {
        let io = |e| DataError::io(&self.path, e);
        if let Some(labels) = labels {
            if labels.len() != self.header.rows {
                return Err(DataError::Invalid(format!(
                    "{} labels for {} rows",
                    labels.len(),
                    self.header.rows
                )));
            }
            self.header.flags |= FLAG_LABELS;
            for &l in labels {
                self.out.write_all(&l.to_le_bytes()).map_err(io)?;
            }
        }
        self.out.write_all(&(self.layout.len() as u64).to_le_bytes()).map_err(io)?;
        for d in &self.layout {
            self.out.write_all(&encode_descriptor(d)).map_err(io)?;
        }
        self.out.seek(SeekFrom::Start(0)).map_err(io)?;
        self.out.write_all(&self.header.encode()).map_err(io)?;
        self.out.flush().map_err(io)?;
        self.out.get_ref().sync_all().map_err(io)?;
        drop(self.out);
        self.tmp.persist(&self.path).map_err(|e| DataError::io(&self.path, e.error))?;
        Ok(self.header)
    }
}

/// Random-access reader; only the requested rows and columns are
/// materialised.
pub struct FeatureStoreReader {
    path: PathBuf,
    file: BufReader<File>,
    header: StoreHeader,
    labels: Option<Vec<u16>>,
    layout: Vec<FeatureDescriptor>,
}

impl FeatureStoreReader {
    pub fn open(path: &Path) -> Result<Self, DataError> {
        let io = |e| DataError::io(path, e);
        let mut file = BufReader::new(File::open(path).map_err(io)?);
        let len = file.get_ref().metadata().map_err(io)?.len();
        let mut hb = [0u8; HEADER_LEN as usize];
        if len < HEADER_LEN {
            return Err(DataError::Truncated {
                path: path.to_path_buf(),
                offset: len,
                record_size: HEADER_LEN as usize,
                complete_records: 0,
            });
        }
        file.read_exact(&mut hb).map_err(io)?;
        let header = StoreHeader::decode(path, &hb)?;
        if len != header.file_len() {
            return Err(DataError::Corrupt {
                path: path.to_path_buf(),
                what: format!("{len} bytes, header implies {}", header.file_len()),
            });
        }
        file.seek(SeekFrom::Start(header.labels_offset())).map_err(io)?;
        let labels = if header.has_labels() {
            let mut buf = vec![0u8; 2 * header.rows];
            file.read_exact(&mut buf).map_err(io)?;
            Some(buf.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect())
        } else {
            None
        };
        let mut mb = [0u8; 8];
        file.read_exact(&mut mb).map_err(io)?;
        let m = u64::from_le_bytes(mb) as usize;
        if m != header.dims {
            return Err(DataError::Corrupt {
                path: path.to_path_buf(),
                what: format!("index map has {m} entries for width {}", header.dims),
            });
        }
        let mut buf = vec![0u8; RECORD_LEN * m];
        file.read_exact(&mut buf).map_err(io)?;
        let layout = buf.chunks_exact(RECORD_LEN).map(decode_descriptor).collect();
        Ok(FeatureStoreReader {
            path: path.to_path_buf(),
            file,
            header,
            labels,
            layout,
        })
    }

    pub fn header(&self) -> &StoreHeader {
        &self.header
    }

    pub fn labels(&self) -> Option<&[u16]> {
        self.labels.as_deref()
    }

    pub fn layout(&self) -> &[FeatureDescriptor] {
        &self.layout
    }

    /// Reads `rows` (all when `None`) restricted to `columns` (all when
    /// `None`), widened to f64.
    pub fn read(&mut self, rows: Option<&[usize]>, columns: Option<&[usize]>) -> Result<Array2<f64>, DataError> {
        let d = self.header.dims;
        let all_rows: Vec<usize>;
        let rows = match rows {
            Some(r) => r,
            None => {
                all_rows = (0..self.header.rows).collect();
                &all_rows
            }
        };
        let all_cols: Vec<usize>;
        let cols = match columns {
            Some(c) => c,
            None => {
                all_cols = (0..d).collect();
                &all_cols
            }
        };
        if let Some(&r) = rows.iter().find(|&&r| r >= self.header.rows) {
            return Err(DataError::Invalid(format!("row {r} of {}", self.header.rows)));
        }
        if let Some(&c) = cols.iter().find(|&&c| c >= d) {
            return Err(DataError::Invalid(format!("column {c} of {d}")));
        }
        let mut out = Array2::zeros((rows.len(), cols.len()));
        let mut buf = vec![0u8; 4 * d];
        let mut next = None;
        for (k, &r) in rows.iter().enumerate() {
            if next != Some(r) {
                let off = HEADER_LEN + (4 * r * d) as u64;
                self.file.seek(SeekFrom::Start(off)).map_err(|e| DataError::io(&self.path, e))?;
            }
            self.file.read_exact(&mut buf).map_err(|e| DataError::io(&self.path, e))?;
            next = Some(r + 1);
            let mut row = out.row_mut(k);
            for (o, &c) in row.iter_mut().zip(cols) {
                *o = f32::from_le_bytes(buf[4 * c..4 * c + 4].try_into().unwrap()) as f64;
            }
        }
        Ok(out)
    }
}

/// A whole store held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    pub config_hash: u64,
    pub log_enabled: bool,
    pub features: Array2<f64>,
    pub labels: Option<Vec<u16>>,
    pub layout: Vec<FeatureDescriptor>,
}

impl FeatureStore {
    pub fn write(&self, path: &Path) -> Result<StoreHeader, DataError> {
        if self.layout.len() != self.features.ncols() {
            return Err(DataError::Invalid(format!(
                "layout has {} entries for width {}",
                self.layout.len(),
                self.features.ncols()
            )));
        }
        let mut w = FeatureStoreWriter::create(path, self.config_hash, self.log_enabled, self.layout.clone())?;
        for row in self.features.rows() {
            w.push_row(&row.to_vec())?;
        }
        w.finish(self.labels.as_deref())
    }

    pub fn read(path: &Path) -> Result<Self, DataError> {
        let mut r = FeatureStoreReader::open(path)?;
        let features = r.read(None, None)?;
        Ok(FeatureStore {
            config_hash: r.header.config_hash,
            log_enabled: r.header.log_enabled(),
            features,
            labels: r.labels,
            layout: r.layout,
        })
    }
}
