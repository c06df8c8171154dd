//! Trained model file.
//!
//! ```text
//! magic "GSVM", version u32, gamma f64, c f64, dims u64, class count u32
//! per class:
//!   class id u16, converged u8, reserved u8, iterations u64,
//!   n_sv u64, bias f64,
//!   coefficients n_sv × f64, training-row indices n_sv × u32,
//!   support vectors n_sv × dims × f32
//! ```
//!
//! Little-endian throughout. Support vectors are stored as f32, so a loaded
//! model can differ from the in-memory one by f32 rounding of those rows.

use super::DataError;
use crate::classify::{BinarySvm, SvmModel};
use ndarray::Array2;
use std::io::Read;
use std::path::Path;

pub const MODEL_MAGIC: [u8; 4] = *b"GSVM";
pub const MODEL_VERSION: u32 = 1;

pub fn write_model(path: &Path, model: &SvmModel) -> Result<(), DataError> {
    super::write_atomic(path, |w| {
        w.write_all(&MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        w.write_all(&model.gamma.to_le_bytes())?;
        w.write_all(&model.c.to_le_bytes())?;
        w.write_all(&(model.dims as u64).to_le_bytes())?;
        w.write_all(&(model.classes.len() as u32).to_le_bytes())?;
        for b in &model.classes {
            w.write_all(&b.class.to_le_bytes())?;
            w.write_all(&[b.converged as u8, 0])?;
            w.write_all(&b.iterations.to_le_bytes())?;
            w.write_all(&(b.coef.len() as u64).to_le_bytes())?;
            w.write_all(&b.bias.to_le_bytes())?;
            for &a in &b.coef {
                w.write_all(&a.to_le_bytes())?;
            }
            for &i in &b.sv_indices {
                w.write_all(&i.to_le_bytes())?;
            }
            for &v in b.support.iter() {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        Ok(())
    })
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DataError> {
        if self.bytes.len() - self.pos < n {
            return Err(DataError::Truncated {
                path: self.path.to_path_buf(),
                offset: self.pos as u64,
                record_size: n,
                complete_records: 0,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], DataError> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn u8(&mut self) -> Result<u8, DataError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DataError> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32, DataError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, DataError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, DataError> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn f32(&mut self) -> Result<f32, DataError> {
        Ok(f32::from_le_bytes(self.array()?))
    }

    /// Guards allocations against corrupt counts.
    fn check_remaining(&self, bytes: u64) -> Result<(), DataError> {
        if bytes > (self.bytes.len() - self.pos) as u64 {
            return Err(DataError::Truncated {
                path: self.path.to_path_buf(),
                offset: self.pos as u64,
                record_size: bytes as usize,
                complete_records: 0,
            });
        }
        Ok(())
    }
}

pub fn read_model(path: &Path) -> Result<SvmModel, DataError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| DataError::io(path, e))?;
    let mut cur = Cursor { path, bytes: &bytes, pos: 0 };
    let magic: [u8; 4] = cur.array()?;
    if magic != MODEL_MAGIC {
        return Err(DataError::BadMagic {
            path: path.to_path_buf(),
            found: magic,
            expected: MODEL_MAGIC,
        });
    }
    let version = cur.u32()?;
    if version != MODEL_VERSION {
        return Err(DataError::VersionMismatch {
            path: path.to_path_buf(),
            found: version,
            expected: MODEL_VERSION,
        });
    }
    let gamma = cur.f64()?;
    let c = cur.f64()?;
    let dims = cur.u64()? as usize;
    let count = cur.u32()? as usize;
    let mut classes = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let class = cur.u16()?;
        let converged = cur.u8()? != 0;
        cur.u8()?;
        let iterations = cur.u64()?;
        let n_sv = cur.u64()?;
        let bias = cur.f64()?;
        cur.check_remaining(n_sv.saturating_mul(12 + 4 * dims as u64))?;
        let n_sv = n_sv as usize;
        let coef = (0..n_sv).map(|_| cur.f64()).collect::<Result<Vec<_>, _>>()?;
        let sv_indices = (0..n_sv).map(|_| cur.u32()).collect::<Result<Vec<_>, _>>()?;
        let flat = (0..n_sv * dims)
            .map(|_| cur.f32().map(f64::from))
            .collect::<Result<Vec<_>, _>>()?;
        classes.push(BinarySvm {
            class,
            sv_indices,
            support: Array2::from_shape_vec((n_sv, dims), flat).expect("sized above"),
            coef,
            bias,
            iterations,
            converged,
        });
    }
    if cur.pos != bytes.len() {
        return Err(DataError::Corrupt {
            path: path.to_path_buf(),
            what: format!("{} trailing bytes", bytes.len() - cur.pos),
        });
    }
    Ok(SvmModel { gamma, c, dims, classes })
}
