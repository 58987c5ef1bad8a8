//! Binary parameter checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "NGRADCKP"
//! version  u8       1
//! count    u32      number of records
//! record*  name_len u32, name (utf-8), ndim u32, dims u64 * ndim,
//!          data f64 * product(dims)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{DenseArray, NumgradError, ParamStore};

pub const MAGIC: &[u8; 8] = b"NGRADCKP";
pub const VERSION: u8 = 1;

pub fn write_params<W: Write>(mut w: W, params: &ParamStore) -> Result<(), NumgradError> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&(params.len() as u32).to_le_bytes())?;
    for (name, value) in params.iter() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(value.shape().len() as u32).to_le_bytes())?;
        for &d in value.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in value.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NumgradError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, NumgradError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_params<R: Read>(mut r: R) -> Result<ParamStore, NumgradError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| NumgradError::Checkpoint("file too short for header".into()))?;
    if &magic != MAGIC {
        return Err(NumgradError::Checkpoint("bad magic".into()));
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version)?;
    if version[0] != VERSION {
        return Err(NumgradError::Checkpoint(format!(
            "unsupported version {}",
            version[0]
        )));
    }
    let count = read_u32(&mut r)?;
    let mut params = ParamStore::new();
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name)
            .map_err(|_| NumgradError::Checkpoint("parameter name is not utf-8".into()))?;
        let ndim = read_u32(&mut r)? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(read_u64(&mut r)? as usize);
        }
        let n: usize = shape.iter().product();
        let mut data = Vec::with_capacity(n);
        let mut buf = [0u8; 8];
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        let value = DenseArray::new(shape, data)?;
        if params.insert(&name, value).is_some() {
            return Err(NumgradError::Checkpoint(format!(
                "duplicate parameter '{name}'"
            )));
        }
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(NumgradError::Checkpoint(
            "trailing bytes after last record".into(),
        ));
    }
    Ok(params)
}

pub fn save(path: &Path, params: &ParamStore) -> Result<(), NumgradError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_params(&mut w, params)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ParamStore, NumgradError> {
    read_params(BufReader::new(File::open(path)?))
}
