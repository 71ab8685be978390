use std::io::{Read, Write};
use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::RealLinearOperator;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SPINOP01";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub label: String,
    pub rows: usize,
    pub cols: usize,
    pub nodes: usize,
    pub dimension: usize,
    pub local_rank: usize,
    pub realified: bool,
    pub mesh_hash: String,
}

/// Layout: magic, u64 header length, JSON header, then rows·cols f64 row-major, all little-endian.
pub fn dump_operator(op: &RealLinearOperator, path: &Path) -> Result<DumpHeader> {
    let header = DumpHeader {
        label: op.label.clone(),
        rows: op.matrix.nrows(),
        cols: op.matrix.ncols(),
        nodes: op.space.nodes(),
        dimension: op.space.dim.n(),
        local_rank: op.space.rank(),
        realified: op.space.realified,
        mesh_hash: format!("{:016x}", op.space.mesh_hash),
    };
    let json = serde_json::to_vec(&header)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(MAGIC)?;
    f.write_all(&(json.len() as u64).to_le_bytes())?;
    f.write_all(&json)?;
    for i in 0..header.rows {
        for j in 0..header.cols {
            f.write_all(&op.matrix[(i, j)].to_le_bytes())?;
        }
    }
    f.flush()?;
    Ok(header)
}

pub fn read_dump(path: &Path) -> Result<(DumpHeader, Mat<f64>)> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Invalid("not an operator dump".into()));
    }
    let mut len = [0u8; 8];
    f.read_exact(&mut len)?;
    let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
    f.read_exact(&mut json)?;
    let header: DumpHeader = serde_json::from_slice(&json)?;
    let mut m = Mat::<f64>::zeros(header.rows, header.cols);
    let mut buf = [0u8; 8];
    for i in 0..header.rows {
        for j in 0..header.cols {
            f.read_exact(&mut buf)?;
            m[(i, j)] = f64::from_le_bytes(buf);
        }
    }
    Ok((header, m))
}
