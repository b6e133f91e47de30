//! Dense matrix export.
//!
//! CSV: one line per matrix row, `re,im` pairs interleaved across columns.
//!
//! Binary (all integers `u64` and all floats `f64`, little-endian):
//!
//! ```text
//! offset  size   field
//! 0       8      magic "TOEPMAT1"
//! 8       8      k (number of levels)
//! 16      8      s (block size)
//! 24      8·k    n_1 .. n_k
//! 24+8k   16·d²  entries row-major, each as (re, im), d = s·n_1···n_k
//! ```

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::matrix::ComplexMatrix;
use crate::symbol::MultiIndex;

pub const BINARY_MAGIC: [u8; 8] = *b"TOEPMAT1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryHeader {
    pub s: usize,
    pub n: MultiIndex,
}

impl BinaryHeader {
    pub fn order(&self) -> usize {
        self.s * self.n.product() as usize
    }
}

pub fn write_csv(m: &ComplexMatrix, mut out: impl Write) -> Result<()> {
    let mut line = String::new();
    for i in 0..m.rows() {
        line.clear();
        for (j, z) in m.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:e},{:e}", z.re, z.im));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_csv(input: impl BufRead) -> Result<ComplexMatrix> {
    let mut rows = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        if !values.len().is_multiple_of(2) {
            return Err(Error::Format(format!("line {}: odd number of fields", lineno + 1)));
        }
        rows.push(values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect::<Vec<_>>());
    }
    ComplexMatrix::from_rows(&rows).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_binary(header: &BinaryHeader, m: &ComplexMatrix, mut out: impl Write) -> Result<()> {
    let d = header.order();
    if m.rows() != d || m.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: m.rows(),
        });
    }
    out.write_all(&BINARY_MAGIC)?;
    out.write_all(&(header.n.k() as u64).to_le_bytes())?;
    out.write_all(&(header.s as u64).to_le_bytes())?;
    for &v in header.n.as_slice() {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * d);
    for i in 0..d {
        buf.clear();
        for z in m.row(i) {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

fn read_u64(input: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_binary(mut input: impl Read) -> Result<(BinaryHeader, ComplexMatrix)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if magic != BINARY_MAGIC {
        return Err(Error::Format("bad magic in matrix dump".into()));
    }
    let k = read_u64(&mut input)? as usize;
    let s = read_u64(&mut input)? as usize;
    if !(1..=3).contains(&k) || s == 0 {
        return Err(Error::Format(format!("bad header: k = {k}, s = {s}")));
    }
    let n = (0..k).map(|_| read_u64(&mut input).map(|v| v as i64)).collect::<Result<Vec<_>>>()?;
    let header = BinaryHeader {
        s,
        n: MultiIndex::new(n).map_err(|e| Error::Format(e.to_string()))?,
    };
    let d = header.order();
    let mut bytes = vec![0u8; 16 * d * d];
    input.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok((header, ComplexMatrix::from_vec(d, d, data)?))
}
