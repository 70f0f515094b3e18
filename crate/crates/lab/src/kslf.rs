//! Binary dump of a form pair.
//!
//! All fields little-endian:
//!
//! ```text
//! b"KSLF"  u64 version  u64 dim  u64 nnz_e  u64 nnz_g
//! nnz_e × (u64 row, u64 col, f64 value)     strain form A_E
//! nnz_g × (u64 row, u64 col, f64 value)     gradient form A_G
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use shellkorn_core::solver::FormPair;
use shellkorn_core::sparse::{Csr, Triplets};

use crate::error::{LabError, Result};

pub const MAGIC: &[u8; 4] = b"KSLF";
pub const VERSION: u64 = 1;

pub fn write_pair<W: Write>(mut w: W, a_e: &Csr, a_g: &Csr) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    for v in [VERSION, a_e.dim() as u64, a_e.nnz() as u64, a_g.nnz() as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    for m in [a_e, a_g] {
        for (i, j, v) in m.triplets() {
            w.write_all(&(i as u64).to_le_bytes())?;
            w.write_all(&(j as u64).to_le_bytes())?;
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn invalid(msg: &str) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string())
}

pub fn read_pair<R: Read>(mut r: R) -> std::io::Result<(Csr, Csr)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("not a KSLF file"));
    }
    if read_u64(&mut r)? != VERSION {
        return Err(invalid("unsupported KSLF version"));
    }
    let dim = read_u64(&mut r)? as usize;
    let nnz = [read_u64(&mut r)?, read_u64(&mut r)?];
    let mut out = Vec::with_capacity(2);
    for count in nnz {
        let mut t = Triplets::new(dim);
        for _ in 0..count {
            let (i, j) = (read_u64(&mut r)? as usize, read_u64(&mut r)? as usize);
            let v = f64::from_bits(read_u64(&mut r)?);
            if i >= dim || j >= dim {
                return Err(invalid("triplet index out of range"));
            }
            t.push(i, j, v);
        }
        out.push(t.to_csr());
    }
    let g = out.pop().expect("two matrices");
    let e = out.pop().expect("two matrices");
    Ok((e, g))
}

pub fn write_file(path: &Path, fp: &FormPair) -> Result<()> {
    let f = File::create(path).map_err(|e| LabError::io(path, e))?;
    write_pair(BufWriter::new(f), &fp.a_e, &fp.a_g).map_err(|e| LabError::io(path, e))
}

pub fn read_file(path: &Path) -> Result<(Csr, Csr)> {
    let f = File::open(path).map_err(|e| LabError::io(path, e))?;
    read_pair(BufReader::new(f)).map_err(|e| LabError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use shellkorn_core::geometry::circular_cylinder;
    use shellkorn_core::operators::{BcTag, GradKind};
    use shellkorn_core::solver::{assemble_forms, Grid3};

    #[test]
    fn dump_reads_back_bit_exact() {
        let s = circular_cylinder(1.0, 2.0).unwrap();
        let grid = Grid3::new(&s, 0.1, 2, 8, 4).unwrap();
        let fp = assemble_forms(&s, &grid, 0.1, BcTag::V2, GradKind::Full).unwrap();
        let mut buf = Vec::new();
        write_pair(&mut buf, &fp.a_e, &fp.a_g).unwrap();
        assert_eq!(&buf[..4], MAGIC);
        assert_eq!(buf.len(), 4 + 32 + 24 * (fp.a_e.nnz() + fp.a_g.nnz()));
        let (e, g) = read_pair(buf.as_slice()).unwrap();
        let bits = |m: &Csr| m.triplets().map(|(i, j, v)| (i, j, v.to_bits())).collect::<Vec<_>>();
        assert_eq!(bits(&e), bits(&fp.a_e));
        assert_eq!(bits(&g), bits(&fp.a_g));
        assert!(read_pair(&b"KSLX"[..]).is_err());
    }
}
