//! Binary and CSV serialization of sample batches.
//!
//! Binary layout (little endian): magic `LDGS`, version `u16`, domain tag
//! `u8`, `n: u64`, `count: u64`, `seed: u64`, then the payload. Strings are
//! packed eight symbols per byte (bit set = `+1`), vectors are `f64`
//! coordinates, and matrices are their upper triangles in row-major order.

use std::io::{Read, Write};

use super::matrix::SymMatrix;
use super::sampling::{Payload, SampleBatch};
use super::spec::Domain;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LDGS";
const VERSION: u16 = 1;

pub fn write_batch<W: Write>(batch: &SampleBatch, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[batch.domain.tag()])?;
    w.write_all(&(batch.n as u64).to_le_bytes())?;
    w.write_all(&(batch.count as u64).to_le_bytes())?;
    w.write_all(&batch.seed.to_le_bytes())?;
    match &batch.payload {
        Payload::Strings(s) => {
            for row in s.chunks(batch.n) {
                let mut bytes = vec![0u8; batch.n.div_ceil(8)];
                for (i, &v) in row.iter().enumerate() {
                    if v == 1 {
                        bytes[i / 8] |= 1 << (i % 8);
                    }
                }
                w.write_all(&bytes)?;
            }
        }
        Payload::Vectors(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Payload::Matrices(ms) => {
            for m in ms {
                for x in m.upper() {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_batch<R: Read>(mut r: R) -> Result<SampleBatch> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    let version = u16::from_le_bytes(b2);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut b1 = [0u8; 1];
    r.read_exact(&mut b1)?;
    let domain = Domain::from_tag(b1[0]).ok_or_else(|| Error::Format(format!("unknown domain tag {}", b1[0])))?;
    let n = read_u64(&mut r)? as usize;
    let count = read_u64(&mut r)? as usize;
    let seed = read_u64(&mut r)?;
    let payload = match domain {
        Domain::Strings => {
            let mut out = Vec::with_capacity(n * count);
            let mut bytes = vec![0u8; n.div_ceil(8)];
            for _ in 0..count {
                r.read_exact(&mut bytes)?;
                out.extend((0..n).map(|i| if bytes[i / 8] >> (i % 8) & 1 == 1 { 1i8 } else { -1 }));
            }
            Payload::Strings(out)
        }
        Domain::Vectors => Payload::Vectors(read_f64s(&mut r, n * count)?),
        Domain::Matrices => {
            let tri = n * (n + 1) / 2;
            let mut ms = Vec::with_capacity(count);
            for _ in 0..count {
                let upper = read_f64s(&mut r, tri)?;
                ms.push(SymMatrix::from_upper(n, &upper).expect("length checked"));
            }
            Payload::Matrices(ms)
        }
    };
    Ok(SampleBatch {
        domain,
        n,
        count,
        seed,
        label: String::new(),
        payload,
    })
}

/// One row per sample; matrices are written as their upper triangles.
pub fn write_csv<W: Write>(batch: &SampleBatch, mut w: W) -> Result<()> {
    let width = match batch.domain {
        Domain::Matrices => batch.n * (batch.n + 1) / 2,
        _ => batch.n,
    };
    let header: Vec<String> = (0..width).map(|i| format!("x{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for i in 0..batch.count {
        let row: Vec<String> = match &batch.payload {
            Payload::Strings(_) => batch.string(i).unwrap_or(&[]).iter().map(|v| v.to_string()).collect(),
            Payload::Vectors(_) => batch.vector(i).unwrap_or(&[]).iter().map(|v| format!("{v:e}")).collect(),
            Payload::Matrices(ms) => ms[i].upper().iter().map(|v| format!("{v:e}")).collect(),
        };
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, len: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; len * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}
