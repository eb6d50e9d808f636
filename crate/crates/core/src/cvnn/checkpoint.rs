//! `RPNN` checkpoint files.
//!
//! Little-endian: magic "RPNN" | version u16 | m u32 | H u32, then f64 data:
//! W1 as (re, im) pairs row-major (H × m), b1 as (re, im) pairs,
//! modReLU biases, W2 row-major (m × H), b2.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::network::NetworkParams;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"RPNN";
pub const FORMAT_VERSION: u16 = 1;

pub fn encode_checkpoint<W: Write>(p: &NetworkParams, mut out: W) -> Result<()> {
    p.check_shapes()?;
    let dim = |v: usize| u32::try_from(v).map_err(|_| Error::Malformed(format!("{v} does not fit in u32")));
    let mut buf = Vec::with_capacity(14 + 8 * p.real_dof());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&dim(p.m)?.to_le_bytes());
    buf.extend_from_slice(&dim(p.hidden)?.to_le_bytes());
    for c in p.w1.iter().chain(&p.b1) {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    for v in p.modrelu_bias.iter().chain(&p.w2).chain(&p.b2) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

fn eof(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::Malformed("checkpoint is truncated".into())
    } else {
        Error::Io(e)
    }
}

pub fn decode_checkpoint<R: Read>(mut input: R) -> Result<NetworkParams> {
    let mut head = [0u8; 14];
    input.read_exact(&mut head).map_err(eof)?;
    let found: [u8; 4] = head[..4].try_into().unwrap();
    if found != MAGIC {
        return Err(Error::BadMagic { expected: MAGIC, found });
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let m = u32::from_le_bytes(head[6..10].try_into().unwrap()) as usize;
    let hidden = u32::from_le_bytes(head[10..14].try_into().unwrap()) as usize;
    let mut p = NetworkParams::zeros(m, hidden);
    let mut body = vec![0u8; 8 * p.real_dof()];
    input.read_exact(&mut body).map_err(eof)?;
    let mut values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut next = || values.next().expect("body sized from header");
    for c in p.w1.iter_mut().chain(p.b1.iter_mut()) {
        let re = next();
        *c = Complex64::new(re, next());
    }
    for v in p
        .modrelu_bias
        .iter_mut()
        .chain(p.w2.iter_mut())
        .chain(p.b2.iter_mut())
    {
        *v = next();
    }
    Ok(p)
}

pub fn write_checkpoint(path: impl AsRef<Path>, p: &NetworkParams) -> Result<()> {
    encode_checkpoint(p, BufWriter::new(File::create(path)?))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<NetworkParams> {
    decode_checkpoint(BufReader::new(File::open(path)?))
}
