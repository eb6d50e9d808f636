//! `RPDS` dataset files.
//!
//! Little-endian layout:
//!
//! ```text
//! header:  magic "RPDS" | version u16 | m u32 | n u32 | record count u64
//! record:  kind u8 | bandwidth f64 | reflection f64 | noise_std f64
//!          | target count u32 | target bins u32 × count
//!          | m × (re f32, im f32) | ceil(m / 8) label bytes
//! ```
//!
//! Label bit `i` lives in byte `i / 8` at bit position `i % 8` (LSB first).
//! Kind codes: 0 targets, 1 empty, 2 contrastive.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex32;

use super::{Dataset, ProfileKind, ProfileMeta, RangeProfile};
use crate::error::{check_len, Error, Result};

pub const MAGIC: [u8; 4] = *b"RPDS";
pub const FORMAT_VERSION: u16 = 1;

pub struct DatasetWriter<W: Write> {
    out: W,
    m: usize,
    expected: u64,
    written: u64,
}

impl DatasetWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>, m: usize, n: usize, count: u64) -> Result<Self> {
        let f = File::create(path)?;
        DatasetWriter::new(BufWriter::new(f), m, n, count)
    }
}

impl<W: Write> DatasetWriter<W> {
    pub fn new(mut out: W, m: usize, n: usize, count: u64) -> Result<Self> {
        out.write_all(&MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&to_u32(m)?.to_le_bytes())?;
        out.write_all(&to_u32(n)?.to_le_bytes())?;
        out.write_all(&count.to_le_bytes())?;
        Ok(DatasetWriter {
            out,
            m,
            expected: count,
            written: 0,
        })
    }

    pub fn write_profile(&mut self, p: &RangeProfile) -> Result<()> {
        check_len("profile length", self.m, p.samples.len())?;
        check_len("label length", self.m, p.labels.len())?;
        if self.written == self.expected {
            return Err(Error::Malformed(format!(
                "header announced {} records",
                self.expected
            )));
        }
        let mut buf = Vec::with_capacity(29 + 4 * p.target_bins.len() + 8 * self.m + self.m.div_ceil(8));
        buf.push(p.meta.kind.code());
        buf.extend_from_slice(&p.meta.bandwidth_hz.to_le_bytes());
        buf.extend_from_slice(&p.meta.reflection_coeff.to_le_bytes());
        buf.extend_from_slice(&p.meta.noise_std.to_le_bytes());
        buf.extend_from_slice(&to_u32(p.target_bins.len())?.to_le_bytes());
        for &b in &p.target_bins {
            buf.extend_from_slice(&to_u32(b)?.to_le_bytes());
        }
        for s in &p.samples {
            buf.extend_from_slice(&s.re.to_le_bytes());
            buf.extend_from_slice(&s.im.to_le_bytes());
        }
        let mut bits = vec![0u8; self.m.div_ceil(8)];
        for (i, &l) in p.labels.iter().enumerate() {
            if l {
                bits[i / 8] |= 1 << (i % 8);
            }
        }
        buf.extend_from_slice(&bits);
        self.out.write_all(&buf)?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        if self.written != self.expected {
            return Err(Error::Malformed(format!(
                "wrote {} of {} announced records",
                self.written, self.expected
            )));
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

fn to_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Malformed(format!("{v} does not fit in u32")))
}

/// Streaming reader; yields the header's record count then stops.
pub struct DatasetReader<R: Read> {
    input: R,
    pub m: usize,
    pub n: usize,
    pub count: u64,
    read: u64,
}

impl DatasetReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        DatasetReader::new(BufReader::new(File::open(path)?))
    }
}

fn truncated(e: io::Error, what: &str) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::Malformed(format!("file ends inside {what}"))
    } else {
        Error::Io(e)
    }
}

impl<R: Read> DatasetReader<R> {
    pub fn new(mut input: R) -> Result<Self> {
        let mut head = [0u8; 22];
        input.read_exact(&mut head).map_err(|e| truncated(e, "header"))?;
        let found: [u8; 4] = head[0..4].try_into().unwrap();
        if found != MAGIC {
            return Err(Error::BadMagic {
                expected: MAGIC,
                found,
            });
        }
        let version = u16::from_le_bytes(head[4..6].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let m = u32::from_le_bytes(head[6..10].try_into().unwrap()) as usize;
        let n = u32::from_le_bytes(head[10..14].try_into().unwrap()) as usize;
        let count = u64::from_le_bytes(head[14..22].try_into().unwrap());
        Ok(DatasetReader {
            input,
            m,
            n,
            count,
            read: 0,
        })
    }

    fn read_record(&mut self) -> Result<RangeProfile> {
        let m = self.m;
        let mut fixed = [0u8; 29];
        self.input.read_exact(&mut fixed).map_err(|e| truncated(e, "record header"))?;
        let kind = ProfileKind::from_code(fixed[0])
            .ok_or_else(|| Error::Malformed(format!("unknown profile kind {}", fixed[0])))?;
        let f = |i: usize| f64::from_le_bytes(fixed[i..i + 8].try_into().unwrap());
        let meta = ProfileMeta {
            bandwidth_hz: f(1),
            reflection_coeff: f(9),
            noise_std: f(17),
            kind,
        };
        let ntargets = u32::from_le_bytes(fixed[25..29].try_into().unwrap()) as usize;
        if ntargets > m {
            return Err(Error::Malformed(format!("{ntargets} targets in {m} bins")));
        }
        let mut body = vec![0u8; 4 * ntargets + 8 * m + m.div_ceil(8)];
        self.input.read_exact(&mut body).map_err(|e| truncated(e, "record body"))?;
        let (bins_raw, rest) = body.split_at(4 * ntargets);
        let (samples_raw, labels_raw) = rest.split_at(8 * m);
        let target_bins: Vec<usize> = bins_raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect();
        if target_bins.iter().any(|&b| b >= m) {
            return Err(Error::Malformed("target bin outside the profile".into()));
        }
        let samples = samples_raw
            .chunks_exact(8)
            .map(|c| {
                Complex32::new(
                    f32::from_le_bytes(c[0..4].try_into().unwrap()),
                    f32::from_le_bytes(c[4..8].try_into().unwrap()),
                )
            })
            .collect();
        let labels = (0..m).map(|i| labels_raw[i / 8] & (1 << (i % 8)) != 0).collect();
        Ok(RangeProfile {
            samples,
            labels,
            target_bins,
            meta,
        })
    }
}

impl<R: Read> Iterator for DatasetReader<R> {
    type Item = Result<RangeProfile>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.read == self.count {
            return None;
        }
        self.read += 1;
        Some(self.read_record())
    }
}

pub fn write_dataset(path: impl AsRef<Path>, d: &Dataset) -> Result<()> {
    let mut w = DatasetWriter::create(path, d.m, d.n, d.profiles.len() as u64)?;
    for p in &d.profiles {
        w.write_profile(p)?;
    }
    w.finish()?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let reader = DatasetReader::open(path)?;
    let (m, n) = (reader.m, reader.n);
    let profiles = reader.collect::<Result<Vec<_>>>()?;
    Ok(Dataset { m, n, profiles })
}
