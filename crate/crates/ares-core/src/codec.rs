//! The `.ares` binary container for compressed datasets.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! [magic  4 bytes] "ARES"
//! [version u16]    1
//! [n       u32]    original dimension
//! [m       u16]    coefficients per record
//! [scaling u8]     0 = raw, 1 = unit
//! [count   u64]    number of records
//! [flags   u8]     bit 0: per-record deltas present
//! per record: id (u64), m coefficients (f64), optional delta (f64)
//! ```
//!
//! The header is exactly 22 bytes and carries only shape — never anything
//! derived from the data — so an archive is self-contained: no side files,
//! fitted matrices, or dataset statistics are needed to decompress.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::fit::{DomainScaling, DomainSpec, PolyRecord};

pub const MAGIC: [u8; 4] = *b"ARES";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_BYTES: u64 = 22;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("not an ares archive (bad magic or unsupported version)")]
    UnsupportedFormat,
    #[error("archive is truncated or corrupt: {0}")]
    CorruptArchive(String),
    #[error("record {id} has shape ({n}, {m}), archive expects ({expected_n}, {expected_m})")]
    DimensionMismatch {
        id: u64,
        n: usize,
        m: usize,
        expected_n: usize,
        expected_m: usize,
    },
    #[error("compressed size must be positive")]
    DivisionByZero,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Archive header: shape of the stored records plus a delta-presence flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AresHeader {
    pub version: u16,
    pub n: u32,
    pub m: u16,
    pub scaling: DomainScaling,
    pub count: u64,
    pub deltas_present: bool,
}

impl AresHeader {
    /// Header describing a homogeneous slice of records.
    pub fn for_records(records: &[PolyRecord], deltas_present: bool) -> Option<Self> {
        let first = records.first()?;
        Some(AresHeader {
            version: FORMAT_VERSION,
            n: first.domain.n() as u32,
            m: first.coeffs.len() as u16,
            scaling: first.domain.scaling(),
            count: records.len() as u64,
            deltas_present,
        })
    }

    pub fn record_bytes(&self) -> u64 {
        8 + 8 * self.m as u64 + if self.deltas_present { 8 } else { 0 }
    }

    /// Exact archive size for this header: `22 + count * (8 + 8m + 8*flag)`.
    pub fn archive_bytes(&self) -> u64 {
        HEADER_BYTES + self.count * self.record_bytes()
    }

    fn encode(&self) -> [u8; HEADER_BYTES as usize] {
        let mut buf = [0u8; HEADER_BYTES as usize];
        buf[0..4].copy_from_slice(&MAGIC);
        buf[4..6].copy_from_slice(&self.version.to_le_bytes());
        buf[6..10].copy_from_slice(&self.n.to_le_bytes());
        buf[10..12].copy_from_slice(&self.m.to_le_bytes());
        buf[12] = match self.scaling {
            DomainScaling::Raw => 0,
            DomainScaling::Unit => 1,
        };
        buf[13..21].copy_from_slice(&self.count.to_le_bytes());
        buf[21] = u8::from(self.deltas_present);
        buf
    }

    fn decode(buf: &[u8]) -> Result<Self, CodecError> {
        if buf.len() < HEADER_BYTES as usize || buf[0..4] != MAGIC {
            return Err(CodecError::UnsupportedFormat);
        }
        let version = u16::from_le_bytes([buf[4], buf[5]]);
        if version != FORMAT_VERSION {
            return Err(CodecError::UnsupportedFormat);
        }
        let n = u32::from_le_bytes([buf[6], buf[7], buf[8], buf[9]]);
        let m = u16::from_le_bytes([buf[10], buf[11]]);
        let scaling = match buf[12] {
            0 => DomainScaling::Raw,
            1 => DomainScaling::Unit,
            other => {
                return Err(CodecError::CorruptArchive(format!(
                    "unknown scaling byte {other}"
                )))
            }
        };
        let count = u64::from_le_bytes(buf[13..21].try_into().unwrap());
        let flags = buf[21];
        if flags & !1 != 0 {
            return Err(CodecError::CorruptArchive(format!(
                "unknown flag bits {flags:#04x}"
            )));
        }
        if m as u32 > n || m == 0 || n == 0 {
            return Err(CodecError::CorruptArchive(format!(
                "invalid shape n={n} m={m}"
            )));
        }
        Ok(AresHeader {
            version,
            n,
            m,
            scaling,
            count,
            deltas_present: flags & 1 != 0,
        })
    }
}

/// Write records to an archive. Returns the total byte count. The file is
/// fsynced before returning.
pub fn write_archive(
    path: &Path,
    records: &[PolyRecord],
    header: AresHeader,
) -> Result<u64, CodecError> {
    if header.count != records.len() as u64 {
        return Err(CodecError::CorruptArchive(format!(
            "header count {} does not match {} records",
            header.count,
            records.len()
        )));
    }
    for r in records {
        if r.domain.n() != header.n as usize
            || r.coeffs.len() != header.m as usize
            || r.domain.scaling() != header.scaling
        {
            return Err(CodecError::DimensionMismatch {
                id: r.id,
                n: r.domain.n(),
                m: r.coeffs.len(),
                expected_n: header.n as usize,
                expected_m: header.m as usize,
            });
        }
    }

    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(&header.encode())?;
    for r in records {
        w.write_all(&r.id.to_le_bytes())?;
        for c in &r.coeffs {
            w.write_all(&c.to_le_bytes())?;
        }
        if header.deltas_present {
            w.write_all(&r.delta.to_le_bytes())?;
        }
    }
    w.flush()?;
    w.into_inner()
        .map_err(|e| CodecError::Io(e.into_error()))?
        .sync_all()?;
    Ok(header.archive_bytes())
}

/// Read an archive back. Round-trips are bit-identical. Records written
/// without deltas come back with `delta = 0`.
pub fn read_archive(path: &Path) -> Result<(AresHeader, Vec<PolyRecord>), CodecError> {
    let mut file = File::open(path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;

    let header = AresHeader::decode(&bytes)?;
    let expected = header.archive_bytes();
    if bytes.len() as u64 != expected {
        return Err(CodecError::CorruptArchive(format!(
            "file is {} bytes, header implies {expected}",
            bytes.len()
        )));
    }

    let domain = DomainSpec::new(header.n as usize, header.scaling)
        .map_err(|e| CodecError::CorruptArchive(e.to_string()))?;
    let m = header.m as usize;
    let mut records = Vec::with_capacity(header.count as usize);
    let mut off = HEADER_BYTES as usize;
    let take_f64 = |bytes: &[u8], off: usize| {
        f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap())
    };
    for _ in 0..header.count {
        let id = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        off += 8;
        let mut coeffs = Vec::with_capacity(m);
        for _ in 0..m {
            coeffs.push(take_f64(&bytes, off));
            off += 8;
        }
        let delta = if header.deltas_present {
            let d = take_f64(&bytes, off);
            off += 8;
            d
        } else {
            0.0
        };
        records.push(PolyRecord {
            id,
            coeffs,
            domain,
            delta,
        });
    }
    Ok((header, records))
}

/// Compression ratio as a percentage: `100 * original / compressed`.
/// A 100x reduction reports as 10000.
pub fn compression_ratio(original_bytes: u64, compressed_bytes: u64) -> Result<f64, CodecError> {
    if compressed_bytes == 0 {
        return Err(CodecError::DivisionByZero);
    }
    Ok(100.0 * original_bytes as f64 / compressed_bytes as f64)
}
