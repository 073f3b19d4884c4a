//! Sample files: CSV (one point per row, optional header) and a raw binary
//! layout of a 16-byte header (`KNNE`, `m` as u32, `N` as u64, little
//! endian) followed by `N·m` little-endian f64 values in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::SampleMatrix;

pub const MAGIC: &[u8; 4] = b"KNNE";
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Csv,
    Binary,
}

impl std::str::FromStr for SampleFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "bin" | "binary" => Ok(Self::Binary),
            other => Err(Error::Parse(format!("unknown sample format '{other}'"))),
        }
    }
}

/// Reads a sample file, detecting the binary layout by its magic bytes.
pub fn read_sample(path: &Path) -> Result<SampleMatrix> {
    let bytes = fs::read(path)?;
    parse_sample(&bytes).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_sample(bytes: &[u8]) -> Result<SampleMatrix> {
    if bytes.starts_with(MAGIC) {
        decode_binary(bytes)
    } else {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| Error::Parse("input is neither UTF-8 CSV nor binary sample".into()))?;
        parse_csv(text)
    }
}

pub fn parse_csv(text: &str) -> Result<SampleMatrix> {
    let mut data = Vec::new();
    let mut m = None;
    let mut first = true;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if first => {
                first = false;
                m = Some(fields.len());
                continue;
            }
            Err(_) => {
                return Err(Error::Parse(format!(
                    "line {}: non-numeric field",
                    lineno + 1
                )));
            }
        };
        first = false;
        match m {
            Some(w) if w != row.len() => {
                return Err(Error::Parse(format!(
                    "line {}: expected {w} columns, found {}",
                    lineno + 1,
                    row.len()
                )))
            }
            _ => m = Some(row.len()),
        }
        data.extend(row);
    }
    match m {
        Some(m) if !data.is_empty() => SampleMatrix::new(data, m),
        _ => Err(Error::InvalidSample("no data rows".into())),
    }
}

fn decode_binary(bytes: &[u8]) -> Result<SampleMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Parse("truncated binary header".into()));
    }
    let m = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let n = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = &bytes[HEADER_LEN..];
    let expected = n
        .checked_mul(m)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::Parse("binary header sizes overflow".into()))?;
    if body.len() != expected {
        return Err(Error::Parse(format!(
            "binary body has {} bytes, header promises {expected}",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    SampleMatrix::new(data, m)
}

pub fn encode_binary(sample: &SampleMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * sample.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(sample.m() as u32).to_le_bytes());
    out.extend_from_slice(&(sample.n() as u64).to_le_bytes());
    for v in sample.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// CSV with shortest round-trip formatting, so reading it back is exact.
pub fn encode_csv(sample: &SampleMatrix) -> String {
    let mut out = String::new();
    for row in sample.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_sample<W: Write>(sample: &SampleMatrix, format: SampleFormat, mut w: W) -> Result<()> {
    match format {
        SampleFormat::Csv => w.write_all(encode_csv(sample).as_bytes())?,
        SampleFormat::Binary => w.write_all(&encode_binary(sample))?,
    }
    Ok(w.flush()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_and_without_header() {
        let s = parse_csv("x,y\n1,2\n3.5,-4e-3\n\n").unwrap();
        assert_eq!((s.n(), s.m()), (2, 2));
        assert_eq!(s.row(1), &[3.5, -0.004]);
        let t = parse_csv("1\n2\n3\n").unwrap();
        assert_eq!(t.n(), 3);
        assert!(parse_csv("1,2\n3\n").is_err());
        assert!(parse_csv("a,b\n").is_err());
        assert!(parse_csv("1,2\nfoo,3\n").is_err());
    }

    #[test]
    fn binary_round_trip() {
        let s = SampleMatrix::from_rows(&[[0.1, 0.2, 0.3], [1e300, -0.0, 5.0]]).unwrap();
        let bytes = encode_binary(&s);
        assert_eq!(bytes.len(), 16 + 6 * 8);
        assert_eq!(parse_sample(&bytes).unwrap(), s);
        assert!(parse_sample(&bytes[..bytes.len() - 1]).is_err());
        assert!(parse_sample(&bytes[..10]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = SampleMatrix::from_rows(&[[0.1 + 0.2, 1.0 / 3.0], [std::f64::consts::PI, -1e-310]])
            .unwrap();
        assert_eq!(parse_csv(&encode_csv(&s)).unwrap(), s);
    }
}
