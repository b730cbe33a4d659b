//! File formats: matrices as headerless CSV or a small binary container,
//! observation sets and IQ series as commented CSV. Matrix readers
//! auto-detect the binary format by its magic bytes.
//!
//! CSV numbers are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every value bit-for-bit in both formats.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::completion::ObservationSet;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::signal::IqSeries;

/// Leading bytes of the binary matrix container.
pub const MATRIX_MAGIC: &[u8; 4] = b"RLRM";

/// On-disk matrix encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    /// One text line per row, comma-separated, no header.
    Csv,
    /// Magic "RLRM", u32 LE row count, u32 LE column count, then row-major
    /// f64 LE values.
    Binary,
}

pub fn write_matrix<W: Write>(mut w: W, m: &DenseMatrix, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Csv => {
            let mut line = String::new();
            for i in 0..m.rows() {
                line.clear();
                for (j, x) in m.row(i).iter().enumerate() {
                    if j > 0 {
                        line.push(',');
                    }
                    line.push_str(&x.to_string());
                }
                line.push('\n');
                w.write_all(line.as_bytes())?;
            }
        }
        MatrixFormat::Binary => {
            w.write_all(MATRIX_MAGIC)?;
            w.write_all(&u32::try_from(m.rows()).map_err(|_| too_large(m.rows()))?.to_le_bytes())?;
            w.write_all(&u32::try_from(m.cols()).map_err(|_| too_large(m.cols()))?.to_le_bytes())?;
            let mut buf = Vec::with_capacity(8 * m.data().len());
            for x in m.data() {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
    }
    Ok(())
}

fn too_large(dim: usize) -> Error {
    Error::Format(format!("dimension {dim} exceeds the binary format's u32 limit"))
}

/// Reads either matrix encoding, deciding by the magic bytes.
pub fn read_matrix<R: Read>(mut r: R) -> Result<DenseMatrix> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.starts_with(MATRIX_MAGIC) {
        read_matrix_binary(&bytes)
    } else {
        read_matrix_csv(&bytes)
    }
}

fn read_matrix_binary(bytes: &[u8]) -> Result<DenseMatrix> {
    if bytes.len() < 12 {
        return Err(Error::Format(
            "binary matrix truncated before the header ends".into(),
        ));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format(format!("{rows}x{cols} overflows")))?;
    let want = 12 + 8 * count;
    if bytes.len() != want {
        return Err(Error::Format(format!(
            "binary matrix of {rows}x{cols} should be {want} bytes, got {}",
            bytes.len()
        )));
    }
    let data = bytes[12..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::from_vec(rows, cols, data)
}

fn read_matrix_csv(bytes: &[u8]) -> Result<DenseMatrix> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::Format("matrix CSV is not valid UTF-8".into()))?;
    let mut cols = 0usize;
    let mut rows = 0usize;
    let mut data = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut width = 0usize;
        for cell in line.split(',') {
            data.push(parse_f64(cell, lineno + 1)?);
            width += 1;
        }
        if rows == 0 {
            cols = width;
        } else if width != cols {
            return Err(Error::Format(format!(
                "line {}: expected {cols} values, got {width}",
                lineno + 1
            )));
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Format("matrix CSV holds no rows".into()));
    }
    DenseMatrix::from_vec(rows, cols, data)
}

fn parse_f64(cell: &str, lineno: usize) -> Result<f64> {
    cell.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {lineno}: `{}` is not a number", cell.trim())))
}

/// Header "# m n", then one "i,j,value" line per observation (0-based).
pub fn write_observations<W: Write>(mut w: W, omega: &ObservationSet) -> Result<()> {
    let (m, n) = omega.shape();
    writeln!(w, "# {m} {n}")?;
    for &(i, j, v) in omega.entries() {
        writeln!(w, "{i},{j},{v}")?;
    }
    Ok(())
}

pub fn read_observations<R: Read>(r: R) -> Result<ObservationSet> {
    let mut text = String::new();
    BufReader::new(r).read_to_string(&mut text)?;
    let mut shape: Option<(usize, usize)> = None;
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if shape.is_some() {
                continue; // later comments are allowed and ignored
            }
            let dims: Vec<&str> = rest.split_whitespace().collect();
            if dims.len() != 2 {
                return Err(Error::Format(format!(
                    "line {}: header must read `# <rows> <cols>`",
                    lineno + 1
                )));
            }
            let m = parse_usize(dims[0], lineno + 1)?;
            let n = parse_usize(dims[1], lineno + 1)?;
            shape = Some((m, n));
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Format(format!(
                "line {}: expected `i,j,value`",
                lineno + 1
            )));
        }
        entries.push((
            parse_usize(parts[0], lineno + 1)?,
            parse_usize(parts[1], lineno + 1)?,
            parse_f64(parts[2], lineno + 1)?,
        ));
    }
    let (m, n) = shape.ok_or_else(|| {
        Error::Format("observation file is missing its `# rows cols` header".into())
    })?;
    ObservationSet::new(m, n, entries)
}

fn parse_usize(cell: &str, lineno: usize) -> Result<usize> {
    cell.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {lineno}: `{}` is not an index", cell.trim())))
}

/// Header "# prf <hertz>", then one "re,im" line per pulse.
pub fn write_iq<W: Write>(mut w: W, iq: &IqSeries) -> Result<()> {
    writeln!(w, "# prf {}", iq.prf())?;
    for s in iq.samples() {
        writeln!(w, "{},{}", s.re, s.im)?;
    }
    Ok(())
}

pub fn read_iq<R: Read>(r: R) -> Result<IqSeries> {
    let mut text = String::new();
    BufReader::new(r).read_to_string(&mut text)?;
    let mut prf: Option<f64> = None;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() == 2 && parts[0] == "prf" {
                prf = Some(parse_f64(parts[1], lineno + 1)?);
            }
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Format(format!(
                "line {}: expected `re,im`",
                lineno + 1
            )));
        }
        samples.push(Complex64::new(
            parse_f64(parts[0], lineno + 1)?,
            parse_f64(parts[1], lineno + 1)?,
        ));
    }
    let prf =
        prf.ok_or_else(|| Error::Format("IQ file is missing its `# prf <hertz>` header".into()))?;
    IqSeries::new(samples, prf)
}

// path-based conveniences

pub fn write_matrix_file(path: &Path, m: &DenseMatrix, format: MatrixFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(&mut w, m, format)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix_file(path: &Path) -> Result<DenseMatrix> {
    read_matrix(BufReader::new(File::open(path)?))
}

pub fn write_observations_file(path: &Path, omega: &ObservationSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_observations(&mut w, omega)?;
    w.flush()?;
    Ok(())
}

pub fn read_observations_file(path: &Path) -> Result<ObservationSet> {
    read_observations(BufReader::new(File::open(path)?))
}

pub fn write_iq_file(path: &Path, iq: &IqSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_iq(&mut w, iq)?;
    w.flush()?;
    Ok(())
}

pub fn read_iq_file(path: &Path) -> Result<IqSeries> {
    read_iq(BufReader::new(File::open(path)?))
}
