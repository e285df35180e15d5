//! Matrix and spectrum export.
//!
//! Binary files start with a 16-byte header: an 8-byte magic tag and the
//! dimension as a little-endian `u64`. Matrices follow as row-major
//! interleaved `(re, im)` little-endian doubles, spectra as plain doubles.

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::spectral::Spectrum;
use num_complex::Complex64;
use std::io::{BufRead, Read, Write};

pub const MATRIX_MAGIC: &[u8; 8] = b"RMTHMAT1";
pub const SPECTRUM_MAGIC: &[u8; 8] = b"RMTSPEC1";

/// Largest dimension written as CSV.
pub const MAX_CSV_DIM: usize = 64;

/// Tolerance for the symmetry check on import.
const IMPORT_HERMITIAN_TOL: f64 = 1e-12;

fn write_header(out: &mut impl Write, magic: &[u8; 8], n: usize) -> Result<()> {
    out.write_all(magic)?;
    out.write_all(&(n as u64).to_le_bytes())?;
    Ok(())
}

fn read_header(inp: &mut impl Read, magic: &[u8; 8]) -> Result<usize> {
    let mut head = [0u8; 16];
    inp.read_exact(&mut head)?;
    if &head[..8] != magic {
        return Err(Error::Validation(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&head[..8]),
            String::from_utf8_lossy(magic)
        )));
    }
    let n = u64::from_le_bytes(head[8..].try_into().unwrap());
    usize::try_from(n).map_err(|_| Error::Validation(format!("dimension {n} too large")))
}

fn read_f64s(inp: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    inp.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn write_matrix_binary(m: &HermitianMatrix, out: &mut impl Write) -> Result<()> {
    write_header(out, MATRIX_MAGIC, m.dim())?;
    for z in m.as_slice() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_binary(inp: &mut impl Read) -> Result<HermitianMatrix> {
    let n = read_header(inp, MATRIX_MAGIC)?;
    let vals = read_f64s(inp, 2 * n * n)?;
    let data = vals.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
    HermitianMatrix::from_row_major(n, data, IMPORT_HERMITIAN_TOL)
}

/// One row per matrix row, columns `re, im` interleaved.
pub fn write_matrix_csv(m: &HermitianMatrix, out: &mut impl Write) -> Result<()> {
    let n = m.dim();
    if n > MAX_CSV_DIM {
        return Err(Error::Validation(format!("CSV export limited to N <= {MAX_CSV_DIM}, got {n}")));
    }
    for row in m.as_slice().chunks(n) {
        let cells: Vec<String> = row.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv(inp: impl BufRead) -> Result<HermitianMatrix> {
    let mut data = Vec::new();
    let mut rows = 0;
    for line in inp.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line.split(',').map(|c| parse_f64(c.trim())).collect::<Result<Vec<_>>>()?;
        if vals.len() % 2 != 0 {
            return Err(Error::Validation(format!("row {rows} has an odd number of columns")));
        }
        data.extend(vals.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])));
        rows += 1;
    }
    HermitianMatrix::from_row_major(rows, data, IMPORT_HERMITIAN_TOL)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Validation(format!("cannot parse '{s}' as a number")))
}

pub fn write_spectrum_binary(x: &Spectrum, out: &mut impl Write) -> Result<()> {
    write_header(out, SPECTRUM_MAGIC, x.len())?;
    for v in x.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_spectrum_binary(inp: &mut impl Read) -> Result<Spectrum> {
    let n = read_header(inp, SPECTRUM_MAGIC)?;
    Spectrum::from_sorted(read_f64s(inp, n)?)
}

/// One eigenvalue per line.
pub fn write_spectrum_csv(x: &Spectrum, out: &mut impl Write) -> Result<()> {
    for v in x.values() {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

pub fn read_spectrum_csv(inp: impl BufRead) -> Result<Spectrum> {
    let mut vals = Vec::new();
    for line in inp.lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() {
            vals.push(parse_f64(t)?);
        }
    }
    Ok(Spectrum::from_unsorted(vals))
}
