//! Point-set files in the two interchange formats the harness accepts.
//!
//! CSV: one point per line, d comma-separated decimal floats, no header.
//! Binary: magic bytes "CJL1", little-endian u32 d, little-endian u32 n,
//! then n*d little-endian 64-bit floats in row-major order.
//!
//! Both loaders produce identical in-memory data for the same point set,
//! and both reject non-finite entries: downstream embedding and distortion
//! arithmetic silently propagates NaN, so bad values are caught at the door
//! with their exact location.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"CJL1";

/// Refuse point sets above this element count (1 GiB of f64) so a corrupt
/// header cannot drive a runaway allocation.
const MAX_ELEMENTS: u64 = 1 << 27;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Binary,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Binary => "binary",
        }
    }
}

/// An n x d point set held row-major, one inner vector per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub d: usize,
    pub points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(d: usize, points: Vec<Vec<f64>>) -> Result<PointSet> {
        if d == 0 {
            return Err(CliError::data("point dimension d must be at least 1"));
        }
        if points.is_empty() {
            return Err(CliError::data("point set holds no points"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(CliError::data(format!(
                    "point {i} has {} coordinates, expected {d}",
                    p.len()
                )));
            }
        }
        Ok(PointSet { d, points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }
}

/// Decide csv vs binary by the magic bytes, then parse accordingly.
pub fn read_auto(path: &Path) -> Result<(PointSet, Format)> {
    let bytes = read_bytes(path)?;
    if bytes.len() >= MAGIC.len() && &bytes[..MAGIC.len()] == MAGIC {
        Ok((parse_binary(&bytes, path)?, Format::Binary))
    } else {
        Ok((parse_csv(&bytes, path)?, Format::Csv))
    }
}

pub fn write(path: &Path, set: &PointSet, format: Format) -> Result<()> {
    let bytes = match format {
        Format::Csv => render_csv(set),
        Format::Binary => render_binary(set)?,
    };
    let mut file = fs::File::create(path)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(&bytes)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

fn parse_csv(bytes: &[u8], path: &Path) -> Result<PointSet> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| CliError::data(format!("{}: not valid UTF-8: {e}", path.display())))?;
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut d = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            return Err(CliError::data(format!(
                "{}, line {lineno}: blank line inside point set",
                path.display()
            )));
        }
        let mut row = Vec::with_capacity(d.max(1));
        for (field_idx, field) in line.split(',').enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| {
                CliError::data(format!(
                    "{}, line {lineno}, field {}: cannot parse {:?} as a float",
                    path.display(),
                    field_idx + 1,
                    field.trim()
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::data(format!(
                    "{}, line {lineno}, field {}: non-finite value {value}",
                    path.display(),
                    field_idx + 1
                )));
            }
            row.push(value);
        }
        if points.is_empty() {
            d = row.len();
        } else if row.len() != d {
            return Err(CliError::data(format!(
                "{}, line {lineno}: {} fields, expected {d} as on line 1",
                path.display(),
                row.len()
            )));
        }
        points.push(row);
    }
    if points.is_empty() {
        return Err(CliError::data(format!(
            "{}: empty file, expected at least one point",
            path.display()
        )));
    }
    PointSet::new(d, points)
}

fn parse_binary(bytes: &[u8], path: &Path) -> Result<PointSet> {
    let header = MAGIC.len() + 8;
    if bytes.len() < header {
        return Err(CliError::data(format!(
            "{}: truncated at byte {}, expected at least a {header}-byte header",
            path.display(),
            bytes.len()
        )));
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(CliError::data(format!(
            "{}: bad magic at byte 0, expected {:?}",
            path.display(),
            std::str::from_utf8(MAGIC).unwrap()
        )));
    }
    let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as u64;
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as u64;
    if d == 0 || n == 0 {
        return Err(CliError::data(format!(
            "{}: header declares d={d}, n={n}; both must be at least 1",
            path.display()
        )));
    }
    if d * n > MAX_ELEMENTS {
        return Err(CliError::data(format!(
            "{}: header declares {} elements, above the {MAX_ELEMENTS} cap",
            path.display(),
            d * n
        )));
    }
    let expected = header as u64 + 8 * d * n;
    if (bytes.len() as u64) != expected {
        return Err(CliError::data(format!(
            "{}: file is {} bytes but the header implies {expected} \
             (mismatch from byte {})",
            path.display(),
            bytes.len(),
            expected.min(bytes.len() as u64)
        )));
    }
    let (d, n) = (d as usize, n as usize);
    let mut points = Vec::with_capacity(n);
    let mut offset = header;
    for _ in 0..n {
        let mut row = Vec::with_capacity(d);
        for _ in 0..d {
            let value = f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap());
            if !value.is_finite() {
                return Err(CliError::data(format!(
                    "{}: non-finite value {value} at byte {offset}",
                    path.display()
                )));
            }
            row.push(value);
            offset += 8;
        }
        points.push(row);
    }
    PointSet::new(d, points)
}

fn render_csv(set: &PointSet) -> Vec<u8> {
    let mut out = String::new();
    for point in &set.points {
        for (j, v) in point.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            // Display for f64 prints the shortest representation that parses
            // back to the same bits, so csv round-trips exactly.
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out.into_bytes()
}

fn render_binary(set: &PointSet) -> Result<Vec<u8>> {
    let d: u32 = set
        .d
        .try_into()
        .map_err(|_| CliError::data(format!("d = {} does not fit the u32 header", set.d)))?;
    let n: u32 = set
        .n()
        .try_into()
        .map_err(|_| CliError::data(format!("n = {} does not fit the u32 header", set.n())))?;
    let mut out = Vec::with_capacity(MAGIC.len() + 8 + 8 * set.d * set.n());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&d.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    for point in &set.points {
        for v in point {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}
