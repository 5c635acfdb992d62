//! File formats: NLSF field snapshots, NLSQ ground-state profiles and the
//! diagnostic CSV.
//!
//! NLSF layout, little-endian: magic `NLSF`, `u32` version, `u8` kind
//! (0 periodic3d, 1 radial1d), `u32` n, `f64` L, `f64` t, then `(re, im)`
//! pairs of `f64`, x fastest.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Grid, GridKind};
use crate::groundstate::{GroundState, DEFAULT_CERT_TOL};
use crate::virial::{VirialRow, VirialSeries};

pub const NLSF_MAGIC: &[u8; 4] = b"NLSF";
pub const NLSF_VERSION: u32 = 1;
const NLSF_HEADER_LEN: usize = 4 + 4 + 1 + 4 + 8 + 8;

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn encode_nlsf(f: &Field) -> Vec<u8> {
    let grid = f.grid();
    let mut out = Vec::with_capacity(NLSF_HEADER_LEN + 16 * f.values().len());
    out.extend_from_slice(NLSF_MAGIC);
    out.extend_from_slice(&NLSF_VERSION.to_le_bytes());
    out.push(grid.kind().code());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&f.time().to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < k {
            return Err(Error::Truncated { offset: self.pos, needed: k, len: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn array<const K: usize>(&mut self) -> Result<[u8; K]> {
        Ok(self.take(K)?.try_into().expect("slice has length K"))
    }
}

pub fn decode_nlsf(bytes: &[u8]) -> Result<Field> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.array::<4>()? != NLSF_MAGIC {
        return Err(Error::BadMagic { expected: "NLSF" });
    }
    let version = u32::from_le_bytes(r.array()?);
    if version != NLSF_VERSION {
        return Err(Error::VersionMismatch { found: version, expected: NLSF_VERSION });
    }
    let code = r.array::<1>()?[0];
    let kind = GridKind::from_code(code).ok_or_else(|| Error::Malformed(format!("unknown grid kind {code}")))?;
    let n = u32::from_le_bytes(r.array()?) as usize;
    let half_width = f64::from_le_bytes(r.array()?);
    let t = f64::from_le_bytes(r.array()?);
    let grid = Grid::new(kind, n, half_width)?;
    let count = grid.len();
    let payload = r.take(count.checked_mul(16).ok_or_else(|| Error::Malformed("grid too large".into()))?)?;
    if r.pos != bytes.len() {
        return Err(Error::Malformed(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Field::new(grid, values, t)
}

pub fn write_nlsf(path: impl AsRef<Path>, f: &Field) -> Result<()> {
    fs::write(path, encode_nlsf(f))?;
    Ok(())
}

pub fn read_nlsf(path: impl AsRef<Path>) -> Result<Field> {
    decode_nlsf(&fs::read(path)?)
}

pub fn encode_nlsq(q: &GroundState) -> String {
    let mut s = String::new();
    s.push_str("# nlsq v1\n");
    let _ = writeln!(s, "# rmax={} n={} tol={}", fmt17(q.r_max()), q.n(), fmt17(q.tol()));
    let (m, g, l) = q.profile_norms();
    let _ = writeln!(s, "# mass_sq={} grad_sq={} l4_4={}", fmt17(m), fmt17(g), fmt17(l));
    for (r, v) in q.radii().zip(q.profile()) {
        let _ = writeln!(s, "{} {}", fmt17(r), fmt17(*v));
    }
    s
}

fn header_fields(line: &str, lineno: usize) -> Result<Vec<(&str, &str)>> {
    line.trim_start_matches('#')
        .split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .ok_or_else(|| Error::ConfigParse { line: lineno, message: format!("expected key=value, got {kv:?}") })
        })
        .collect()
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| Error::ConfigParse { line, message: format!("not a number: {s:?}") })
}

/// Parses an NLSQ profile and rebuilds the ground state from its samples.
///
/// The derivative is rebuilt by finite differences, so the recomputed norms
/// only match the stored ones to the certification tolerance; the stored
/// norms are kept.
pub fn decode_nlsq(text: &str) -> Result<GroundState> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let bad = |line: usize, m: &str| Error::ConfigParse { line, message: m.to_string() };
    match lines.next() {
        Some((_, l)) if l.trim() == "# nlsq v1" => {}
        Some((i, _)) => return Err(bad(i, "expected `# nlsq v1`")),
        None => return Err(bad(1, "empty file")),
    }
    let (mut r_max, mut n, mut tol) = (None, None, None);
    let (i2, l2) = lines.next().ok_or_else(|| bad(2, "missing grid header"))?;
    for (k, v) in header_fields(l2, i2)? {
        match k {
            "rmax" => r_max = Some(parse_f64(v, i2)?),
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad(i2, "n is not an integer"))?),
            "tol" => tol = Some(parse_f64(v, i2)?),
            _ => return Err(bad(i2, &format!("unknown key {k}"))),
        }
    }
    let (i3, l3) = lines.next().ok_or_else(|| bad(3, "missing norm header"))?;
    let mut stored = [None; 3];
    for (k, v) in header_fields(l3, i3)? {
        let slot = match k {
            "mass_sq" => 0,
            "grad_sq" => 1,
            "l4_4" => 2,
            _ => return Err(bad(i3, &format!("unknown key {k}"))),
        };
        stored[slot] = Some(parse_f64(v, i3)?);
    }
    let r_max = r_max.ok_or_else(|| bad(i2, "missing rmax"))?;
    let n = n.ok_or_else(|| bad(i2, "missing n"))?;
    let tol = tol.ok_or_else(|| bad(i2, "missing tol"))?;
    let mut profile = Vec::with_capacity(n);
    for (i, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let mut parts = l.split_whitespace();
        let (Some(_r), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(i, "expected `r value`"));
        };
        profile.push(parse_f64(v, i)?);
    }
    if profile.len() != n {
        return Err(Error::Malformed(format!("header says n={n}, found {} samples", profile.len())));
    }
    let q = GroundState::from_profile(r_max, tol, profile)?;
    let actual = [q.mass_sq(), q.grad_sq(), q.l4_4()];
    let mut norms = [0.0; 3];
    for (k, name) in ["mass_sq", "grad_sq", "l4_4"].iter().enumerate() {
        let s = stored[k].ok_or_else(|| bad(i3, &format!("missing {name}")))?;
        if ((s - actual[k]) / actual[k]).abs() > DEFAULT_CERT_TOL {
            return Err(Error::Malformed(format!("stored {name}={s} disagrees with the profile ({})", actual[k])));
        }
        norms[k] = s;
    }
    Ok(q.with_profile_norms(norms[0], norms[1], norms[2]))
}

pub fn write_nlsq(path: impl AsRef<Path>, q: &GroundState) -> Result<()> {
    fs::write(path, encode_nlsq(q))?;
    Ok(())
}

pub fn read_nlsq(path: impl AsRef<Path>) -> Result<GroundState> {
    decode_nlsq(&fs::read_to_string(path)?)
}

/// Writes the diagnostic series under [`VirialRow::HEADER`].
pub fn write_series_csv(mut w: impl Write, series: &VirialSeries) -> Result<()> {
    writeln!(w, "{}", VirialRow::HEADER)?;
    for row in &series.rows {
        let line: Vec<String> = row.values().iter().map(|v| fmt17(*v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn series_csv(series: &VirialSeries) -> String {
    let mut buf = Vec::new();
    write_series_csv(&mut buf, series).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Reads a diagnostic CSV back as rows of the eleven columns.
pub fn read_series_csv(text: &str) -> Result<Vec<[f64; 11]>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == VirialRow::HEADER => {}
        _ => return Err(Error::ConfigParse { line: 1, message: format!("expected header {}", VirialRow::HEADER) }),
    }
    let mut rows = Vec::new();
    for (i, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = l.split(',').map(|v| parse_f64(v.trim(), i + 1)).collect::<Result<_>>()?;
        let row: [f64; 11] = vals
            .try_into()
            .map_err(|v: Vec<f64>| Error::ConfigParse { line: i + 1, message: format!("{} columns, expected 11", v.len()) })?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt17(f64::NAN), "NaN");
    }

    #[test]
    fn truncated_header_reports_offset() {
        let f = Field::zeros(Grid::radial(8, 1.0).unwrap());
        let bytes = encode_nlsf(&f);
        match decode_nlsf(&bytes[..10]) {
            Err(Error::Truncated { offset, needed, len }) => assert_eq!((offset, needed, len), (9, 4, 10)),
            other => panic!("{other:?}"),
        }
    }
}
