//! PGM images and CSV dumps.
//!
//! Images are held as values in `[0, 1]`: reading divides by the header's
//! maxval, writing clamps and rounds to the chosen depth.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField, SolveReport};

/// Sample depth of a written PGM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmDepth {
    Eight,
    Sixteen,
}

impl PgmDepth {
    pub fn maxval(self) -> u32 {
        match self {
            PgmDepth::Eight => 255,
            PgmDepth::Sixteen => 65535,
        }
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&'a str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("unexpected end of PGM header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::Format("non-ASCII PGM header".into()))
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let t = self.token()?;
        t.parse()
            .map_err(|_| Error::Format(format!("bad PGM {what}: {t:?}")))
    }
}

/// Parses a binary (`P5`, 8- or 16-bit) or ASCII (`P2`) graymap.
pub fn decode_pgm(bytes: &[u8]) -> Result<ScalarField> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token()?;
    let binary = match magic {
        "P5" => true,
        "P2" => false,
        other => return Err(Error::Format(format!("unsupported magic {other:?}"))),
    };
    let cols = h.number("width")? as usize;
    let rows = h.number("height")? as usize;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = rows * cols;
    let scale = maxval as f64;
    let mut values = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates header and raster
        let start = h.pos + 1;
        let width = if maxval < 256 { 1 } else { 2 };
        let raster = bytes
            .get(start..start + count * width)
            .ok_or_else(|| Error::Format("truncated PGM raster".into()))?;
        for px in raster.chunks_exact(width) {
            let v = if width == 1 {
                px[0] as u32
            } else {
                u16::from_be_bytes([px[0], px[1]]) as u32
            };
            values.push(v.min(maxval) as f64 / scale);
        }
    } else {
        for _ in 0..count {
            values.push(h.number("sample")?.min(maxval) as f64 / scale);
        }
    }
    ScalarField::new(GridSpec::image(rows, cols)?, values)
}

/// Encodes a 2D field as binary PGM.
pub fn encode_pgm(f: &ScalarField, depth: PgmDepth) -> Result<Vec<u8>> {
    let grid = f.grid();
    if grid.dims() != 2 {
        return Err(Error::UnsupportedDimension {
            expected: 2,
            got: grid.dims(),
        });
    }
    let (rows, cols) = (grid.sizes()[0], grid.sizes()[1]);
    let maxval = depth.maxval();
    let mut out = format!("P5\n{cols} {rows}\n{maxval}\n").into_bytes();
    for &v in f.values() {
        let q = (v.clamp(0.0, 1.0) * maxval as f64).round() as u32;
        match depth {
            PgmDepth::Eight => out.push(q as u8),
            PgmDepth::Sixteen => out.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    Ok(out)
}

pub fn read_pgm(path: &Path) -> Result<ScalarField> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: &Path, f: &ScalarField, depth: PgmDepth) -> Result<()> {
    fs::write(path, encode_pgm(f, depth)?)?;
    Ok(())
}

/// `x,f,u,u_exact` rows; `u_exact` is left empty when unknown.
pub fn profile_csv(
    x: &[f64],
    f: &ScalarField,
    u: &ScalarField,
    u_exact: Option<&ScalarField>,
) -> Result<String> {
    f.grid().check_same(u.grid(), "profile")?;
    if x.len() != f.len() {
        return Err(Error::InvalidParameter(format!(
            "{} coordinates for {} samples",
            x.len(),
            f.len()
        )));
    }
    let mut s = String::from("x,f,u,u_exact\n");
    for i in 0..x.len() {
        let exact = u_exact.map(|e| e.values()[i].to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{}", x[i], f.values()[i], u.values()[i], exact);
    }
    Ok(s)
}

/// `outer,iteration,energy,residual` rows, one block per (Bregman) pass.
pub fn history_csv(reports: &[SolveReport]) -> String {
    let mut s = String::from("outer,iteration,energy,residual\n");
    for (k, report) in reports.iter().enumerate() {
        for (i, (e, r)) in report
            .energy_history
            .iter()
            .zip(&report.residual_history)
            .enumerate()
        {
            let _ = writeln!(s, "{},{},{},{}", k + 1, i + 1, e, r);
        }
    }
    s
}

/// Row-major dump, one image row per line.
pub fn field_csv(f: &ScalarField) -> String {
    let cols = *f.grid().sizes().last().unwrap_or(&1);
    let mut s = String::new();
    for row in f.values().chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Reads a 1D signal from CSV with a header naming an `f` column. An `x`
/// column, when present, sets the (uniform) grid spacing; otherwise it is 1.
pub fn parse_signal_csv(text: &str) -> Result<ScalarField> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let bad = |e: csv::Error| Error::Format(format!("CSV: {e}"));
    let header = rdr.headers().map_err(bad)?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let fi = col("f").ok_or_else(|| Error::Format("CSV header lacks an `f` column".into()))?;
    let xi = col("x");
    let (mut xs, mut fs) = (Vec::new(), Vec::new());
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(bad)?;
        let get = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad value in CSV row {}", n + 2)))
        };
        fs.push(get(fi)?);
        if let Some(i) = xi {
            xs.push(get(i)?);
        }
    }
    let h = if xs.len() >= 2 {
        let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        let uniform = xs
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0));
        if !uniform {
            return Err(Error::Format("x column is not uniformly spaced".into()));
        }
        h
    } else {
        1.0
    };
    ScalarField::new(GridSpec::line(fs.len(), h)?, fs)
}

pub fn read_signal_csv(path: &Path) -> Result<ScalarField> {
    parse_signal_csv(&fs::read_to_string(path)?)
}
