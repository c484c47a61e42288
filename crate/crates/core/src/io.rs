//! Text formats: point CSV, the `interval a b` line, and ASCII PGM rasters.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hyperspace::CompactSet;
use crate::pmetric::{Carrier, Point};

/// One point per row, coordinates separated by commas. Intervals are
/// written as the single line `interval a b`.
pub fn write_set(set: &CompactSet) -> String {
    match set {
        CompactSet::Interval { a, b } => format!("interval {a} {b}\n"),
        CompactSet::Finite(s) => write_points(s.points()),
    }
}

pub fn write_points(points: &[Point]) -> String {
    let mut out = String::new();
    for p in points {
        let row: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Inverse of [`write_set`]. Blank lines and lines starting with `#` are
/// skipped.
pub fn parse_set(text: &str) -> Result<CompactSet> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if let Some((n, first)) = lines.first() {
        if let Some(rest) = first.strip_prefix("interval") {
            if lines.len() > 1 {
                return Err(Error::Parse(format!("line {n}: an interval file holds one line")));
            }
            let v = numbers(rest.split_whitespace(), *n)?;
            return match v.as_slice() {
                [a, b] => CompactSet::interval(*a, *b),
                _ => Err(Error::Parse(format!("line {n}: expected `interval a b`"))),
            };
        }
    }
    let points = lines
        .iter()
        .map(|(n, l)| Point::new(&numbers(l.split(','), *n)?))
        .collect::<Result<Vec<_>>>()?;
    CompactSet::points(points)
}

fn numbers<'a>(tokens: impl Iterator<Item = &'a str>, line: usize) -> Result<Vec<f64>> {
    tokens
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {line}: `{}` is not a number", t.trim())))
        })
        .collect()
}

/// ASCII `P2` raster of `points` over the carrier box. Pixel `(col, row)`
/// covers the cell starting at `lo + (col, row) * cell`; row 0 is the
/// first row written and sits at the carrier's minimum corner. A pixel is
/// 255 iff some point lands in its cell, 0 otherwise. 1-D carriers use a
/// single row.
pub fn render_pgm(points: &[Point], carrier: &Carrier, width: usize, height: usize) -> Result<String> {
    if width == 0 || height == 0 {
        return Err(Error::Parse("raster dimensions must be positive".into()));
    }
    let height = if carrier.dim() == 1 { 1 } else { height };
    let (lo, hi) = (carrier.lo(), carrier.hi());
    let cell = |v: f64, k: usize, n: usize| -> usize {
        let span = hi.coords()[k] - lo.coords()[k];
        if span <= 0.0 {
            return 0;
        }
        let i = ((v - lo.coords()[k]) / span * n as f64).floor();
        (i.max(0.0) as usize).min(n - 1)
    };
    let mut pixels = vec![false; width * height];
    for p in points {
        if p.dim() != carrier.dim() {
            return Err(Error::DimensionMismatch {
                expected: carrier.dim(),
                got: p.dim(),
            });
        }
        let col = cell(p.coords()[0], 0, width);
        let row = if carrier.dim() == 2 { cell(p.coords()[1], 1, height) } else { 0 };
        pixels[row * width + col] = true;
    }
    let mut out = format!("P2\n{width} {height}\n255\n");
    for row in pixels.chunks(width) {
        let vals: Vec<&str> = row.iter().map(|&on| if on { "255" } else { "0" }).collect();
        let _ = writeln!(out, "{}", vals.join(" "));
    }
    Ok(out)
}
