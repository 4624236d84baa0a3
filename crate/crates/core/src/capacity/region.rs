//! Compact regions of the unit disk for the one-dimensional solver.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum RegionShape {
    Disk { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
}

impl RegionShape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            RegionShape::Disk { center, radius } => (x - center[0]).hypot(y - center[1]) <= radius,
            RegionShape::Annulus { center, inner, outer } => {
                let r = (x - center[0]).hypot(y - center[1]);
                inner <= r && r <= outer
            }
        }
    }

    fn max_modulus(&self) -> f64 {
        match *self {
            RegionShape::Disk { center, radius } => center[0].hypot(center[1]) + radius,
            RegionShape::Annulus { center, outer, .. } => center[0].hypot(center[1]) + outer,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            RegionShape::Disk { radius, .. } if radius > 0.0 => Ok(()),
            RegionShape::Annulus { inner, outer, .. } if 0.0 <= inner && inner < outer => Ok(()),
            _ => Err(invalid(format!("degenerate region shape {self:?}"))),
        }
    }
}

/// A compact `K` of the unit disk: a finite union of analytic shapes, or a
/// rasterized mask covering `[-1,1]²` (row 0 at the top, `y = 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Shapes(Vec<RegionShape>),
    Mask { rows: usize, cols: usize, cells: Vec<bool> },
}

impl Region {
    pub fn shapes(shapes: Vec<RegionShape>) -> Result<Self> {
        if shapes.is_empty() {
            return Err(invalid("region needs at least one shape"));
        }
        for s in &shapes {
            s.validate()?;
        }
        Ok(Region::Shapes(shapes))
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::shapes(vec![RegionShape::Disk {
            center: [0.0, 0.0],
            radius,
        }])
    }

    pub fn annulus(inner: f64, outer: f64) -> Result<Self> {
        Self::shapes(vec![RegionShape::Annulus {
            center: [0.0, 0.0],
            inner,
            outer,
        }])
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Region::Shapes(shapes) => shapes.iter().any(|s| s.contains(x, y)),
            Region::Mask { rows, cols, cells } => {
                let col = ((x + 1.0) / 2.0 * *cols as f64).floor();
                let row = ((1.0 - y) / 2.0 * *rows as f64).floor();
                if col < 0.0 || row < 0.0 || col >= *cols as f64 || row >= *rows as f64 {
                    return false;
                }
                cells[row as usize * cols + col as usize]
            }
        }
    }

    /// Whether boundary crossings between grid nodes can be located at
    /// sub-cell precision.
    pub fn is_analytic(&self) -> bool {
        matches!(self, Region::Shapes(_))
    }

    /// Upper bound on `|z|` over the region, when analytic.
    pub fn max_modulus(&self) -> Option<f64> {
        match self {
            Region::Shapes(shapes) => Some(shapes.iter().map(RegionShape::max_modulus).fold(0.0, f64::max)),
            Region::Mask { .. } => None,
        }
    }

    /// Fraction `t ∈ (0, 1]` along the segment from `from` (outside) to
    /// `to` (inside) where the region is entered, by bisection.
    pub(crate) fn entry_fraction(&self, from: (f64, f64), to: (f64, f64)) -> f64 {
        if !self.is_analytic() {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let x = from.0 + mid * (to.0 - from.0);
            let y = from.1 + mid * (to.1 - from.1);
            if self.contains(x, y) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Parses the portable grid-mask format: a `mask v1` header line, a
    /// line `rows cols`, then row-major `0`/`1` cells separated by
    /// optional whitespace.
    pub fn parse_mask(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some("mask v1") => {}
            other => return Err(Error::Parse(format!("expected `mask v1` header, found {other:?}"))),
        }
        let dims = lines
            .next()
            .ok_or_else(|| Error::Parse("mask is missing its dimensions".into()))?;
        let dims: Vec<usize> = dims
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad mask dimension `{t}`"))))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse("mask dimensions must be `rows cols`".into()));
        };
        if rows == 0 || cols == 0 {
            return Err(Error::Parse("mask dimensions must be positive".into()));
        }
        let mut cells = Vec::with_capacity(rows * cols);
        for line in lines {
            for ch in line.chars().filter(|c| !c.is_whitespace()) {
                match ch {
                    '0' => cells.push(false),
                    '1' => cells.push(true),
                    other => return Err(Error::Parse(format!("bad mask cell `{other}`"))),
                }
            }
        }
        if cells.len() != rows * cols {
            return Err(Error::Parse(format!(
                "mask declares {rows}x{cols} cells but holds {}",
                cells.len()
            )));
        }
        if !cells.iter().any(|&c| c) {
            return Err(Error::Parse("mask is empty".into()));
        }
        Ok(Region::Mask { rows, cols, cells })
    }

    pub fn read_mask(path: &Path) -> Result<Self> {
        Self::parse_mask(&std::fs::read_to_string(path)?)
    }

    /// Rasterizes the region into the mask format at `rows × cols`.
    pub fn to_mask_text(&self, rows: usize, cols: usize) -> String {
        let mut out = format!("mask v1\n{rows} {cols}\n");
        for r in 0..rows {
            let y = 1.0 - (r as f64 + 0.5) * 2.0 / rows as f64;
            for c in 0..cols {
                let x = -1.0 + (c as f64 + 0.5) * 2.0 / cols as f64;
                out.push(if self.contains(x, y) { '1' } else { '0' });
            }
            let _ = writeln!(out);
        }
        out
    }
}
