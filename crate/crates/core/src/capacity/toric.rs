//! Capacities of Reinhardt compacts of the bidisk through the convex
//! envelope problem in log-modulus coordinates.
//!
//! A compact `K ⊂ D²` invariant under the torus action is described by its
//! image `K_log` under `z ↦ (log|z_1|, log|z_2|)`. Its relative extremal
//! function is `v(log|z_1|, log|z_2|)`, where `v` is the largest convex,
//! coordinatewise nondecreasing function on the quadrant `(-∞,0)²` with
//! `v ≤ 0` and `v ≤ -1` on `K_log`. The Monge-Ampère mass then is
//! `(2π)² · 2! · |∂v|`, the Lebesgue measure of the subgradient image.
//!
//! The grid solver samples `K_log` on `[-T, 0]²`: the nodes inside it, the
//! crossings of its boundary with grid lines, and the corners of polygonal
//! pieces. The envelope is the maximum of `-1` and the affine functions
//! dual to the upper-right hull of those points; `|∂v|` is the sum of the
//! Alexandrov cells of the hull vertices, each the polygon of slopes
//! `b ≥ 0` supporting the envelope there.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::{capacity_sublevel, Capacity, CapacityValue, Provenance};
use crate::domains::Domain;
use crate::error::{invalid, Error, Result};

/// Relative tolerance of the calibration against the closed form.
pub const CALIBRATION_TOLERANCE: f64 = 0.03;
const CALIBRATION_LEVEL: f64 = 0.5;

/// A region in log-modulus coordinates `x_j = log|z_j| < 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum LogRegion {
    /// `{max(x_1, x_2) ≤ level}`, the image of the closed bidisk of radius
    /// `e^level`.
    MaxSublevel {
        level: f64,
    },
    /// `[lo_1, hi_1] × [lo_2, hi_2]`, the image of a product of annuli.
    Box {
        lo: [f64; 2],
        hi: [f64; 2],
    },
    /// Euclidean disk in log coordinates.
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Union {
        parts: Vec<LogRegion>,
    },
}

impl LogRegion {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            LogRegion::MaxSublevel { level } => x.max(y) <= *level,
            LogRegion::Box { lo, hi } => lo[0] <= x && x <= hi[0] && lo[1] <= y && y <= hi[1],
            LogRegion::Disk { center, radius } => (x - center[0]).hypot(y - center[1]) <= *radius,
            LogRegion::Union { parts } => parts.iter().any(|p| p.contains(x, y)),
        }
    }

    /// Largest coordinate reached by the region.
    pub fn max_coordinate(&self) -> f64 {
        match self {
            LogRegion::MaxSublevel { level } => *level,
            LogRegion::Box { hi, .. } => hi[0].max(hi[1]),
            LogRegion::Disk { center, radius } => center[0].max(center[1]) + radius,
            LogRegion::Union { parts } => parts
                .iter()
                .map(LogRegion::max_coordinate)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Exact corner points of polygonal pieces.
    fn corners(&self) -> Vec<(f64, f64)> {
        match self {
            LogRegion::MaxSublevel { level } => vec![(*level, *level)],
            LogRegion::Box { lo, hi } => vec![(lo[0], lo[1]), (hi[0], lo[1]), (lo[0], hi[1]), (hi[0], hi[1])],
            LogRegion::Disk { .. } => Vec::new(),
            LogRegion::Union { parts } => parts.iter().flat_map(LogRegion::corners).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            LogRegion::MaxSublevel { level } if *level < 0.0 => Ok(()),
            LogRegion::Box { lo, hi } if lo[0] <= hi[0] && lo[1] <= hi[1] => Ok(()),
            LogRegion::Disk { radius, .. } if *radius >= 0.0 => Ok(()),
            LogRegion::Union { parts } if !parts.is_empty() => parts.iter().try_for_each(LogRegion::validate),
            other => Err(invalid(format!("degenerate log-region {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToricOptions {
    /// Mass on obstacle nodes within this many cells of the truncated edges
    /// `x_k = -T` triggers a refusal.
    pub edge_band: usize,
}

impl Default for ToricOptions {
    fn default() -> Self {
        Self { edge_band: 2 }
    }
}

/// Solved envelope and its Monge-Ampère measure.
#[derive(Clone, Debug)]
pub struct ToricSolution {
    pub side: usize,
    pub spacing: f64,
    pub truncation: f64,
    /// Envelope values, row-major with `x_2` as the row coordinate.
    pub envelope: Vec<f64>,
    /// Obstacle points carrying mass, from the top-most to the right-most.
    pub frontier: Vec<(f64, f64)>,
    /// Alexandrov cell area of each frontier point.
    pub cell_area: Vec<f64>,
    /// Number of affine pieces of the envelope above `-1`.
    pub facets: usize,
}

impl ToricSolution {
    pub fn total_area(&self) -> f64 {
        self.cell_area.iter().sum()
    }

    pub fn capacity(&self) -> f64 {
        TAU * TAU * 2.0 * self.total_area()
    }
}

/// Solves the envelope problem on `[-T, 0]²` with `resolution` cells per
/// axis, without calibration.
pub fn solve_toric(
    region: &LogRegion,
    truncation: f64,
    resolution: usize,
    options: &ToricOptions,
) -> Result<ToricSolution> {
    region.validate()?;
    if !(truncation > 0.0 && truncation.is_finite()) {
        return Err(invalid("truncation must be positive"));
    }
    if resolution < 8 {
        return Err(invalid("toric resolution must be at least 8"));
    }
    let side = resolution + 1;
    let h = truncation / resolution as f64;
    let coord = |i: usize| -truncation + i as f64 * h;
    let margin = 2.0 * h;
    if region.max_coordinate() > -margin {
        return Err(invalid(format!(
            "log-region reaches {} but must stay two cells below the boundary max(x) = 0",
            region.max_coordinate()
        )));
    }

    let mut inside = vec![false; side * side];
    for j in 0..side {
        for i in 0..side {
            inside[j * side + i] = region.contains(coord(i), coord(j));
        }
    }
    if !inside.iter().any(|&b| b) {
        return Err(invalid("log-region contains no grid node"));
    }

    // obstacle: nodes of K, grid-line crossings of its boundary, exact corners
    let mut points: Vec<(f64, f64)> = (0..side * side)
        .filter(|&k| inside[k])
        .map(|k| (coord(k % side), coord(k / side)))
        .collect();
    for j in 0..side {
        for i in 0..resolution {
            let (a, b) = (j * side + i, j * side + i + 1);
            if inside[a] != inside[b] {
                let y = coord(j);
                let x = crossing(coord(i), coord(i + 1), inside[a], |x| region.contains(x, y));
                points.push((x, y));
            }
            let (a, b) = (i * side + j, (i + 1) * side + j);
            if inside[a] != inside[b] {
                let x = coord(j);
                let y = crossing(coord(i), coord(i + 1), inside[a], |y| region.contains(x, y));
                points.push((x, y));
            }
        }
    }
    let in_box = |p: &(f64, f64)| p.0 >= -truncation && p.1 >= -truncation && p.0 <= 0.0 && p.1 <= 0.0;
    points.extend(region.corners().into_iter().filter(in_box));

    let frontier = upper_right_hull(&points);
    let slopes = dual_slopes(&frontier);
    let mut v = vec![0.0f64; side * side];
    for j in 0..side {
        for i in 0..side {
            let (x, y) = (coord(i), coord(j));
            let best = slopes.iter().map(|b| b.0 * x + b.1 * y).fold(-1.0f64, f64::max);
            v[j * side + i] = best.min(0.0);
        }
    }

    let cell_area: Vec<f64> = frontier
        .iter()
        .map(|&p| subgradient_cell_area(p, frontier.iter().copied()))
        .collect();

    let band = options.edge_band as f64 * h;
    let total: f64 = cell_area.iter().sum();
    let near_edge: f64 = frontier
        .iter()
        .zip(&cell_area)
        .filter(|(p, _)| p.0 <= -truncation + band || p.1 <= -truncation + band)
        .map(|(_, a)| a)
        .sum();
    if near_edge > 1e-9 * total.max(1e-300) {
        return Err(Error::TruncationTooSmall(format!(
            "envelope carries Monge-Ampère mass {near_edge:.3e} (of {total:.3e}) within {} cells of the truncated edges x = -{truncation}",
            options.edge_band
        )));
    }

    Ok(ToricSolution {
        side,
        spacing: h,
        truncation,
        envelope: v,
        cell_area,
        facets: slopes.len(),
        frontier,
    })
}

/// Boundary point between `a` (inside iff `a_inside`) and `b` on a grid
/// line, by bisection.
fn crossing(mut a: f64, mut b: f64, a_inside: bool, contains: impl Fn(f64) -> bool) -> f64 {
    if !a_inside {
        std::mem::swap(&mut a, &mut b);
    }
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if contains(m) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

/// Vertices of the obstacle's convex hull whose outward normal cone meets
/// the open positive quadrant, ordered from the top-most point to the
/// right-most one.
fn upper_right_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    sorted.dedup();
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in &sorted {
        while upper.len() >= 2 {
            let (a, b) = (upper[upper.len() - 2], upper[upper.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                upper.pop();
            } else {
                break;
            }
        }
        upper.push(p);
    }
    let top = (0..upper.len())
        .max_by(|&a, &b| upper[a].1.total_cmp(&upper[b].1).then(a.cmp(&b)))
        .expect("obstacle is non-empty");
    upper.split_off(top)
}

/// Vertices of `{b ≥ 0 : b·y ≤ -1 on the obstacle}`: the two axis points
/// and one slope per frontier edge. The envelope is `max(-1, max_b b·x)`.
fn dual_slopes(frontier: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let top = frontier[0];
    let right = frontier[frontier.len() - 1];
    let mut slopes = vec![(1.0 / right.0.abs(), 0.0), (0.0, 1.0 / top.1.abs())];
    for w in frontier.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = (a.1 - b.1, b.0 - a.0);
        let d = n.0 * a.0 + n.1 * a.1;
        slopes.push((n.0 / -d, n.1 / -d));
    }
    slopes
}

/// Area of `{b ≥ 0 : b·(x - y) ≤ 0 for every obstacle point x, b·y ≥ -1}`
/// at a frontier point `y`: its share of the subgradient image.
fn subgradient_cell_area(y: (f64, f64), others: impl Iterator<Item = (f64, f64)>) -> f64 {
    let cap = 1.0 + 1.0 / y.0.abs().min(y.1.abs());
    let mut poly = vec![(0.0, 0.0), (cap, 0.0), (cap, cap), (0.0, cap)];
    let mut scratch = Vec::with_capacity(8);
    clip_half_plane(&poly, -y.0, -y.1, 1.0, &mut scratch);
    std::mem::swap(&mut poly, &mut scratch);
    for x in others {
        if x == y || poly.len() < 3 {
            continue;
        }
        clip_half_plane(&poly, x.0 - y.0, x.1 - y.1, 0.0, &mut scratch);
        std::mem::swap(&mut poly, &mut scratch);
    }
    polygon_area(&poly)
}

/// Sutherland-Hodgman clip of a convex polygon by `a1 x + a2 y ≤ c`.
fn clip_half_plane(poly: &[(f64, f64)], a1: f64, a2: f64, c: f64, out: &mut Vec<(f64, f64)>) {
    out.clear();
    let n = poly.len();
    for idx in 0..n {
        let p = poly[idx];
        let q = poly[(idx + 1) % n];
        let fp = a1 * p.0 + a2 * p.1 - c;
        let fq = a1 * q.0 + a2 * q.1 - c;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
}

fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let n = poly.len();
    let twice: f64 = (0..n)
        .map(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    0.5 * twice.abs()
}

/// Runs the calibration case `{max(x) ≤ log ½}` at the given grid and
/// checks the `(2π)^N N!` normalization against the closed form
/// `(2π)² / log(2)²`. Results are cached per grid.
pub fn toric_calibration(truncation: f64, resolution: usize, options: &ToricOptions) -> Result<f64> {
    type Key = (u64, usize, usize);
    static CACHE: OnceLock<Mutex<HashMap<Key, Result<f64>>>> = OnceLock::new();
    let key = (truncation.to_bits(), resolution, options.edge_band);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("calibration cache poisoned").get(&key) {
        return hit.clone();
    }
    let level = CALIBRATION_LEVEL.ln();
    let calibration_truncation = truncation.max(2.0 * level.abs());
    let outcome = solve_toric(
        &LogRegion::MaxSublevel { level },
        calibration_truncation,
        resolution,
        options,
    )
    .and_then(|sol| {
        let got = sol.capacity();
        let expected = capacity_sublevel(&Domain::Polydisk(2), CALIBRATION_LEVEL)?
            .cap
            .finite()
            .expect("closed form is finite");
        let rel = (got - expected).abs() / expected;
        if rel > CALIBRATION_TOLERANCE {
            Err(Error::Calibration(format!(
                "toric normalization (2π)²·2! gives {got:.6} for the bidisk of radius 1/2, closed form {expected:.6} (relative error {rel:.3e})"
            )))
        } else {
            Ok(rel)
        }
    });
    cache
        .lock()
        .expect("calibration cache poisoned")
        .insert(key, outcome.clone());
    outcome
}

/// Capacity of the Reinhardt compact with log-image `region`, relative to
/// the bidisk. The calibration case must pass on the same grid first. The
/// error bar is the larger of the calibration error and the change from
/// half the resolution.
pub fn capacity_toric_2d(
    region: &LogRegion,
    truncation: f64,
    resolution: usize,
    options: &ToricOptions,
) -> Result<CapacityValue> {
    let calibration_error = toric_calibration(truncation, resolution, options)?;
    let sol = solve_toric(region, truncation, resolution, options)?;
    let cap = sol.capacity();
    let coarse = solve_toric(region, truncation, (resolution / 2).max(8), options)
        .map(|s| (s.capacity() - cap).abs())
        .unwrap_or(0.0);
    CapacityValue::new(
        Capacity::Finite(cap),
        2,
        Provenance::Toric2d,
        (calibration_error * cap).max(coarse),
    )
}
