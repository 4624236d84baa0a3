//! Green capacity of a compact of the unit disk by a grid solve of the
//! relative extremal function.
//!
//! In one variable `u_{K,D}` is `-1` on `K`, `0` on the unit circle and
//! harmonic in between (holes of `K` fill in at `-1`). The discretization
//! is the five-point Laplacian on the square grid over `[-1,1]²`, with
//! Shortley-Weller arms where a grid line crosses the circle or the
//! boundary of an analytic `K`. The linear system is solved by
//! Gauss-Seidel smoothed V-cycles on a rediscretized grid hierarchy.

use serde::Serialize;

use super::region::Region;
use super::{Capacity, CapacityValue, Provenance};
use crate::error::{invalid, Error, Result};

const MIN_ARM: f64 = 1e-6;
const COARSEST_RESOLUTION: usize = 16;
const PRE_SWEEPS: usize = 2;
const POST_SWEEPS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSolverOptions {
    /// Stop once a full cycle changes no value by more than this.
    pub tolerance: f64,
    /// Budget of fine-grid relaxation sweeps.
    pub max_sweeps: usize,
    /// Also solve at half resolution and attach a Richardson error bar.
    pub richardson: bool,
}

impl Default for GridSolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_sweeps: 100_000,
            richardson: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NodeClass {
    Unknown,
    /// Node of `K`, value `-1`.
    Inside,
    /// On or beyond the unit circle, value `0`.
    Outside,
}

#[derive(Clone, Copy, Debug, Default)]
struct Stencil {
    coeff: [f64; 4],
    unknown_neighbor: [bool; 4],
    diag: f64,
}

/// One discretization level: geometry, stencils and Dirichlet data.
#[derive(Clone, Debug)]
pub struct DiskGrid {
    resolution: usize,
    side: usize,
    h: f64,
    class: Vec<NodeClass>,
    stencil: Vec<Stencil>,
    dirichlet_rhs: Vec<f64>,
    unknowns: Vec<usize>,
    analytic: bool,
}

const DIRS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

impl DiskGrid {
    /// Builds the grid with `resolution` cells across the diameter.
    pub fn new(region: &Region, resolution: usize) -> Result<Self> {
        Self::with_subdivision(region, resolution, 1)
    }

    /// A coarse level whose arms towards `K` are measured on the grid refined
    /// `sub` times, so that it sees the same `K` nodes as that grid.
    fn with_subdivision(region: &Region, resolution: usize, sub: usize) -> Result<Self> {
        if resolution < 8 {
            return Err(invalid("grid resolution must be at least 8"));
        }
        let side = resolution + 1;
        let h = 2.0 / resolution as f64;
        let coord = |i: usize| -1.0 + i as f64 * h;
        let mut class = vec![NodeClass::Outside; side * side];
        for j in 0..side {
            for i in 0..side {
                let (x, y) = (coord(i), coord(j));
                class[j * side + i] = if x.hypot(y) >= 1.0 {
                    NodeClass::Outside
                } else if region.contains(x, y) {
                    NodeClass::Inside
                } else {
                    NodeClass::Unknown
                };
            }
        }

        let limit = 1.0 - 2.0 * h;
        let mut inside_count = 0usize;
        for j in 0..side {
            for i in 0..side {
                if class[j * side + i] == NodeClass::Inside {
                    inside_count += 1;
                    if coord(i).hypot(coord(j)) > limit {
                        return Err(invalid(format!(
                            "K reaches within two cells of the unit circle at resolution {resolution}"
                        )));
                    }
                }
            }
        }
        if inside_count == 0 {
            return Err(invalid(format!("K contains no grid node at resolution {resolution}")));
        }
        if let Some(m) = region.max_modulus() {
            if m > limit {
                return Err(invalid(format!(
                    "K reaches radius {m}, beyond the admissible {limit} at resolution {resolution}"
                )));
            }
        }

        let mut stencil = vec![Stencil::default(); side * side];
        let mut dirichlet_rhs = vec![0.0; side * side];
        let mut unknowns = Vec::new();
        for j in 1..side - 1 {
            for i in 1..side - 1 {
                let idx = j * side + i;
                if class[idx] != NodeClass::Unknown {
                    continue;
                }
                unknowns.push(idx);
                let p = (coord(i), coord(j));
                let mut arm = [1.0f64; 4];
                let mut value = [0.0f64; 4];
                let mut unknown_neighbor = [false; 4];
                for (d, &(di, dj)) in DIRS.iter().enumerate() {
                    let qi = (i as isize + di) as usize;
                    let qj = (j as isize + dj) as usize;
                    let q = (coord(qi), coord(qj));
                    let fine_hit = (1..sub).find(|&k| {
                        let t = k as f64 / sub as f64;
                        region.contains(p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
                    });
                    match class[qj * side + qi] {
                        NodeClass::Unknown => match fine_hit {
                            Some(k) => {
                                arm[d] = k as f64 / sub as f64;
                                value[d] = -1.0;
                            }
                            None => unknown_neighbor[d] = true,
                        },
                        NodeClass::Outside => {
                            let (dx, dy) = (di as f64, dj as f64);
                            let pd = p.0 * dx + p.1 * dy;
                            let pp = p.0 * p.0 + p.1 * p.1;
                            let s = -pd + (pd * pd - pp + 1.0).max(0.0).sqrt();
                            arm[d] = (s / h).clamp(MIN_ARM, 1.0);
                            value[d] = 0.0;
                        }
                        NodeClass::Inside => {
                            arm[d] = match fine_hit {
                                Some(k) if !region.is_analytic() => k as f64 / sub as f64,
                                _ => region.entry_fraction(p, q).clamp(MIN_ARM, 1.0),
                            };
                            value[d] = -1.0;
                        }
                    }
                }
                let mut st = Stencil {
                    unknown_neighbor,
                    ..Stencil::default()
                };
                let mut rhs = 0.0;
                for d in 0..4 {
                    let opposite = d ^ 1;
                    let c = 2.0 / (arm[d] * (arm[d] + arm[opposite]) * h * h);
                    st.coeff[d] = c;
                    st.diag += c;
                    if !unknown_neighbor[d] {
                        rhs += c * value[d];
                    }
                }
                stencil[idx] = st;
                dirichlet_rhs[idx] = rhs;
            }
        }
        Ok(Self {
            resolution,
            side,
            h,
            class,
            stencil,
            dirichlet_rhs,
            unknowns,
            analytic: region.is_analytic(),
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    fn offset(&self, d: usize) -> isize {
        let (di, dj) = DIRS[d];
        di + dj * self.side as isize
    }

    /// The initial field: `-1` on `K` and every unknown node, `0` outside.
    /// It is a discrete subsolution, so Gauss-Seidel sweeps from it
    /// increase monotonically.
    pub fn initial_field(&self) -> ExtremalGridField {
        let values = self
            .class
            .iter()
            .map(|c| match c {
                NodeClass::Outside => 0.0,
                _ => -1.0,
            })
            .collect();
        ExtremalGridField {
            resolution: self.resolution,
            side: self.side,
            values,
            sweeps: 0,
            cycles: 0,
        }
    }

    fn sweep(&self, u: &mut [f64], rhs: &[f64]) -> f64 {
        let mut change = 0.0f64;
        for &idx in &self.unknowns {
            let st = &self.stencil[idx];
            let mut acc = rhs[idx];
            for d in 0..4 {
                if st.unknown_neighbor[d] {
                    acc += st.coeff[d] * u[(idx as isize + self.offset(d)) as usize];
                }
            }
            let new = acc / st.diag;
            change = change.max((new - u[idx]).abs());
            u[idx] = new;
        }
        change
    }

    fn residual(&self, u: &[f64], rhs: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|r| *r = 0.0);
        for &idx in &self.unknowns {
            let st = &self.stencil[idx];
            let mut au = st.diag * u[idx];
            for d in 0..4 {
                if st.unknown_neighbor[d] {
                    au -= st.coeff[d] * u[(idx as isize + self.offset(d)) as usize];
                }
            }
            out[idx] = rhs[idx] - au;
        }
    }

    /// One Gauss-Seidel relaxation sweep of the full problem; returns the
    /// largest change.
    pub fn relax_sweep(&self, field: &mut ExtremalGridField) -> f64 {
        field.sweeps += 1;
        self.sweep(&mut field.values, &self.dirichlet_rhs)
    }

    /// Mass of the discrete Laplacian of `u` carried by `K`: the sum of
    /// `Σ_nb (u_nb - u_P)` over `K` and the unknown nodes adjacent to it,
    /// i.e. the flux leaving that set through harmonic grid edges.
    pub fn laplacian_mass(&self, field: &ExtremalGridField) -> f64 {
        let n = self.side;
        let mut in_set = vec![false; n * n];
        for (idx, c) in self.class.iter().enumerate() {
            if *c == NodeClass::Inside {
                in_set[idx] = true;
                let (i, j) = (idx % n, idx / n);
                for &(di, dj) in &DIRS {
                    let q = (j as isize + dj) as usize * n + (i as isize + di) as usize;
                    if self.class[q] == NodeClass::Unknown {
                        in_set[q] = true;
                    }
                }
            }
        }
        let u = &field.values;
        let mut flux = 0.0;
        for idx in 0..n * n {
            if !in_set[idx] {
                continue;
            }
            let (i, j) = (idx % n, idx / n);
            for &(di, dj) in &DIRS {
                let q = (j as isize + dj) as usize * n + (i as isize + di) as usize;
                if !in_set[q] {
                    flux += u[q] - u[idx];
                }
            }
        }
        flux
    }
}

/// Grid approximation of the relative extremal function `u_{K,D}`.
#[derive(Clone, Debug)]
pub struct ExtremalGridField {
    resolution: usize,
    side: usize,
    values: Vec<f64>,
    sweeps: usize,
    cycles: usize,
}

impl ExtremalGridField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at node `(i, j)`, i.e. at `(-1 + i h, -1 + j h)`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.side + i]
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }
}

/// Grid hierarchy for the V-cycle.
struct Hierarchy {
    levels: Vec<DiskGrid>,
}

impl Hierarchy {
    fn new(region: &Region, resolution: usize) -> Result<Self> {
        let mut levels = vec![DiskGrid::new(region, resolution)?];
        let mut r = resolution;
        while r.is_multiple_of(2) && r / 2 >= COARSEST_RESOLUTION {
            r /= 2;
            // a coarse level may lose K entirely or get too close to the
            // circle; it then stops the hierarchy
            match DiskGrid::with_subdivision(region, r, resolution / r) {
                Ok(level) => levels.push(level),
                Err(_) => break,
            }
        }
        Ok(Self { levels })
    }

    fn v_cycle(&self, k: usize, u: &mut [f64], rhs: &[f64]) {
        let level = &self.levels[k];
        if k + 1 == self.levels.len() {
            for _ in 0..20_000 {
                if level.sweep(u, rhs) < 1e-14 {
                    break;
                }
            }
            return;
        }
        for _ in 0..PRE_SWEEPS {
            level.sweep(u, rhs);
        }
        let n = level.side;
        let mut r = vec![0.0; n * n];
        level.residual(u, rhs, &mut r);

        let coarse = &self.levels[k + 1];
        let nc = coarse.side;
        let mut rc = vec![0.0; nc * nc];
        for &cidx in &coarse.unknowns {
            let (ic, jc) = (cidx % nc, cidx / nc);
            let (i, j) = (2 * ic, 2 * jc);
            let at = |di: isize, dj: isize| r[(j as isize + dj) as usize * n + (i as isize + di) as usize];
            rc[cidx] = (4.0 * at(0, 0)
                + 2.0 * (at(1, 0) + at(-1, 0) + at(0, 1) + at(0, -1))
                + (at(1, 1) + at(1, -1) + at(-1, 1) + at(-1, -1)))
                / 16.0;
        }
        let mut ec = vec![0.0; nc * nc];
        self.v_cycle(k + 1, &mut ec, &rc);

        let coarse_value = |ic: usize, jc: usize| {
            let idx = jc * nc + ic;
            if coarse.class[idx] == NodeClass::Unknown {
                ec[idx]
            } else {
                0.0
            }
        };
        for &idx in &level.unknowns {
            let (i, j) = (idx % n, idx / n);
            let (ic, jc) = (i / 2, j / 2);
            let e = match (i % 2, j % 2) {
                (0, 0) => coarse_value(ic, jc),
                (1, 0) => 0.5 * (coarse_value(ic, jc) + coarse_value(ic + 1, jc)),
                (0, 1) => 0.5 * (coarse_value(ic, jc) + coarse_value(ic, jc + 1)),
                _ => {
                    0.25 * (coarse_value(ic, jc)
                        + coarse_value(ic + 1, jc)
                        + coarse_value(ic, jc + 1)
                        + coarse_value(ic + 1, jc + 1))
                }
            };
            u[idx] += e;
        }
        for _ in 0..POST_SWEEPS {
            level.sweep(u, rhs);
        }
    }

    fn solve(&self, options: &GridSolverOptions) -> Result<ExtremalGridField> {
        let fine = &self.levels[0];
        let mut field = fine.initial_field();
        let per_cycle = PRE_SWEEPS + POST_SWEEPS;
        let mut previous = field.values.clone();
        loop {
            self.v_cycle(0, &mut field.values, &fine.dirichlet_rhs);
            field.sweeps += per_cycle;
            field.cycles += 1;
            let change = field
                .values
                .iter()
                .zip(&previous)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if change < options.tolerance {
                return Ok(field);
            }
            if field.sweeps >= options.max_sweeps {
                return Err(Error::NonConvergence {
                    iterations: field.sweeps,
                    residual: change,
                });
            }
            previous.copy_from_slice(&field.values);
        }
    }
}

/// Solves for the relative extremal function of `K` at `resolution` and
/// returns it with the grid it lives on.
pub fn solve_extremal_field(
    region: &Region,
    resolution: usize,
    options: &GridSolverOptions,
) -> Result<(DiskGrid, ExtremalGridField)> {
    let hierarchy = Hierarchy::new(region, resolution)?;
    let field = hierarchy.solve(options)?;
    let grid = hierarchy.levels.into_iter().next().expect("finest level exists");
    Ok((grid, field))
}

/// Green capacity of `K` relative to the unit disk, `cap = ∫ Δu_K`, so that
/// the disk of radius `r` has capacity `2π / log(1/r)`.
///
/// With `options.richardson` the problem is also solved at half
/// resolution; the error bar is `|c_R - c_{R/2}| / (2^p - 1)` with `p = 2`
/// for analytic regions and `p = 1` for masks.
pub fn green_capacity_grid_1d(
    region: &Region,
    resolution: usize,
    options: &GridSolverOptions,
) -> Result<CapacityValue> {
    let (grid, field) = solve_extremal_field(region, resolution, options)?;
    let cap = grid.laplacian_mass(&field);
    let mut error_bar = 0.0;
    if options.richardson && resolution.is_multiple_of(2) && resolution / 2 >= COARSEST_RESOLUTION {
        let (coarse_grid, coarse_field) = solve_extremal_field(region, resolution / 2, options)?;
        let coarse_cap = coarse_grid.laplacian_mass(&coarse_field);
        let order = if grid.analytic { 2 } else { 1 };
        error_bar = (cap - coarse_cap).abs() / f64::from((1u32 << order) - 1);
    }
    CapacityValue::new(Capacity::Finite(cap), 1, Provenance::Grid1d, error_bar)
}
