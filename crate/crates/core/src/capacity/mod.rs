//! Monge-Ampère (relative) capacities and the derived quantities `τ_N`,
//! `Γ_N`.
//!
//! The capacity of `K ⋐ Ω` is the total Monge-Ampère mass of the relative
//! extremal function `u*_{K,Ω}`, normalized so that `dd^c log|z|` has mass
//! `2π`. With this normalization a gauge sub-level set `{j_Ω ≤ s}` has
//! capacity `(2π)^N / log(1/s)^N`.

mod grid1d;
mod region;
mod toric;

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domains::Domain;
use crate::error::{invalid, Result};
use crate::lattice::ln_factorial;

pub use grid1d::{green_capacity_grid_1d, solve_extremal_field, DiskGrid, ExtremalGridField, GridSolverOptions};
pub use region::{Region, RegionShape};
pub use toric::{
    capacity_toric_2d, solve_toric, toric_calibration, LogRegion, ToricOptions, ToricSolution, CALIBRATION_TOLERANCE,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    ProductRule,
    Grid1d,
    Toric2d,
    UpperBoundOnly,
}

/// A capacity value; `Infinite` is an explicit sentinel, never an overflowed
/// float.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capacity {
    Finite(f64),
    Infinite,
}

impl Capacity {
    pub fn finite(self) -> Option<f64> {
        match self {
            Capacity::Finite(v) => Some(v),
            Capacity::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Capacity::Infinite)
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(v) => write!(f, "{v}"),
            Capacity::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityValue {
    pub cap: Capacity,
    pub dim: usize,
    pub provenance: Provenance,
    /// Absolute error estimate; zero for closed forms.
    pub error_bar: f64,
}

impl CapacityValue {
    pub fn new(cap: Capacity, dim: usize, provenance: Provenance, error_bar: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("capacity dimension must be positive"));
        }
        if let Capacity::Finite(v) = cap {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!(
                    "finite capacity must be a non-negative float, got {v}"
                )));
            }
        }
        Ok(Self {
            cap,
            dim,
            provenance,
            error_bar,
        })
    }

    pub fn infinite(dim: usize, provenance: Provenance) -> Self {
        Self {
            cap: Capacity::Infinite,
            dim,
            provenance,
            error_bar: 0.0,
        }
    }

    /// `τ_N = cap / (2π)^N`.
    pub fn tau(&self) -> Capacity {
        match self.cap {
            Capacity::Finite(v) => Capacity::Finite(v / TAU.powi(self.dim as i32)),
            Capacity::Infinite => Capacity::Infinite,
        }
    }

    /// `Γ_N = exp[-2π (N!/cap)^{1/N}]`.
    pub fn gamma(&self) -> f64 {
        gamma_n(self.cap, self.dim)
    }
}

/// `Γ_N(cap) = exp[-2π (N!/cap)^{1/N}]`, equal to 1 at the infinite sentinel
/// and 0 for a pluripolar (zero-capacity) set.
pub fn gamma_n(cap: Capacity, dim: usize) -> f64 {
    match cap {
        Capacity::Infinite => 1.0,
        Capacity::Finite(v) if v <= 0.0 => 0.0,
        Capacity::Finite(v) => (-zakharyuta_rate(v, dim)).exp(),
    }
}

/// The exponential rate `2π (N!/cap)^{1/N}`.
pub fn zakharyuta_rate(cap: f64, dim: usize) -> f64 {
    let n = dim as f64;
    TAU * ((ln_factorial(dim as u32) - cap.ln()) / n).exp()
}

/// Capacity of the gauge sub-level set `{j_Ω ≤ s}` relative to `Ω`.
pub fn capacity_sublevel(domain: &Domain, s: f64) -> Result<CapacityValue> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("sub-level parameter must lie in (0,1), got {s}")));
    }
    let n = domain.dim() as i32;
    let v = (TAU / (1.0 / s).ln()).powi(n);
    let cap = if v.is_finite() {
        Capacity::Finite(v)
    } else {
        Capacity::Infinite
    };
    CapacityValue::new(cap, domain.dim(), Provenance::ClosedForm, 0.0)
}

/// Capacity of a cartesian product of compacts in a product domain: the
/// product of the factor capacities. Zero absorbs infinity (a product with
/// a pluripolar factor is pluripolar).
pub fn capacity_product(factors: &[CapacityValue]) -> Result<CapacityValue> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| invalid("capacity product needs at least one factor"))?;
    if rest.is_empty() {
        return Ok(*first);
    }
    let dim = factors.iter().map(|f| f.dim).sum();
    let has_zero = factors.iter().any(|f| f.cap == Capacity::Finite(0.0));
    if has_zero {
        return CapacityValue::new(Capacity::Finite(0.0), dim, Provenance::ProductRule, 0.0);
    }
    if factors.iter().any(|f| f.cap.is_infinite()) {
        return Ok(CapacityValue::infinite(dim, Provenance::ProductRule));
    }
    let mut product = 1.0;
    let mut relative = 0.0;
    for f in factors {
        let v = f.cap.finite().expect("finite checked above");
        product *= v;
        relative += f.error_bar / v;
    }
    let cap = if product.is_finite() {
        Capacity::Finite(product)
    } else {
        Capacity::Infinite
    };
    CapacityValue::new(cap, dim, Provenance::ProductRule, relative * product)
}

/// Upper bound `C_N / dist(K, S)^N` for compacts of the unit ball, with
/// `C_N = 4^N N! λ_{2N}(B_N) = (4π)^N`.
pub fn capacity_upper_bound_ball(dim: usize, dist_to_sphere: f64) -> Result<CapacityValue> {
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    if !(dist_to_sphere > 0.0 && dist_to_sphere <= 1.0) {
        return Err(invalid(format!(
            "distance to the sphere must lie in (0,1], got {dist_to_sphere}"
        )));
    }
    let v = ball_bound_constant(dim) / dist_to_sphere.powi(dim as i32);
    let cap = if v.is_finite() {
        Capacity::Finite(v)
    } else {
        Capacity::Infinite
    };
    CapacityValue::new(cap, dim, Provenance::UpperBoundOnly, 0.0)
}

/// `4^N N! λ_{2N}(B_N)` with `λ_{2N}(B_N) = π^N / N!`.
pub fn ball_bound_constant(dim: usize) -> f64 {
    let n = dim as i32;
    let volume = PI.powi(n) / ln_factorial(dim as u32).exp();
    4f64.powi(n) * ln_factorial(dim as u32).exp() * volume
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite(c: &CapacityValue) -> f64 {
        c.cap.finite().unwrap()
    }

    #[test]
    fn sublevel_examples() {
        let d1 = Domain::polydisk(1).unwrap();
        let c = capacity_sublevel(&d1, 0.5).unwrap();
        assert!((finite(&c) - TAU / 2f64.ln()).abs() < 1e-12);
        assert!((finite(&c) - 9.0647).abs() < 1e-4);
        let d2 = Domain::polydisk(2).unwrap();
        let c2 = capacity_sublevel(&d2, 0.5).unwrap();
        assert!((finite(&c2) - 82.17).abs() < 0.01);
        assert!(capacity_sublevel(&d1, 1.0).is_err());
        assert!(capacity_sublevel(&d1, 0.0).is_err());
    }

    #[test]
    fn sublevel_diverges_monotonically() {
        let d = Domain::polydisk(1).unwrap();
        let mut last = 0.0;
        for k in 1..50 {
            let s = 1.0 - 0.5f64.powi(k);
            let c = capacity_sublevel(&d, s).unwrap();
            let v = finite(&c);
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn product_rule_examples() {
        let d1 = Domain::polydisk(1).unwrap();
        let one = capacity_sublevel(&d1, 0.5).unwrap();
        let prod = capacity_product(&[one, one]).unwrap();
        assert_eq!(prod.provenance, Provenance::ProductRule);
        assert_eq!(prod.dim, 2);
        let direct = capacity_sublevel(&Domain::polydisk(2).unwrap(), 0.5).unwrap();
        assert!((finite(&prod) - finite(&direct)).abs() <= 1e-12 * finite(&direct));
        assert_eq!(capacity_product(&[one]).unwrap(), one);
        let inf = CapacityValue::infinite(1, Provenance::ClosedForm);
        assert!(capacity_product(&[one, inf]).unwrap().cap.is_infinite());
        let zero = CapacityValue::new(Capacity::Finite(0.0), 1, Provenance::ClosedForm, 0.0).unwrap();
        assert_eq!(capacity_product(&[zero, inf]).unwrap().cap, Capacity::Finite(0.0));
        assert!(capacity_product(&[]).is_err());
    }

    #[test]
    fn gamma_examples() {
        for r in [0.1, 0.5, 0.93] {
            let cap = Capacity::Finite(TAU / (1.0f64 / r).ln());
            assert!((gamma_n(cap, 1) - r).abs() < 1e-12);
        }
        assert_eq!(gamma_n(Capacity::Infinite, 3), 1.0);
        let (s1, s2) = (2f64.ln(), (10.0f64 / 3.0).ln());
        let cap = Capacity::Finite(TAU * TAU / (s1 * s2));
        let expected = (-(2.0 * s1 * s2).sqrt()).exp();
        assert!((gamma_n(cap, 2) - expected).abs() < 1e-12);
        assert!((expected - 0.2747).abs() < 1e-4);
    }

    #[test]
    fn gamma_is_increasing_in_capacity() {
        for dim in 1..=4 {
            let mut last = 0.0;
            for k in 1..200 {
                let g = gamma_n(Capacity::Finite(0.5 * k as f64), dim);
                assert!(g > last && g < 1.0);
                last = g;
            }
        }
    }

    #[test]
    fn tau_is_scaled_capacity() {
        let c = capacity_sublevel(&Domain::ball(2).unwrap(), 0.3).unwrap();
        let tau = c.tau().finite().unwrap();
        assert!((tau - 1.0 / (1.0f64 / 0.3).ln().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn ball_upper_bound_examples() {
        assert!((ball_bound_constant(1) - 4.0 * PI).abs() < 1e-12);
        let b = capacity_upper_bound_ball(1, 0.5).unwrap();
        assert!((finite(&b) - 8.0 * PI).abs() < 1e-12);
        assert_eq!(b.provenance, Provenance::UpperBoundOnly);
        let near = capacity_upper_bound_ball(2, 1e-200).unwrap();
        assert!(near.cap.is_infinite());
        assert!(capacity_upper_bound_ball(1, 0.0).is_err());
    }
}
