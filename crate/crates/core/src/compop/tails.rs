//! Geometric tail sums and the Taylor-truncation certificate.

use serde::{Deserialize, Serialize};

use super::symbol::Symbol;
use crate::domains::GoodReinhardtConstants;
use crate::error::{invalid, Result};

/// `A_0 = 1`, `A_m = m A_{m-1} + 1`.
pub fn tail_constant(m: u32) -> f64 {
    (1..=m).fold(1.0, |a, k| f64::from(k) * a + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeomTail {
    pub exact_sum: f64,
    pub bound: f64,
}

/// `Σ_{p ≥ l} p^m x^p` summed to convergence, and the bound
/// `A_m l^m x^l / (1 - x)^{m+1}`.
pub fn geom_tail(m: u32, l: u64, x: f64) -> Result<GeomTail> {
    if !(x > 0.0 && x < 1.0) {
        return Err(invalid(format!("x must lie in (0,1), got {x}")));
    }
    if l == 0 {
        return Err(invalid("tail start l must be at least 1"));
    }
    let mf = f64::from(m);
    let ln_x = x.ln();
    let peak = mf / -ln_x;
    let term = |p: u64| (mf * (p as f64).ln() + p as f64 * ln_x).exp();
    let mut sum = 0.0;
    let mut p = l;
    loop {
        let t = term(p);
        sum += t;
        if (p as f64) > peak && t <= f64::EPSILON * 1e-3 * sum {
            break;
        }
        if t == 0.0 && (p as f64) > peak {
            break;
        }
        p += 1;
    }
    let lf = l as f64;
    let bound = tail_constant(m) * (mf * lf.ln() + lf * ln_x).exp() / (1.0 - x).powi(m as i32 + 1);
    Ok(GeomTail { exact_sum: sum, bound })
}

/// Upper bound on `‖C_φ(f - g)‖` for `‖f‖ ≤ 1` and `g` the Taylor section
/// of `f` of degree `l`:
/// `M_N (l+1)^{(cN+1)/2} r_0^l / (1 - r_0²)^{(cN+1)/2}` with
/// `M_N = sqrt(C_N A_{cN})`.
pub fn truncation_tail_bound(r0: f64, l: u32, constants: &GoodReinhardtConstants) -> Result<f64> {
    if !(0.0..1.0).contains(&r0) {
        return Err(invalid(format!("range radius must lie in [0,1), got {r0}")));
    }
    let cn = constants.c * constants.dim as u32;
    let m_n = (constants.c_n * tail_constant(cn)).sqrt();
    let half = (f64::from(cn) + 1.0) / 2.0;
    if r0 == 0.0 {
        return Ok(if l == 0 { m_n } else { 0.0 });
    }
    let ln = m_n.ln() + half * (f64::from(l) + 1.0).ln() + f64::from(l) * r0.ln() - half * (1.0 - r0 * r0).ln();
    Ok(ln.exp())
}

/// Smallest `D` whose truncation certificate is below `1e-12 · a_target`.
pub fn default_truncation_degree(symbol: &Symbol, a_target: f64) -> Result<u32> {
    if !(a_target > 0.0) {
        return Err(invalid("target singular value must be positive"));
    }
    let constants = symbol.domain().good_reinhardt_constants();
    for d in 1..=100_000 {
        if truncation_tail_bound(symbol.range_radius(), d, &constants)? < 1e-12 * a_target {
            return Ok(d);
        }
    }
    Err(invalid(format!(
        "no truncation degree up to 100000 certifies {a_target:e} at r_0 = {}",
        symbol.range_radius()
    )))
}
