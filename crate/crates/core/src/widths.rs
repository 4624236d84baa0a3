//! Kolmogorov widths of the restricted `H^∞` unit ball, bracketed through
//! Hilbertian widths of a sampled evaluation matrix.
//!
//! With `E[i, α] = z_i^α / ‖z^α‖` on `m` sample points and the basis
//! `{|α| ≤ D}`:
//! - `lower_n = σ_n(E) / (√m · S_D)` where `S_D² = Σ_α sup_Ω |e_α|²`: a
//!   coefficient vector of norm `1/S_D` gives a function of sup norm at most
//!   one, and the sup norm on `K` dominates the mean square over samples;
//! - `upper_n = σ_n(E) + tail(r_K, D)`, discarding the top `n - 1` right
//!   singular vectors and bounding the Taylor tail beyond degree `D`.
//!
//! Both sequences are regularized by running minima. The factor `√m · S_D`
//! is sub-exponential and leaves `n`-th-root rates unchanged.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compop::{singular_values, truncation_tail_bound};
use crate::domains::Domain;
use crate::error::{invalid, Error, Result};
use crate::lattice::{ln_factorial, GradedBasis, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub sample_count: usize,
    pub basis_degree: u32,
    /// `√m · S_D`, with `upper ≤ sandwich_factor · lower + tail`.
    pub sandwich_factor: f64,
}

/// Equispaced tensor grid on the torus `{|z_j| = radius}`.
pub fn torus_samples(dim: usize, radius: f64, per_axis: usize) -> Vec<Vec<Complex64>> {
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut k| {
            (0..dim)
                .map(|_| {
                    let j = k % per_axis;
                    k /= per_axis;
                    Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / per_axis as f64)
                })
                .collect()
        })
        .collect()
}

/// Seeded points on the distinguished boundary of `{j_Ω ≤ radius}`
/// (uniform on each block's sphere).
pub fn boundary_samples(domain: &Domain, radius: f64, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut z = Vec::with_capacity(domain.dim());
            for l in domain.blocks() {
                let block: Vec<Complex64> = (0..l)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im)
                    })
                    .collect();
                let norm = block.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                z.extend(block.into_iter().map(|c| c * (radius / norm)));
            }
            z
        })
        .collect()
}

/// `log sup_Ω |z^α|`, blockwise `½ (Σ α_i log α_i − |α| log |α|)`.
fn ln_sup_monomial(domain: &Domain, alpha: &MultiIndex) -> f64 {
    let e = alpha.entries();
    let xlogx = |g: u32| if g == 0 { 0.0 } else { f64::from(g) * f64::from(g).ln() };
    let mut start = 0;
    let mut acc = 0.0;
    for l in domain.blocks() {
        let block = &e[start..start + l];
        start += l;
        let total: u32 = block.iter().sum();
        acc += 0.5 * (block.iter().map(|&g| xlogx(g)).sum::<f64>() - xlogx(total));
    }
    acc
}

/// Width brackets for `n = 1..=n_max` from samples of `K`.
pub fn widths_sampled(
    domain: &Domain,
    samples: &[Vec<Complex64>],
    degree: u32,
    n_max: usize,
) -> Result<Vec<WidthEstimate>> {
    let dim = domain.dim();
    let m = samples.len();
    if m == 0 {
        return Err(invalid("need at least one sample"));
    }
    let mut r_k = 0.0f64;
    for z in samples {
        let j = domain.minkowski(z)?;
        r_k = r_k.max(j);
    }
    if !(r_k < 1.0) {
        return Err(invalid(format!("samples must lie inside {domain}; max gauge is {r_k}")));
    }
    let basis = GradedBasis::new(dim, degree);
    let size = basis.len();
    if n_max == 0 || n_max > size {
        return Err(invalid(format!("n_max must lie in 1..={size} for degree {degree}")));
    }
    if m < size {
        return Err(Error::IllConditioned(format!(
            "{m} samples cannot resolve {size} basis functions"
        )));
    }

    let ln_norm: Vec<f64> = basis
        .indices()
        .iter()
        .map(|a| 0.5 * domain.ln_monomial_norm_sq(a))
        .collect();
    let rows: Vec<Vec<Complex64>> = samples
        .par_iter()
        .map(|z| {
            basis
                .indices()
                .iter()
                .zip(&ln_norm)
                .map(|(a, ln)| {
                    a.entries()
                        .iter()
                        .zip(z)
                        .fold(Complex64::new((-ln).exp(), 0.0), |acc, (&g, w)| acc * w.powu(g))
                })
                .collect()
        })
        .collect();
    let e = DMatrix::from_fn(m, size, |i, k| rows[i][k]);

    // aliasing check on the column-normalized matrix
    let col_norms: Vec<f64> = (0..size).map(|k| e.column(k).norm()).collect();
    if let Some(k) = col_norms.iter().position(|&c| c == 0.0) {
        return Err(Error::IllConditioned(format!(
            "basis function {} vanishes on every sample",
            basis.indices()[k]
        )));
    }
    let scaled = DMatrix::from_fn(m, size, |i, k| e[(i, k)] / col_norms[k]);
    let scaled_sv = singular_values(&scaled)?;
    let cond = scaled_sv[0] / scaled_sv[size - 1];
    if !(cond < 1e10) {
        return Err(Error::IllConditioned(format!(
            "column-normalized evaluation matrix has condition number {cond:.3e} ({m} samples, degree {degree})"
        )));
    }

    let sigma = singular_values(&e)?;
    let s_d = basis
        .indices()
        .iter()
        .zip(&ln_norm)
        .map(|(a, ln)| (2.0 * (ln_sup_monomial(domain, a) - ln)).exp())
        .sum::<f64>()
        .sqrt();
    let sandwich = (m as f64).sqrt() * s_d;
    let tail = truncation_tail_bound(r_k, degree, &domain.good_reinhardt_constants())?;

    let mut lower_run = f64::INFINITY;
    let mut upper_run = f64::INFINITY;
    Ok((1..=n_max)
        .map(|n| {
            let s = sigma[n - 1];
            lower_run = lower_run.min(s / sandwich);
            upper_run = upper_run.min(s + tail);
            WidthEstimate {
                n,
                lower: lower_run,
                upper: upper_run,
                sample_count: m,
                basis_degree: degree,
                sandwich_factor: sandwich,
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthRate {
    /// Least-squares slope of `-log d_{n^N}` against `n`.
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// Relative standard error of the slope.
    pub delta_fit: f64,
    pub points: usize,
}

/// Fits `-log sqrt(lower · upper)` at index `n^N` against `n` over
/// `n_range`.
pub fn width_rate(estimates: &[WidthEstimate], dim: usize, n_range: RangeInclusive<usize>) -> Result<WidthRate> {
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in n_range {
        let idx = n.pow(dim as u32);
        let Some(w) = estimates.iter().find(|w| w.n == idx) else {
            continue;
        };
        if w.lower > 0.0 && w.upper > 0.0 {
            xs.push(n as f64);
            ys.push(-0.5 * (w.lower.ln() + w.upper.ln()));
        }
    }
    if xs.len() < 8 {
        return Err(Error::DegenerateFit(format!(
            "need at least 8 estimates with positive brackets, have {}",
            xs.len()
        )));
    }
    let k = xs.len();
    let a = DMatrix::from_fn(k, 2, |r, c| if c == 0 { xs[r] } else { 1.0 });
    let b = DVector::from_column_slice(&ys);
    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let residual = (&a * &x - &b).norm();
    let mean = xs.iter().sum::<f64>() / k as f64;
    let sxx: f64 = xs.iter().map(|v| (v - mean).powi(2)).sum();
    let se = if k > 2 {
        (residual * residual / (k - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    let slope = x[0];
    Ok(WidthRate {
        slope,
        intercept: x[1],
        residual,
        delta_fit: if slope != 0.0 { se / slope.abs() } else { se },
        points: k,
    })
}

/// The rate `(N!/τ_N)^{1/N} = 2π (N!/cap)^{1/N}` predicted for a compact
/// of capacity `cap`.
pub fn predicted_rate(cap: f64, dim: usize) -> f64 {
    std::f64::consts::TAU * ((ln_factorial(dim as u32) - cap.ln()) / dim as f64).exp()
}

/// CSV with columns `n,lower,upper,sandwich_factor`.
pub fn widths_csv(estimates: &[WidthEstimate]) -> String {
    let mut out = String::from("n,lower,upper,sandwich_factor\n");
    for w in estimates {
        let _ = writeln!(out, "{},{:e},{:e},{:e}", w.n, w.lower, w.upper, w.sandwich_factor);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(values: &[f64]) -> Vec<WidthEstimate> {
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| WidthEstimate {
                n: k + 1,
                lower: v,
                upper: v,
                sample_count: 1,
                basis_degree: 0,
                sandwich_factor: 1.0,
            })
            .collect()
    }

    #[test]
    fn synthetic_rates() {
        let s: f64 = 0.3;
        let geo: Vec<f64> = (1..=40).map(|n| s.powi(n)).collect();
        let r = width_rate(&synthetic(&geo), 1, 1..=40).unwrap();
        assert!((r.slope - (1.0 / s).ln()).abs() < 1e-6);
        let flat = vec![0.5; 40];
        let r = width_rate(&synthetic(&flat), 1, 1..=40).unwrap();
        assert!(r.slope.abs() < 1e-12);
        assert!(width_rate(&synthetic(&geo[..5]), 1, 1..=40).is_err());
    }

    #[test]
    fn circle_first_width_brackets_one() {
        let d = Domain::polydisk(1).unwrap();
        let samples = torus_samples(1, 0.4, 64);
        let w = widths_sampled(&d, &samples, 20, 10).unwrap();
        assert!(w[0].lower <= 1.0 && 1.0 <= w[0].upper);
        for pair in w.windows(2) {
            assert!(pair[1].lower <= pair[0].lower && pair[1].upper <= pair[0].upper);
        }
        assert!(w.iter().all(|e| e.lower <= e.upper));
    }

    #[test]
    fn aliased_sampling_is_refused() {
        let d = Domain::polydisk(1).unwrap();
        let samples = torus_samples(1, 0.4, 16);
        let err = widths_sampled(&d, &samples, 20, 5).unwrap_err();
        assert!(matches!(err, Error::IllConditioned(_)), "{err:?}");
    }

    #[test]
    fn samples_outside_are_rejected() {
        let d = Domain::ball(2).unwrap();
        let samples = torus_samples(2, 0.8, 8);
        assert!(widths_sampled(&d, &samples, 2, 3).is_err());
        let inside = boundary_samples(&d, 0.5, 50, 1);
        assert!(inside.iter().all(|z| (d.minkowski(z).unwrap() - 0.5).abs() < 1e-12));
        assert_eq!(inside, boundary_samples(&d, 0.5, 50, 1));
    }

    #[test]
    fn predicted_rate_examples() {
        let cap = std::f64::consts::TAU / (1.0f64 / 0.4).ln();
        assert!((predicted_rate(cap, 1) - (1.0f64 / 0.4).ln()).abs() < 1e-12);
        let cap2 = cap_sublevel2(0.3);
        assert!((predicted_rate(cap2, 2) - 2f64.sqrt() * (1.0f64 / 0.3).ln()).abs() < 1e-12);
    }

    fn cap_sublevel2(s: f64) -> f64 {
        (std::f64::consts::TAU / (1.0f64 / s).ln()).powi(2)
    }

    #[test]
    fn csv_header() {
        let csv = widths_csv(&synthetic(&[1.0]));
        assert!(csv.starts_with("n,lower,upper,sandwich_factor\n1,"));
    }
}
