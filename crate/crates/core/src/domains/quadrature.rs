use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Domain;
use crate::error::{invalid, Error, Result};

/// Number of diagonal rotations `z ↦ i^k z` each Monte-Carlo sample is
/// averaged over.
const SYMMETRY_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureRule {
    /// Points per circle on a torus, or Monte-Carlo sample count otherwise.
    pub resolution: usize,
    /// Largest polynomial degree of either integrand, when known. On a
    /// torus the rule is exact iff every degree is below the resolution.
    pub declared_degree: Option<u32>,
    pub seed: u64,
}

impl QuadratureRule {
    pub fn torus(resolution: usize, declared_degree: u32) -> Self {
        Self {
            resolution,
            declared_degree: Some(declared_degree),
            seed: 0,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self {
            resolution: samples,
            declared_degree: None,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureEstimate {
    pub value: Complex64,
    /// Zero for the exact torus rule.
    pub std_error: f64,
}

/// Approximates `∫ f · conj(g) dμ` over the distinguished boundary with its
/// normalized measure.
///
/// Toral domains use the equispaced tensor grid. Domains with a block of
/// size ≥ 2 use Monte-Carlo sampling (uniform on each block's sphere),
/// each sample averaged over a small cyclic group of diagonal rotations.
pub fn boundary_quadrature<F, G>(domain: &Domain, f: F, g: G, rule: QuadratureRule) -> Result<QuadratureEstimate>
where
    F: Fn(&[Complex64]) -> Complex64,
    G: Fn(&[Complex64]) -> Complex64,
{
    if rule.resolution == 0 {
        return Err(invalid("quadrature resolution must be positive"));
    }
    if domain.is_toral() {
        if let Some(degree) = rule.declared_degree {
            if degree as usize >= rule.resolution {
                return Err(Error::ResolutionTooSmall {
                    resolution: rule.resolution,
                    degree: degree as usize,
                });
            }
        }
        Ok(torus_grid(domain.dim(), rule.resolution, &f, &g))
    } else {
        Ok(symmetrized_monte_carlo(domain, rule, &f, &g))
    }
}

fn torus_grid<F, G>(dim: usize, resolution: usize, f: &F, g: &G) -> QuadratureEstimate
where
    F: Fn(&[Complex64]) -> Complex64,
    G: Fn(&[Complex64]) -> Complex64,
{
    let roots: Vec<Complex64> = (0..resolution)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / resolution as f64))
        .collect();
    let total = resolution.pow(dim as u32);
    let mut point = vec![Complex64::new(1.0, 0.0); dim];
    let mut sum = Complex64::new(0.0, 0.0);
    for flat in 0..total {
        let mut rest = flat;
        for coord in point.iter_mut() {
            *coord = roots[rest % resolution];
            rest /= resolution;
        }
        sum += f(&point) * g(&point).conj();
    }
    QuadratureEstimate {
        value: sum / total as f64,
        std_error: 0.0,
    }
}

fn symmetrized_monte_carlo<F, G>(domain: &Domain, rule: QuadratureRule, f: &F, g: &G) -> QuadratureEstimate
where
    F: Fn(&[Complex64]) -> Complex64,
    G: Fn(&[Complex64]) -> Complex64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(rule.seed);
    let blocks = domain.blocks();
    let rotations: Vec<Complex64> = (0..SYMMETRY_ORDER)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / SYMMETRY_ORDER as f64))
        .collect();
    let mut point = vec![Complex64::new(0.0, 0.0); domain.dim()];
    let mut rotated = point.clone();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    for _ in 0..rule.resolution {
        sample_boundary(&blocks, &mut rng, &mut point);
        let mut value = Complex64::new(0.0, 0.0);
        for w in &rotations {
            for (r, p) in rotated.iter_mut().zip(&point) {
                *r = p * w;
            }
            value += f(&rotated) * g(&rotated).conj();
        }
        value /= SYMMETRY_ORDER as f64;
        sum += value;
        sum_sq += value.norm_sqr();
    }
    let n = rule.resolution as f64;
    let mean = sum / n;
    let variance = if rule.resolution > 1 {
        ((sum_sq - n * mean.norm_sqr()) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    QuadratureEstimate {
        value: mean,
        std_error: (variance / n).sqrt(),
    }
}

/// Draws a point on the product of block spheres.
fn sample_boundary(blocks: &[usize], rng: &mut ChaCha8Rng, point: &mut [Complex64]) {
    let mut start = 0;
    for &l in blocks {
        let block = &mut point[start..start + l];
        start += l;
        if l == 1 {
            block[0] = Complex64::from_polar(1.0, rng.random::<f64>() * TAU);
            continue;
        }
        loop {
            for c in block.iter_mut() {
                *c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
            let norm = block.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-300 {
                block.iter_mut().for_each(|c| *c /= norm);
                break;
            }
        }
    }
}
