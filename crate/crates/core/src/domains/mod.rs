//! The three domain families: polydisk, Euclidean ball, product of balls.
//!
//! Everything is expressed through the block structure: a polydisk is a
//! product of one-dimensional balls and a ball is a product with a single
//! block, so the gauge and the monomial norms share one code path.

mod quadrature;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{enumerate_degree, ln_binomial, ln_factorial, MultiIndex};

pub use quadrature::{boundary_quadrature, QuadratureEstimate, QuadratureRule};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Domain {
    Polydisk(usize),
    Ball(usize),
    ProductOfBalls(Vec<usize>),
}

impl Domain {
    pub fn polydisk(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("polydisk dimension must be positive"));
        }
        Ok(Domain::Polydisk(n))
    }

    pub fn ball(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("ball dimension must be positive"));
        }
        Ok(Domain::Ball(n))
    }

    pub fn product_of_balls(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(invalid("product of balls needs non-empty positive block sizes"));
        }
        Ok(Domain::ProductOfBalls(blocks))
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Polydisk(n) | Domain::Ball(n) => *n,
            Domain::ProductOfBalls(blocks) => blocks.iter().sum(),
        }
    }

    /// Block sizes `l_1, …, l_m` of the product-of-balls representation.
    pub fn blocks(&self) -> Vec<usize> {
        match self {
            Domain::Polydisk(n) => vec![1; *n],
            Domain::Ball(n) => vec![*n],
            Domain::ProductOfBalls(blocks) => blocks.clone(),
        }
    }

    /// True when every block is one-dimensional, i.e. the distinguished
    /// boundary is a torus.
    pub fn is_toral(&self) -> bool {
        self.blocks().iter().all(|&l| l == 1)
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(invalid(format!(
                "point has {} coordinates, domain {} has dimension {}",
                z.len(),
                self,
                self.dim()
            )));
        }
        if z.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(invalid("point must be finite"));
        }
        Ok(())
    }

    /// The gauge `j_Ω`: maximum over blocks of the block's Euclidean norm.
    pub fn minkowski(&self, z: &[Complex64]) -> Result<f64> {
        self.check_point(z)?;
        Ok(self.gauge_unchecked(z))
    }

    pub(crate) fn gauge_unchecked(&self, z: &[Complex64]) -> f64 {
        let mut start = 0;
        let mut gauge = 0.0f64;
        for l in self.blocks() {
            let block = &z[start..start + l];
            start += l;
            let norm = if l == 1 {
                block[0].norm()
            } else {
                block.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
            };
            gauge = gauge.max(norm);
        }
        gauge
    }

    /// Pluricomplex Green function with pole at the origin, `log j_Ω(z)`.
    /// Returns `-inf` at the pole.
    pub fn green_function(&self, z: &[Complex64]) -> Result<f64> {
        let j = self.minkowski(z)?;
        if j > 1.0 + 1e-12 {
            return Err(invalid(format!("point lies outside {self} (gauge {j})")));
        }
        if j == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(j.ln())
    }

    /// Squared H² norm of `z^α`, evaluated in log-space.
    pub fn monomial_norm_sq(&self, alpha: &MultiIndex) -> Result<f64> {
        if alpha.dim() != self.dim() {
            return Err(invalid(format!(
                "multi-index {alpha} does not match dimension {}",
                self.dim()
            )));
        }
        Ok(self.ln_monomial_norm_sq(alpha).exp())
    }

    /// `log ‖z^α‖²`, product over blocks of `(l-1)! β! / (l-1+|β|)!`.
    pub fn ln_monomial_norm_sq(&self, alpha: &MultiIndex) -> f64 {
        let entries = alpha.entries();
        let mut start = 0;
        let mut acc = 0.0;
        for l in self.blocks() {
            let block = &entries[start..start + l];
            start += l;
            let l = l as u32;
            let block_degree: u32 = block.iter().sum();
            let block_fact: f64 = block.iter().map(|&b| ln_factorial(b)).sum();
            acc += ln_factorial(l - 1) + block_fact - ln_factorial(l - 1 + block_degree);
        }
        acc
    }

    /// Constants `(C_N, c)` for which the domain is a good complete
    /// Reinhardt domain.
    pub fn good_reinhardt_constants(&self) -> GoodReinhardtConstants {
        let n = self.dim();
        match self {
            Domain::Polydisk(_) => GoodReinhardtConstants {
                dim: n,
                c_n: polydisk_constant(n),
                c: 1,
            },
            Domain::Ball(_) => GoodReinhardtConstants {
                dim: n,
                c_n: 2f64.powi(n as i32),
                c: 1,
            },
            Domain::ProductOfBalls(blocks) => GoodReinhardtConstants {
                dim: n,
                c_n: polydisk_constant(blocks.len()) * 2f64.powi(n as i32),
                c: 2,
            },
        }
    }

    /// Evaluates both sides of the good-Reinhardt inequality at degree `p`.
    pub fn good_reinhardt_check(&self, z: &[Complex64], p: u32) -> Result<GoodReinhardtCheck> {
        let j = self.minkowski(z)?;
        if !(j < 1.0) {
            return Err(invalid(format!("point must be interior, gauge is {j}")));
        }
        let moduli: Vec<f64> = z.iter().map(|c| c.norm()).collect();
        let lhs = enumerate_degree(self.dim(), p)
            .iter()
            .map(|alpha| {
                let ln_mod: f64 = alpha
                    .entries()
                    .iter()
                    .zip(&moduli)
                    .map(|(&a, &m)| if a == 0 { 0.0 } else { 2.0 * f64::from(a) * m.ln() })
                    .sum();
                (ln_mod - self.ln_monomial_norm_sq(alpha)).exp()
            })
            .sum::<f64>();
        let rhs = self.good_reinhardt_constants().rhs(p, j);
        Ok(GoodReinhardtCheck {
            lhs,
            rhs,
            ok: lhs <= rhs * (1.0 + 1e-12),
        })
    }
}

/// Constants of the inequality `Σ_{|α|=p} |z^α|²/‖e_α‖² ≤ C_N p^{cN} j(z)^{2p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodReinhardtConstants {
    pub dim: usize,
    pub c_n: f64,
    pub c: u32,
}

impl GoodReinhardtConstants {
    /// `C_N max(p,1)^{cN} j^{2p}`.
    pub fn rhs(&self, p: u32, gauge: f64) -> f64 {
        let exponent = (self.c as usize * self.dim) as f64;
        self.c_n * f64::from(p.max(1)).powf(exponent) * gauge.powi(2 * p as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GoodReinhardtCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `sup_p binomial(N-1+p, p) / max(p,1)^N`, scanned over `p ≤ 10^6`.
///
/// The ratio is decreasing for `p ≥ 1`, so the scan settles at `p = 1`
/// with value `N`; the scan is kept as the computed certificate.
pub fn polydisk_constant(n: usize) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("constant cache poisoned").get(&n) {
        return *v;
    }
    let nn = n as u32;
    let mut best = 1.0f64;
    for p in 1..=1_000_000u32 {
        let ln_ratio = ln_binomial(nn - 1 + p, p) - f64::from(nn) * f64::from(p).ln();
        best = best.max(ln_ratio.exp());
    }
    // integer-valued supremum; remove log-gamma rounding
    let best = if (best - best.round()).abs() < 1e-9 {
        best.round()
    } else {
        best
    };
    cache.lock().expect("constant cache poisoned").insert(n, best);
    best
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Polydisk(n) => write!(f, "polydisk:{n}"),
            Domain::Ball(n) => write!(f, "ball:{n}"),
            Domain::ProductOfBalls(blocks) => {
                let parts: Vec<String> = blocks.iter().map(|l| l.to_string()).collect();
                write!(f, "pob:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("domain tag `{s}` lacks `kind:`")))?;
        let parse_usize = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad integer `{t}` in domain tag `{s}`")))
        };
        match kind {
            "polydisk" => Domain::polydisk(parse_usize(rest)?),
            "ball" => Domain::ball(parse_usize(rest)?),
            "pob" => Domain::product_of_balls(rest.split(',').map(parse_usize).collect::<Result<Vec<_>>>()?),
            other => Err(Error::Parse(format!("unknown domain kind `{other}`"))),
        }
    }
}

impl TryFrom<String> for Domain {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<Domain> for String {
    fn from(value: Domain) -> Self {
        value.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn gauge_examples() {
        let ball = Domain::ball(2).unwrap();
        assert!((ball.minkowski(&real(&[0.3, 0.4])).unwrap() - 0.5).abs() < 1e-15);
        let poly = Domain::polydisk(3).unwrap();
        let z = [c(0.1, 0.0), c(-0.7, 0.0), c(0.0, 0.2)];
        assert_eq!(poly.minkowski(&z).unwrap(), 0.7);
        let pob = Domain::product_of_balls(vec![2, 1]).unwrap();
        assert!((pob.minkowski(&real(&[0.3, 0.4, 0.6])).unwrap() - 0.6).abs() < 1e-15);
        assert!(poly.minkowski(&real(&[0.1, 0.2])).is_err());
    }

    #[test]
    fn green_function_examples() {
        let poly = Domain::polydisk(2).unwrap();
        let g = poly.green_function(&real(&[0.5, 0.25])).unwrap();
        assert!((g - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(poly.green_function(&real(&[0.0, 0.0])).unwrap(), f64::NEG_INFINITY);
        assert_eq!(poly.green_function(&real(&[1.0, 0.3])).unwrap(), 0.0);
        let ball = Domain::ball(2).unwrap();
        let g = ball.green_function(&real(&[0.3, 0.4])).unwrap();
        assert!((g - 0.5f64.ln()).abs() < 1e-15);
        assert!(ball.green_function(&real(&[0.9, 0.9])).is_err());
    }

    #[test]
    fn monomial_norm_examples() {
        let poly = Domain::polydisk(3).unwrap();
        assert_eq!(poly.monomial_norm_sq(&idx(&[4, 0, 7])).unwrap(), 1.0);
        let ball = Domain::ball(2).unwrap();
        assert!((ball.monomial_norm_sq(&idx(&[1, 0])).unwrap() - 0.5).abs() < 1e-15);
        for d in [Domain::ball(4).unwrap(), Domain::product_of_balls(vec![2, 3]).unwrap()] {
            assert_eq!(d.monomial_norm_sq(&MultiIndex::zero(d.dim())).unwrap(), 1.0);
        }
        // (N-1)! α! / (N-1+|α|)! with N=3, α=(2,1,0): 2·2/ 5! = 4/120
        let ball3 = Domain::ball(3).unwrap();
        assert!((ball3.monomial_norm_sq(&idx(&[2, 1, 0])).unwrap() - 4.0 / 120.0).abs() < 1e-14);
    }

    #[test]
    fn unified_product_formula_reduces_exactly() {
        let n = 4;
        let all_ones = Domain::product_of_balls(vec![1; n]).unwrap();
        let one_block = Domain::product_of_balls(vec![n]).unwrap();
        let ball = Domain::ball(n).unwrap();
        for p in 0..12 {
            for alpha in enumerate_degree(n, p) {
                assert_eq!(all_ones.monomial_norm_sq(&alpha).unwrap(), 1.0);
                assert_eq!(
                    one_block.monomial_norm_sq(&alpha).unwrap().to_bits(),
                    ball.monomial_norm_sq(&alpha).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn good_reinhardt_examples() {
        let poly = Domain::polydisk(2).unwrap();
        let check = poly.good_reinhardt_check(&real(&[0.5, 0.5]), 2).unwrap();
        assert!((check.lhs - 0.1875).abs() < 1e-15);
        assert!(check.ok);

        let ball = Domain::ball(2).unwrap();
        let check = ball.good_reinhardt_check(&real(&[0.6, 0.0]), 3).unwrap();
        assert!(check.lhs <= 16.0 * 0.6f64.powi(6));
        assert!((check.lhs - 4.0 * 0.6f64.powi(6)).abs() < 1e-14);
        assert!(check.ok);

        for d in [poly, ball, Domain::product_of_balls(vec![2, 1]).unwrap()] {
            let z = real(&vec![0.2; d.dim()]);
            let check = d.good_reinhardt_check(&z, 0).unwrap();
            assert!((check.lhs - 1.0).abs() < 1e-15);
            assert!(check.ok);
        }
    }

    #[test]
    fn polydisk_constant_is_dimension() {
        for n in 1..=5 {
            assert_eq!(polydisk_constant(n), n as f64);
        }
    }

    #[test]
    fn tags_round_trip() {
        for tag in ["polydisk:3", "ball:2", "pob:2,1,3"] {
            let d: Domain = tag.parse().unwrap();
            assert_eq!(d.to_string(), tag);
        }
        assert!("disk:2".parse::<Domain>().is_err());
        assert!("pob:2,0".parse::<Domain>().is_err());
        assert!("ball".parse::<Domain>().is_err());
    }

    #[test]
    fn green_function_log_homogeneity() {
        let d = Domain::product_of_balls(vec![2, 1]).unwrap();
        let z = [c(0.6, 0.0), c(0.0, 0.8), c(0.5, -0.5)];
        assert!((d.minkowski(&z).unwrap() - 1.0).abs() < 1e-15);
        for s in [0.1, 0.37, 0.9, 1.0] {
            let scaled: Vec<Complex64> = z.iter().map(|w| w * s).collect();
            let lhs = d.green_function(&scaled).unwrap();
            let rhs = s.ln() + d.green_function(&z).unwrap();
            assert!((lhs - rhs).abs() < 1e-14, "s={s}");
        }
    }
}
