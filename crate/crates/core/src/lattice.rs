//! Multi-indices, graded enumeration and weighted simplex counting.
//!
//! Every basis in the crate is ordered graded-lexicographically: first by
//! total degree, then lexicographically ascending on the entries, so that
//! `(0,2) < (1,1) < (2,0)`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default cap on the number of lattice points a single count may visit.
pub const DEFAULT_COUNT_CAP: u64 = 1_000_000_000;

/// Relative slack applied to the weighted-simplex boundary test, so that
/// points lying on `Σ α_j σ_j = A` in exact arithmetic are counted.
const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("multi-index must have dimension at least 1"));
        }
        Ok(Self(entries))
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self(vec![0; dim])
    }

    /// The unit index `e_k`.
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut e = vec![0; dim];
        e[k] = 1;
        Self(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α| = Σ α_j`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `log α! = Σ log α_j!`.
    pub fn ln_factorial(&self) -> f64 {
        self.0.iter().map(|&a| ln_factorial(a)).sum()
    }

    /// `α!` as a float; overflows to `inf` for large entries, prefer
    /// [`MultiIndex::ln_factorial`].
    pub fn factorial(&self) -> f64 {
        self.ln_factorial().exp()
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        (self.dim() == other.dim()).then(|| Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    /// Evaluates `|z^α|` from the moduli of the coordinates.
    pub fn monomial_abs(&self, moduli: &[f64]) -> f64 {
        self.0.iter().zip(moduli).map(|(&a, &m)| m.powi(a as i32)).product()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(value: MultiIndex) -> Self {
        value.0
    }
}

pub fn ln_factorial(n: u32) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(f64::from(n) + 1.0)
    }
}

/// `log binomial(n, k)`.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `binomial(n, k)` as an exact integer, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// All multi-indices of dimension `dim` and degree `p`, lexicographically
/// ascending. The count is `binomial(dim - 1 + p, p)`.
pub fn enumerate_degree(dim: usize, p: u32) -> Vec<MultiIndex> {
    assert!(dim >= 1, "dimension must be at least 1");
    let mut out = Vec::new();
    let mut current = vec![0u32; dim];
    fill_degree(&mut current, 0, p, &mut out);
    out
}

fn fill_degree(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for a in 0..=remaining {
        current[pos] = a;
        fill_degree(current, pos + 1, remaining - a, out);
    }
}

/// Every multi-index with `|α| ≤ max_degree`, in graded-lexicographic order.
pub fn enumerate_up_to(dim: usize, max_degree: u32) -> Vec<MultiIndex> {
    (0..=max_degree).flat_map(|p| enumerate_degree(dim, p)).collect()
}

/// The truncated monomial basis `{α : |α| ≤ D}` with a position lookup.
#[derive(Debug, Clone)]
pub struct GradedBasis {
    dim: usize,
    max_degree: u32,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
}

impl GradedBasis {
    pub fn new(dim: usize, max_degree: u32) -> Self {
        let indices = enumerate_up_to(dim, max_degree);
        let positions = indices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        Self {
            dim,
            max_degree,
            indices,
            positions,
        }
    }

    /// Size of the basis without building it.
    pub fn size_of(dim: usize, max_degree: u32) -> Option<u64> {
        binomial(dim as u64 + u64::from(max_degree), dim as u64)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.positions.get(alpha).copied()
    }
}

fn check_weights(sigma: &[f64]) -> Result<()> {
    if sigma.is_empty() {
        return Err(invalid("weight vector must be non-empty"));
    }
    if let Some(s) = sigma.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(invalid(format!("weights must be positive and finite, got {s}")));
    }
    Ok(())
}

/// `ν_A = #{α : Σ α_j σ_j ≤ A}` by exhaustive traversal of the simplex,
/// with the default cap.
pub fn count_weighted(sigma: &[f64], bound: f64) -> Result<u64> {
    count_weighted_capped(sigma, bound, DEFAULT_COUNT_CAP)
}

pub fn count_weighted_capped(sigma: &[f64], bound: f64, cap: u64) -> Result<u64> {
    check_weights(sigma)?;
    if bound.is_nan() {
        return Err(invalid("bound must not be NaN"));
    }
    if bound < 0.0 {
        return Ok(0);
    }
    let limit = bound * (1.0 + BOUNDARY_SLACK);
    let mut count = 0u64;
    count_rec(sigma, 0, 0.0, limit, cap, &mut count)?;
    Ok(count)
}

fn count_rec(sigma: &[f64], pos: usize, used: f64, limit: f64, cap: u64, count: &mut u64) -> Result<()> {
    let s = sigma[pos];
    if pos + 1 == sigma.len() {
        let last = ((limit - used) / s).floor() as u64;
        // guard the division against rounding across an integer
        let mut last = last;
        while used + (last as f64) * s > limit && last > 0 {
            last -= 1;
        }
        while used + ((last + 1) as f64) * s <= limit {
            last += 1;
        }
        *count += last + 1;
        if *count > cap {
            return Err(Error::CountCapExceeded { cap });
        }
        return Ok(());
    }
    let mut a = 0u64;
    loop {
        let spent = used + (a as f64) * s;
        if spent > limit {
            break;
        }
        count_rec(sigma, pos + 1, spent, limit, cap, count)?;
        a += 1;
    }
    Ok(())
}

/// All `α` with `Σ α_j σ_j ≤ A`, each paired with its weight `Σ α_j σ_j`.
/// The traversal order is lexicographic.
pub fn enumerate_weighted(sigma: &[f64], bound: f64, cap: u64) -> Result<Vec<(MultiIndex, f64)>> {
    check_weights(sigma)?;
    let mut out = Vec::new();
    if bound < 0.0 {
        return Ok(out);
    }
    let limit = bound * (1.0 + BOUNDARY_SLACK);
    let mut current = vec![0u32; sigma.len()];
    enumerate_rec(sigma, 0, 0.0, limit, cap, &mut current, &mut out)?;
    Ok(out)
}

fn enumerate_rec(
    sigma: &[f64],
    pos: usize,
    used: f64,
    limit: f64,
    cap: u64,
    current: &mut [u32],
    out: &mut Vec<(MultiIndex, f64)>,
) -> Result<()> {
    let mut a = 0u32;
    loop {
        let spent = used + f64::from(a) * sigma[pos];
        if spent > limit {
            break;
        }
        current[pos] = a;
        if pos + 1 == sigma.len() {
            if out.len() as u64 >= cap {
                return Err(Error::CountCapExceeded { cap });
            }
            out.push((MultiIndex(current.to_vec()), spent));
        } else {
            enumerate_rec(sigma, pos + 1, spent, limit, cap, current, out)?;
        }
        a += 1;
    }
    current[pos] = 0;
    Ok(())
}

/// Leading-order asymptotic `A^N / (N! Π σ_j)` of the weighted count.
pub fn nu_asymptotic(sigma: &[f64], bound: f64) -> Result<f64> {
    check_weights(sigma)?;
    if !(bound > 0.0) {
        return Err(invalid("bound must be positive"));
    }
    let n = sigma.len() as u32;
    let ln = f64::from(n) * bound.ln() - ln_factorial(n) - sigma.iter().map(|s| s.ln()).sum::<f64>();
    Ok(ln.exp())
}
