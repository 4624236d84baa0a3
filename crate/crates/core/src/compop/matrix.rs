//! Taylor expansion of `φ^α` and the matrix of `C_φ` in the orthonormal
//! monomial basis.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::symbol::{Symbol, SymbolKind, Term};
use crate::error::{invalid, Error, Result};
use crate::lattice::{GradedBasis, MultiIndex};

/// Default cap on the number of stored coefficients (matrix entries or
/// tensor size): 16M complex numbers, 256 MB.
pub const DEFAULT_BUDGET: u128 = 16_000_000;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Coefficients of `φ^α` truncated at total degree `degree`, nonzero
/// entries only, graded-lex order.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorExpansion {
    pub degree: u32,
    pub terms: Vec<(MultiIndex, Complex64)>,
}

impl TaylorExpansion {
    pub fn coefficient(&self, beta: &MultiIndex) -> Complex64 {
        self.terms.iter().find(|(b, _)| b == beta).map_or(ZERO, |(_, c)| *c)
    }
}

/// Dense truncated polynomial arithmetic over `{β : |β| ≤ degree}`.
struct Truncated {
    basis: GradedBasis,
    /// For each exponent appearing in a factor, the position of `β + γ`
    /// (or `u32::MAX` past the truncation) for every position of `β`.
    shifts: HashMap<MultiIndex, Vec<u32>>,
}

impl Truncated {
    fn new(dim: usize, degree: u32, factors: &[Vec<Term>]) -> Self {
        let basis = GradedBasis::new(dim, degree);
        let mut shifts = HashMap::new();
        for t in factors.iter().flatten() {
            shifts.entry(t.gamma.clone()).or_insert_with(|| {
                basis
                    .indices()
                    .iter()
                    .map(|b| {
                        let sum = b.checked_add(&t.gamma).expect("dimensions agree");
                        if sum.degree() > degree {
                            u32::MAX
                        } else {
                            basis.position(&sum).expect("index within degree") as u32
                        }
                    })
                    .collect()
            });
        }
        Self { basis, shifts }
    }

    fn multiply(&self, p: &[Complex64], factor: &[Term]) -> Vec<Complex64> {
        let mut out = vec![ZERO; p.len()];
        for t in factor {
            let shift = &self.shifts[&t.gamma];
            for (k, &c) in p.iter().enumerate() {
                if c == ZERO {
                    continue;
                }
                let target = shift[k];
                if target != u32::MAX {
                    out[target as usize] += t.coeff * c;
                }
            }
        }
        out
    }

    fn unit(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.basis.len()];
        v[0] = ONE;
        v
    }
}

fn check_budget(what: &str, needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        return Err(Error::BudgetExceeded {
            what: what.to_string(),
            needed,
            budget,
        });
    }
    Ok(())
}

fn basis_size(dim: usize, degree: u32) -> u128 {
    GradedBasis::size_of(dim, degree).map_or(u128::MAX, u128::from)
}

/// Diagonal value `Π r_j^{α_j}`.
pub(crate) fn diagonal_value(radii: &[f64], alpha: &[u32]) -> f64 {
    radii.iter().zip(alpha).fold(1.0, |acc, (r, &a)| acc * r.powi(a as i32))
}

/// Taylor coefficients of `φ^α` up to total degree `degree`, with the
/// default size budget.
pub fn taylor_coefficients(symbol: &Symbol, alpha: &MultiIndex, degree: u32) -> Result<TaylorExpansion> {
    taylor_coefficients_with_budget(symbol, alpha, degree, DEFAULT_BUDGET)
}

pub fn taylor_coefficients_with_budget(
    symbol: &Symbol,
    alpha: &MultiIndex,
    degree: u32,
    budget: u128,
) -> Result<TaylorExpansion> {
    if alpha.dim() != symbol.dim() {
        return Err(invalid(format!(
            "multi-index {alpha} does not match dimension {}",
            symbol.dim()
        )));
    }
    if let SymbolKind::Diagonal(radii) = symbol.kind() {
        let terms = if alpha.degree() <= degree {
            vec![(
                alpha.clone(),
                Complex64::new(diagonal_value(radii, alpha.entries()), 0.0),
            )]
        } else {
            Vec::new()
        };
        return Ok(TaylorExpansion { degree, terms });
    }
    check_budget("coefficient tensor", basis_size(symbol.dim(), degree), budget)?;
    let coords = symbol.coordinate_terms();
    let engine = Truncated::new(symbol.dim(), degree, &coords);
    let mut p = engine.unit();
    for (k, &a) in alpha.entries().iter().enumerate() {
        for _ in 0..a {
            p = engine.multiply(&p, &coords[k]);
        }
    }
    let terms = engine
        .basis
        .indices()
        .iter()
        .zip(p)
        .filter(|(_, c)| *c != ZERO)
        .map(|(b, c)| (b.clone(), c))
        .collect();
    Ok(TaylorExpansion { degree, terms })
}

/// Matrix of `C_φ` from `span{e_α : |α| ≤ degree}` into
/// `span{e_β : |β| ≤ row_degree}`, orthonormal monomial bases in graded-lex
/// order: `M[β, α] = coeff_β(φ^α) · ‖z^β‖ / ‖z^α‖`.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub dim: usize,
    pub degree: u32,
    pub row_degree: u32,
    pub matrix: DMatrix<Complex64>,
}

impl OperatorMatrix {
    /// Wraps an arbitrary square matrix, e.g. for tests.
    pub fn from_dense(dim: usize, degree: u32, matrix: DMatrix<Complex64>) -> Self {
        Self {
            dim,
            degree,
            row_degree: degree,
            matrix,
        }
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|c| c.im == 0.0)
    }
}

/// The compression with rows up to `degree · deg φ`, so that the image of
/// every column is represented exactly.
pub fn operator_matrix(symbol: &Symbol, degree: u32) -> Result<OperatorMatrix> {
    operator_matrix_with_budget(symbol, degree, DEFAULT_BUDGET)
}

pub fn operator_matrix_with_budget(symbol: &Symbol, degree: u32, budget: u128) -> Result<OperatorMatrix> {
    let dim = symbol.dim();
    let domain = symbol.domain();
    let cols = basis_size(dim, degree);
    if let SymbolKind::Diagonal(radii) = symbol.kind() {
        check_budget("operator matrix", cols.saturating_mul(cols), budget)?;
        let basis = GradedBasis::new(dim, degree);
        let n = basis.len();
        let mut matrix = DMatrix::<Complex64>::zeros(n, n);
        for (k, a) in basis.indices().iter().enumerate() {
            matrix[(k, k)] = Complex64::new(diagonal_value(radii, a.entries()), 0.0);
        }
        return Ok(OperatorMatrix {
            dim,
            degree,
            row_degree: degree,
            matrix,
        });
    }

    let row_degree = degree
        .checked_mul(symbol.degree())
        .ok_or_else(|| invalid("row degree overflows"))?;
    let rows = basis_size(dim, row_degree);
    check_budget("operator matrix", rows.saturating_mul(cols), budget)?;
    let coords = symbol.coordinate_terms();
    let engine = Truncated::new(dim, row_degree, &coords);
    let col_basis = GradedBasis::new(dim, degree);
    let n_cols = col_basis.len();

    let mut columns: Vec<Vec<Complex64>> = vec![Vec::new(); n_cols];
    columns[0] = engine.unit();
    let mut level_start = 1;
    for p in 1..=degree {
        let level_len = GradedBasis::size_of(dim, p).expect("fits") as usize - level_start;
        let level: Vec<Vec<Complex64>> = (level_start..level_start + level_len)
            .into_par_iter()
            .map(|pos| {
                let alpha = &col_basis.indices()[pos];
                let e = alpha.entries();
                let k = e.iter().rposition(|&a| a > 0).expect("positive degree");
                let mut parent = e.to_vec();
                parent[k] -= 1;
                let parent_pos = col_basis
                    .position(&MultiIndex::new(parent).expect("valid"))
                    .expect("parent in basis");
                engine.multiply(&columns[parent_pos], &coords[k])
            })
            .collect();
        for (offset, col) in level.into_iter().enumerate() {
            columns[level_start + offset] = col;
        }
        level_start += level_len;
    }

    let row_basis = &engine.basis;
    let ln_row: Vec<f64> = row_basis
        .indices()
        .iter()
        .map(|b| 0.5 * domain.ln_monomial_norm_sq(b))
        .collect();
    let n_rows = row_basis.len();
    let mut matrix = DMatrix::<Complex64>::zeros(n_rows, n_cols);
    for (c, col) in columns.iter().enumerate() {
        let ln_col = ln_row[c];
        for (r, &v) in col.iter().enumerate() {
            if v != ZERO {
                matrix[(r, c)] = v * (ln_row[r] - ln_col).exp();
            }
        }
    }
    Ok(OperatorMatrix {
        dim,
        degree,
        row_degree,
        matrix,
    })
}
