//! Composition operators `C_φ f = f ∘ φ` on `H²(Ω)`, their matrices in the
//! orthonormal monomial basis, approximation numbers with truncation
//! certificates, and estimates of `β_N`.

mod matrix;
mod spectrum;
mod symbol;
mod tails;

pub use matrix::{
    operator_matrix, operator_matrix_with_budget, taylor_coefficients, taylor_coefficients_with_budget, OperatorMatrix,
    TaylorExpansion, DEFAULT_BUDGET,
};
pub use spectrum::{
    approximation_numbers, beta_estimates, exact_singular_values_diagonal, singular_values, BetaEstimates, RateFit,
    SingularSpectrum, ENUMERATION_CAP,
};
pub use symbol::{dilate_symbol, Symbol, SymbolKind, Term};
pub use tails::{default_truncation_degree, geom_tail, tail_constant, truncation_tail_bound, GeomTail};

use crate::error::Result;

/// Operator matrix at degree `degree`, its singular values, and the
/// truncation certificate from the domain's good-Reinhardt constants.
pub fn symbol_spectrum(symbol: &Symbol, degree: u32) -> Result<SingularSpectrum> {
    let op = operator_matrix(symbol, degree)?;
    let tail = truncation_tail_bound(
        symbol.range_radius(),
        degree,
        &symbol.domain().good_reinhardt_constants(),
    )?;
    approximation_numbers(&op, tail)
}
