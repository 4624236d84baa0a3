//! Singular spectra, the diagonal oracle, and `β_N` estimation.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{diagonal_value, OperatorMatrix};
use crate::error::{invalid, Error, Result};
use crate::lattice::{enumerate_weighted, ln_factorial};

/// Largest number of lattice points the diagonal enumeration may hold.
pub const ENUMERATION_CAP: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    /// `a_1 ≥ a_2 ≥ … ≥ 0`.
    pub values: Vec<f64>,
    /// `None` for spectra that are exact.
    pub truncation_degree: Option<u32>,
    pub tail_certificate: f64,
    pub dim: usize,
}

impl SingularSpectrum {
    pub fn new(
        mut values: Vec<f64>,
        truncation_degree: Option<u32>,
        tail_certificate: f64,
        dim: usize,
    ) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("singular values must be finite and non-negative"));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            values,
            truncation_degree,
            tail_certificate,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `a_n`, 1-based.
    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|k| self.values.get(k)).copied()
    }

    /// Bracket `[a_n(matrix), a_n(matrix) + tail]` for `a_n` of the full
    /// operator.
    pub fn bracket(&self, n: usize) -> Option<(f64, f64)> {
        self.get(n).map(|a| (a, a + self.tail_certificate))
    }

    /// CSV with columns `n,a_n,lower,upper`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,a_n,lower,upper\n");
        for (k, a) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{:e},{:e},{:e}", k + 1, a, a, a + self.tail_certificate);
        }
        out
    }
}

/// Singular values of an arbitrary dense matrix, nonincreasing. Real
/// matrices go through the real SVD.
pub fn singular_values(matrix: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if matrix.is_empty() {
        return Ok(Vec::new());
    }
    if matrix.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(invalid("matrix has non-finite entries"));
    }
    if matrix.nrows() > 2 * matrix.ncols() {
        // tall: the singular values of R equal those of the matrix
        return singular_values(&matrix.clone().qr().r());
    }
    let max_iter = 100 * matrix.nrows().max(matrix.ncols());
    let mut values: Vec<f64> = if matrix.iter().all(|c| c.im == 0.0) {
        let real = matrix.map(|c| c.re);
        real.try_svd(false, false, f64::EPSILON, max_iter)
            .ok_or(Error::NonConvergence {
                iterations: max_iter,
                residual: f64::NAN,
            })?
            .singular_values
            .iter()
            .copied()
            .collect()
    } else {
        matrix
            .clone()
            .try_svd(false, false, f64::EPSILON, max_iter)
            .ok_or(Error::NonConvergence {
                iterations: max_iter,
                residual: f64::NAN,
            })?
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Singular values of the truncated operator, with `tail` as the
/// certificate for the upper bracket.
pub fn approximation_numbers(op: &OperatorMatrix, tail: f64) -> Result<SingularSpectrum> {
    if !(tail >= 0.0) {
        return Err(invalid("tail certificate must be non-negative"));
    }
    let values = singular_values(&op.matrix)?;
    SingularSpectrum::new(values, Some(op.degree), tail, op.dim)
}

/// The `count` largest products `Π r_j^{α_j}`, by enumerating
/// `{α : Σ α_j log(1/r_j) ≤ A}` for growing `A`.
pub fn exact_singular_values_diagonal(radii: &[f64], count: usize) -> Result<SingularSpectrum> {
    if radii.is_empty() {
        return Err(invalid("need at least one radius"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(invalid(format!("radii must lie in (0,1), got {r}")));
    }
    if count as u64 > ENUMERATION_CAP {
        return Err(Error::CountCapExceeded { cap: ENUMERATION_CAP });
    }
    if count == 0 {
        return SingularSpectrum::new(Vec::new(), None, 0.0, radii.len());
    }
    let sigma: Vec<f64> = radii.iter().map(|r| -r.ln()).collect();
    let n = radii.len() as f64;
    let ln_prod: f64 = sigma.iter().map(|s| s.ln()).sum();
    // ν_A ~ A^N / (N! Π σ_j), so start just below the asymptotic threshold
    let start = ((count as f64).ln() + ln_factorial(radii.len() as u32) + ln_prod) / n;
    let mut bound = 0.9 * start.exp();
    let step = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    let points = loop {
        let points = enumerate_weighted(&sigma, bound, ENUMERATION_CAP)?;
        if points.len() >= count {
            break points;
        }
        bound = (bound * 1.1).max(bound + step);
    };
    let mut values: Vec<f64> = points
        .iter()
        .map(|(alpha, _)| diagonal_value(radii, alpha.entries()))
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.truncate(count);
    SingularSpectrum::new(values, None, 0.0, radii.len())
}

/// Least-squares fit of `log a_{n^N}` against `n` (and `log n`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub kappa: f64,
    /// Coefficient of `log n`; zero for the pure exponential model.
    pub log_coefficient: f64,
    pub intercept: f64,
    pub residual: f64,
    /// `e^{-κ}`.
    pub extrapolated: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimates {
    pub n: Vec<usize>,
    /// `b_n = a_{n^N}^{1/n}`.
    pub b: Vec<f64>,
    /// `inf_{k ≥ n} b_k` over the range.
    pub beta_minus: Vec<f64>,
    /// `sup_{k ≥ n} b_k` over the range.
    pub beta_plus: Vec<f64>,
    /// Model `log a_{n^N} = -κ n + d log n + e`.
    pub log_corrected: RateFit,
    /// Model `log a_{n^N} = -κ n + e`.
    pub pure: RateFit,
    /// `e^{-κ}` of the log-corrected model.
    pub extrapolated: f64,
}

fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let rows = y.len();
    let a = DMatrix::from_fn(rows, columns.len(), |r, c| columns[c][r]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::DegenerateFit(format!(
            "design matrix is rank deficient (singular values {smax:e} … {smin:e})"
        )));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let residual = (&a * &x - &b).norm();
    Ok((x.iter().copied().collect(), residual))
}

/// Finite-sample `β_N^±` proxies and the extrapolated rate of
/// `[a_{n^N}]^{1/n}` over `n_range`.
pub fn beta_estimates(
    spectrum: &SingularSpectrum,
    dim: usize,
    n_range: RangeInclusive<usize>,
) -> Result<BetaEstimates> {
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if lo == 0 || hi < lo {
        return Err(invalid(format!(
            "n range {lo}..={hi} must be non-empty and start at 1 or later"
        )));
    }
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let required = (hi as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if required > spectrum.len() as u128 {
        return Err(Error::SpectrumTooShort {
            required: usize::try_from(required).unwrap_or(usize::MAX),
            available: spectrum.len(),
        });
    }
    let ns: Vec<usize> = n_range.collect();
    let a: Vec<f64> = ns.iter().map(|&n| spectrum.values[n.pow(dim as u32) - 1]).collect();
    let b: Vec<f64> = a.iter().zip(&ns).map(|(&v, &n)| v.powf(1.0 / n as f64)).collect();
    let mut beta_minus = b.clone();
    let mut beta_plus = b.clone();
    for k in (0..b.len().saturating_sub(1)).rev() {
        beta_minus[k] = beta_minus[k].min(beta_minus[k + 1]);
        beta_plus[k] = beta_plus[k].max(beta_plus[k + 1]);
    }

    if a.contains(&0.0) {
        // some a_{n^N} vanish: the rate is zero
        let zero = RateFit {
            kappa: f64::INFINITY,
            log_coefficient: 0.0,
            intercept: f64::NEG_INFINITY,
            residual: 0.0,
            extrapolated: 0.0,
        };
        return Ok(BetaEstimates {
            n: ns,
            b,
            beta_minus,
            beta_plus,
            log_corrected: zero.clone(),
            pure: zero,
            extrapolated: 0.0,
        });
    }

    let y: Vec<f64> = a.iter().map(|v| v.ln()).collect();
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ones = vec![1.0; ns.len()];
    let logs: Vec<f64> = nf.iter().map(|n| n.ln()).collect();
    let neg_n: Vec<f64> = nf.iter().map(|n| -n).collect();

    if ns.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points in the n range".into()));
    }
    let (p, res_p) = least_squares(&[neg_n.clone(), ones.clone()], &y)?;
    let pure = RateFit {
        kappa: p[0],
        log_coefficient: 0.0,
        intercept: p[1],
        residual: res_p,
        extrapolated: (-p[0]).exp(),
    };
    let log_corrected = if ns.len() >= 3 {
        let (c, res_c) = least_squares(&[neg_n, logs, ones], &y)?;
        RateFit {
            kappa: c[0],
            log_coefficient: c[1],
            intercept: c[2],
            residual: res_c,
            extrapolated: (-c[0]).exp(),
        }
    } else {
        pure.clone()
    };
    Ok(BetaEstimates {
        n: ns,
        b,
        beta_minus,
        beta_plus,
        extrapolated: log_corrected.extrapolated,
        log_corrected,
        pure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn exact_diagonal_examples() {
        let s = exact_singular_values_diagonal(&[0.5], 4).unwrap();
        assert!(close(&s.values, &[1.0, 0.5, 0.25, 0.125]));
        let s = exact_singular_values_diagonal(&[0.5, 0.5], 6).unwrap();
        assert!(close(&s.values, &[1.0, 0.5, 0.5, 0.25, 0.25, 0.25]));
        assert_eq!(s.tail_certificate, 0.0);
        assert!(exact_singular_values_diagonal(&[0.5, 1.0], 3).is_err());
        assert!(matches!(
            exact_singular_values_diagonal(&[0.5], ENUMERATION_CAP as usize + 1),
            Err(Error::CountCapExceeded { .. })
        ));
    }

    #[test]
    fn svd_of_diagonal_and_zero() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(0.25, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.5),
        ]));
        let op = OperatorMatrix::from_dense(1, 2, m);
        let s = approximation_numbers(&op, 0.0).unwrap();
        assert!(close(&s.values, &[1.0, 0.5, 0.25]));
        let z = OperatorMatrix::from_dense(1, 2, DMatrix::zeros(3, 3));
        assert_eq!(approximation_numbers(&z, 0.1).unwrap().values, vec![0.0; 3]);
        assert_eq!(approximation_numbers(&z, 0.1).unwrap().bracket(2), Some((0.0, 0.1)));
    }

    #[test]
    fn geometric_spectrum_rate() {
        let r: f64 = 0.6;
        let values: Vec<f64> = (0..80).map(|k| r.powi(k)).collect();
        let s = SingularSpectrum::new(values, None, 0.0, 1).unwrap();
        let est = beta_estimates(&s, 1, 5..=60).unwrap();
        assert!((est.extrapolated - r).abs() < 1e-3);
        assert!((est.pure.extrapolated - r).abs() < 1e-12);
        for (b, n) in est.b.iter().zip(&est.n) {
            assert!((b - r.powf((*n as f64 - 1.0) / *n as f64)).abs() < 1e-12);
        }
        assert!(est.beta_minus.iter().zip(&est.beta_plus).all(|(m, p)| m <= p));
    }

    #[test]
    fn zero_spectrum_and_short_spectrum() {
        let s = SingularSpectrum::new(vec![0.0; 100], None, 0.0, 2).unwrap();
        let est = beta_estimates(&s, 2, 2..=10).unwrap();
        assert_eq!(est.extrapolated, 0.0);
        let err = beta_estimates(&s, 2, 2..=11).unwrap_err();
        assert_eq!(
            err,
            Error::SpectrumTooShort {
                required: 121,
                available: 100
            }
        );
    }

    #[test]
    fn csv_columns() {
        let s = SingularSpectrum::new(vec![0.5, 1.0], Some(3), 0.25, 1).unwrap();
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,a_n,lower,upper"));
        assert_eq!(lines.next(), Some("1,1e0,1e0,1.25e0"));
    }
}
