//! Python bindings: domains, symbols, spectra, capacities, widths and the
//! experiment runner.

use std::path::PathBuf;

use capops_core::capacity::{self, Capacity, Region};
use capops_core::compop;
use capops_core::domains;
use capops_core::harness::{self, ExperimentConfig, RunOptions};
use capops_core::lattice;
use capops_core::widths;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: capops_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cap_value(c: Capacity) -> f64 {
    c.finite().unwrap_or(f64::INFINITY)
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Domain {
    inner: domains::Domain,
}

#[pymethods]
impl Domain {
    /// Parses `polydisk:N`, `ball:N` or `pob:l1,l2,...`.
    #[new]
    fn new(tag: &str) -> PyResult<Self> {
        Ok(Self {
            inner: tag.parse().map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn blocks(&self) -> Vec<usize> {
        self.inner.blocks()
    }

    fn minkowski(&self, z: Vec<Complex64>) -> PyResult<f64> {
        self.inner.minkowski(&z).map_err(err)
    }

    fn monomial_norm_sq(&self, alpha: Vec<u32>) -> PyResult<f64> {
        let alpha = lattice::MultiIndex::new(alpha).map_err(err)?;
        self.inner.monomial_norm_sq(&alpha).map_err(err)
    }

    /// `(C_N, c)`.
    fn good_reinhardt_constants(&self) -> (f64, u32) {
        let c = self.inner.good_reinhardt_constants();
        (c.c_n, c.c)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Domain('{}')", self.inner)
    }
}

#[pyclass(frozen, skip_from_py_object)]
struct Symbol {
    inner: compop::Symbol,
}

#[pymethods]
impl Symbol {
    /// Parses `diag:r1,r2,...` or `poly:...` on `domain`.
    #[new]
    fn new(tag: &str, domain: &Domain) -> PyResult<Self> {
        Ok(Self {
            inner: compop::Symbol::parse(tag, &domain.inner).map_err(err)?,
        })
    }

    #[getter]
    fn range_radius(&self) -> f64 {
        self.inner.range_radius()
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.inner.degree()
    }

    fn eval(&self, z: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.inner.eval(&z).map_err(err)
    }

    fn dilate(&self, t: f64) -> PyResult<Symbol> {
        Ok(Symbol {
            inner: compop::dilate_symbol(&self.inner, t).map_err(err)?,
        })
    }

    /// Approximation numbers from the operator matrix truncated at `degree`.
    fn spectrum(&self, degree: u32) -> PyResult<Spectrum> {
        Ok(Spectrum {
            inner: compop::symbol_spectrum(&self.inner, degree).map_err(err)?,
        })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Symbol('{}')", self.inner)
    }
}

#[pyclass(frozen, skip_from_py_object)]
struct Spectrum {
    inner: compop::SingularSpectrum,
}

#[pymethods]
impl Spectrum {
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    #[getter]
    fn tail_certificate(&self) -> f64 {
        self.inner.tail_certificate
    }

    #[getter]
    fn truncation_degree(&self) -> Option<u32> {
        self.inner.truncation_degree
    }

    /// `(lower, upper)` for the 1-based index `n`.
    fn bracket(&self, n: usize) -> Option<(f64, f64)> {
        self.inner.bracket(n)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    /// Rate estimates over `n_min..=n_max` as a dict.
    fn beta_estimates<'py>(&self, py: Python<'py>, n_min: usize, n_max: usize) -> PyResult<Bound<'py, PyDict>> {
        let est = compop::beta_estimates(&self.inner, self.inner.dim, n_min..=n_max).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("n", est.n)?;
        d.set_item("b", est.b)?;
        d.set_item("beta_minus", est.beta_minus)?;
        d.set_item("beta_plus", est.beta_plus)?;
        d.set_item("pure", est.pure.extrapolated)?;
        d.set_item("log_corrected", est.extrapolated)?;
        d.set_item("log_coefficient", est.log_corrected.log_coefficient)?;
        Ok(d)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// The `count` largest products `r^α`.
#[pyfunction]
fn exact_singular_values_diagonal(radii: Vec<f64>, count: usize) -> PyResult<Spectrum> {
    Ok(Spectrum {
        inner: compop::exact_singular_values_diagonal(&radii, count).map_err(err)?,
    })
}

#[pyfunction]
fn count_weighted(sigma: Vec<f64>, bound: f64) -> PyResult<u64> {
    lattice::count_weighted(&sigma, bound).map_err(err)
}

#[pyfunction]
fn nu_asymptotic(sigma: Vec<f64>, bound: f64) -> PyResult<f64> {
    lattice::nu_asymptotic(&sigma, bound).map_err(err)
}

/// `(exact_sum, bound)`.
#[pyfunction]
fn geom_tail(m: u32, l: u64, x: f64) -> PyResult<(f64, f64)> {
    let g = compop::geom_tail(m, l, x).map_err(err)?;
    Ok((g.exact_sum, g.bound))
}

#[pyfunction]
fn truncation_tail_bound(r0: f64, degree: u32, domain: &Domain) -> PyResult<f64> {
    compop::truncation_tail_bound(r0, degree, &domain.inner.good_reinhardt_constants()).map_err(err)
}

#[pyfunction]
fn capacity_sublevel(domain: &Domain, s: f64) -> PyResult<f64> {
    Ok(cap_value(
        capacity::capacity_sublevel(&domain.inner, s).map_err(err)?.cap,
    ))
}

#[pyfunction]
fn gamma_n(cap: f64, dim: usize) -> f64 {
    let c = if cap.is_finite() {
        Capacity::Finite(cap)
    } else {
        Capacity::Infinite
    };
    capacity::gamma_n(c, dim)
}

/// `(capacity, error_bar)` of the centered disk of `radius` on the grid.
#[pyfunction]
fn capacity_disk_grid(radius: f64, resolution: usize) -> PyResult<(f64, f64)> {
    let region = Region::disk(radius).map_err(err)?;
    let v =
        capacity::green_capacity_grid_1d(&region, resolution, &capacity::GridSolverOptions::default()).map_err(err)?;
    Ok((cap_value(v.cap), v.error_bar))
}

/// `(capacity, error_bar)` of a `mask v1` text on the grid.
#[pyfunction]
fn capacity_mask_grid(mask: &str, resolution: usize) -> PyResult<(f64, f64)> {
    let region = Region::parse_mask(mask).map_err(err)?;
    let v =
        capacity::green_capacity_grid_1d(&region, resolution, &capacity::GridSolverOptions::default()).map_err(err)?;
    Ok((cap_value(v.cap), v.error_bar))
}

/// `(capacity, error_bar)` of the log-box `[lo_1,hi_1] × [lo_2,hi_2]` in
/// the bidisk.
#[pyfunction]
#[pyo3(signature = (lo, hi, truncation=4.0, resolution=240))]
fn capacity_toric_box(lo: [f64; 2], hi: [f64; 2], truncation: f64, resolution: usize) -> PyResult<(f64, f64)> {
    let region = capacity::LogRegion::Box { lo, hi };
    let v = capacity::capacity_toric_2d(&region, truncation, resolution, &capacity::ToricOptions::default())
        .map_err(err)?;
    Ok((cap_value(v.cap), v.error_bar))
}

/// Width brackets `(n, lower, upper)` from a torus grid of `radius`.
#[pyfunction]
fn widths_torus(
    domain: &Domain,
    radius: f64,
    per_axis: usize,
    degree: u32,
    n_max: usize,
) -> PyResult<Vec<(usize, f64, f64)>> {
    let samples = widths::torus_samples(domain.inner.dim(), radius, per_axis);
    let w = widths::widths_sampled(&domain.inner, &samples, degree, n_max).map_err(err)?;
    Ok(w.into_iter().map(|e| (e.n, e.lower, e.upper)).collect())
}

/// Slope of `-log d_{n^N}` against `n` over `n_min..=n_max`.
#[pyfunction]
fn width_rate(brackets: Vec<(usize, f64, f64)>, dim: usize, n_min: usize, n_max: usize) -> PyResult<f64> {
    let est: Vec<widths::WidthEstimate> = brackets
        .into_iter()
        .map(|(n, lower, upper)| widths::WidthEstimate {
            n,
            lower,
            upper,
            sample_count: 0,
            basis_degree: 0,
            sandwich_factor: f64::NAN,
        })
        .collect();
    Ok(widths::width_rate(&est, dim, n_min..=n_max).map_err(err)?.slope)
}

/// Runs a TOML config and returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (config, out, seed=None))]
fn run_experiment(config: PathBuf, out: PathBuf, seed: Option<u64>) -> PyResult<String> {
    let config = ExperimentConfig::load(&config).map_err(err)?;
    let options = RunOptions { out_root: out, seed };
    let report = harness::run_experiment(&config, &options).map_err(err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn capops(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Domain>()?;
    m.add_class::<Symbol>()?;
    m.add_class::<Spectrum>()?;
    m.add_function(wrap_pyfunction!(exact_singular_values_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(count_weighted, m)?)?;
    m.add_function(wrap_pyfunction!(nu_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(geom_tail, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_tail_bound, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_sublevel, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_n, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_disk_grid, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_mask_grid, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_toric_box, m)?)?;
    m.add_function(wrap_pyfunction!(widths_torus, m)?)?;
    m.add_function(wrap_pyfunction!(width_rate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
