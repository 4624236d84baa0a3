//! Library results against oracles computed independently here.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use capops_core::capacity::{capacity_toric_2d, solve_toric, LogRegion, ToricOptions};
use capops_core::compop::{
    exact_singular_values_diagonal, geom_tail, operator_matrix, taylor_coefficients, truncation_tail_bound, Symbol,
};
use capops_core::domains::Domain;
use capops_core::lattice::{count_weighted, enumerate_up_to};
use capops_core::widths::{torus_samples, widths_sampled};
use num_complex::Complex64;

type Poly = BTreeMap<Vec<u32>, Complex64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_default() += ca * cb;
        }
    }
    out
}

fn fact(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `‖z^α‖²` on the ball `B_N`: `(N-1)! α! / (N-1+|α|)!`.
fn ball_norm_sq(alpha: &[u32]) -> f64 {
    let n = alpha.len() as u32;
    let total: u32 = alpha.iter().sum();
    fact(n - 1) * alpha.iter().map(|&a| fact(a)).product::<f64>() / fact(n - 1 + total)
}

#[test]
fn toric_log_disk_against_polar_integral() {
    // cap = 8π² · area{b ≥ 0 : b·c + R|b| ≥ -1}, in polar form
    let (c, r) = ([-1.2, -1.0], 0.4);
    let steps = 200_000;
    let h = (PI / 2.0) / steps as f64;
    let f = |t: f64| {
        let s = t.cos() * c[0] + t.sin() * c[1] + r;
        1.0 / (2.0 * s * s)
    };
    let simpson: f64 = (0..=steps)
        .map(|k| {
            let w = if k == 0 || k == steps {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * f(k as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    let oracle = 8.0 * PI * PI * simpson;
    assert!((oracle - 67.44173145358803).abs() < 1e-9, "{oracle}");

    let region = LogRegion::Disk { center: c, radius: r };
    let value = capacity_toric_2d(&region, 4.0, 480, &ToricOptions::default()).unwrap();
    let got = value.cap.finite().unwrap();
    let rel = (got - oracle) / oracle;
    assert!(rel.abs() < 1e-3, "toric {got} vs {oracle}");
    assert!((got - oracle).abs() <= value.error_bar.max(1e-3 * oracle));
    // convergence: the coarse grid is not closer
    let coarse = solve_toric(&region, 4.0, 120, &ToricOptions::default())
        .unwrap()
        .capacity();
    assert!((coarse - oracle).abs() >= (got - oracle).abs() * 0.5);
}

#[test]
fn toric_polygons_are_exact() {
    for (lo, hi) in [([-1.0, -2.0], [-0.5, -0.7]), ([-3.0, -1.3], [-0.33, -0.41])] {
        let expected = TAU * TAU / (hi[0] * hi[1]);
        let got = capacity_toric_2d(&LogRegion::Box { lo, hi }, 4.0, 97, &ToricOptions::default())
            .unwrap()
            .cap
            .finite()
            .unwrap();
        assert!(((got - expected) / expected).abs() < 1e-12, "{got} vs {expected}");
    }
}

#[test]
fn weighted_counts_against_nested_loops() {
    let cases: [(&[f64], f64); 4] = [
        (&[1.0, 1.0], 37.0),
        (&[0.7, 1.3], 21.4),
        (&[1.0, 2.0, 0.5], 9.75),
        (&[0.693, 1.204, 0.357], 6.0),
    ];
    for (sigma, a) in cases {
        let mut brute = 0u64;
        let lim = |s: f64| (a / s).floor() as u32;
        match sigma.len() {
            2 => {
                for i in 0..=lim(sigma[0]) {
                    for j in 0..=lim(sigma[1]) {
                        brute += u64::from(f64::from(i) * sigma[0] + f64::from(j) * sigma[1] <= a);
                    }
                }
            }
            3 => {
                for i in 0..=lim(sigma[0]) {
                    for j in 0..=lim(sigma[1]) {
                        for k in 0..=lim(sigma[2]) {
                            let w = f64::from(i) * sigma[0] + f64::from(j) * sigma[1] + f64::from(k) * sigma[2];
                            brute += u64::from(w <= a);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        assert_eq!(count_weighted(sigma, a).unwrap(), brute, "{sigma:?} {a}");
    }
}

#[test]
fn diagonal_spectrum_against_sorted_products() {
    // degrees reach past the 500th largest product in each case
    for (radii, depth) in [(vec![0.5, 0.3], 120), (vec![0.9, 0.2, 0.6], 100), (vec![0.8], 700)] {
        let count = 500;
        let mut all = Vec::new();
        let dim = radii.len();
        for a in enumerate_up_to(dim, depth) {
            all.push(a.monomial_abs(&radii));
        }
        all.sort_by(|x, y| y.total_cmp(x));
        let got = exact_singular_values_diagonal(&radii, count).unwrap();
        assert_eq!(got.values.len(), count);
        for (k, (g, w)) in got.values.iter().zip(&all).enumerate() {
            assert!((g - w).abs() <= 1e-15 * w, "{radii:?} n={}", k + 1);
        }
    }
}

#[test]
fn taylor_coefficients_against_sparse_products() {
    let d = Domain::polydisk(2).unwrap();
    let tag = "poly:(0,0)->(0.1);(1,0)->(0.3,0.1);(1,1)->(0.2)|(0,1)->(0.4);(2,0)->(-0.1)";
    let s = Symbol::parse(tag, &d).unwrap();
    let coords: Vec<Poly> = s
        .coordinate_terms()
        .into_iter()
        .map(|terms| {
            terms
                .into_iter()
                .map(|t| (t.gamma.entries().to_vec(), t.coeff))
                .collect()
        })
        .collect();
    for alpha in enumerate_up_to(2, 4) {
        let mut p: Poly = [(vec![0, 0], Complex64::new(1.0, 0.0))].into();
        for (k, &a) in alpha.entries().iter().enumerate() {
            for _ in 0..a {
                p = poly_mul(&p, &coords[k]);
            }
        }
        let t = taylor_coefficients(&s, &alpha, 6).unwrap();
        for beta in enumerate_up_to(2, 6) {
            let want = p.get(beta.entries()).copied().unwrap_or_default();
            assert!((t.coefficient(&beta) - want).norm() < 1e-14, "{alpha} {beta}");
        }
    }
}

#[test]
fn ball_operator_matrix_against_direct_norms() {
    let d = Domain::ball(2).unwrap();
    let s = Symbol::parse("poly:(1,0)->(0.3);(0,1)->(0.2)|(1,1)->(0.5)", &d).unwrap();
    let degree = 3;
    let m = operator_matrix(&s, degree).unwrap();
    let coords: Vec<Poly> = s
        .coordinate_terms()
        .into_iter()
        .map(|terms| {
            terms
                .into_iter()
                .map(|t| (t.gamma.entries().to_vec(), t.coeff))
                .collect()
        })
        .collect();
    let cols = enumerate_up_to(2, degree);
    let rows = enumerate_up_to(2, m.row_degree);
    assert_eq!((m.matrix.nrows(), m.matrix.ncols()), (rows.len(), cols.len()));
    for (c, alpha) in cols.iter().enumerate() {
        let mut p: Poly = [(vec![0, 0], Complex64::new(1.0, 0.0))].into();
        for (k, &a) in alpha.entries().iter().enumerate() {
            for _ in 0..a {
                p = poly_mul(&p, &coords[k]);
            }
        }
        for (r, beta) in rows.iter().enumerate() {
            let coeff = p.get(beta.entries()).copied().unwrap_or_default();
            let want = coeff * (ball_norm_sq(beta.entries()) / ball_norm_sq(alpha.entries())).sqrt();
            assert!((m.matrix[(r, c)] - want).norm() < 1e-13, "{beta} {alpha}");
        }
    }
}

#[test]
fn geometric_tails_against_long_sums() {
    for m in 0..=4u32 {
        for &l in &[1u64, 3, 17, 60] {
            for &x in &[0.15f64, 0.5, 0.85] {
                let direct: f64 = (l..l + 20_000)
                    .map(|p| (p as f64).powi(m as i32) * x.powi(p as i32))
                    .sum();
                let g = geom_tail(m, l, x).unwrap();
                assert!((g.exact_sum - direct).abs() <= 1e-12 * direct, "m={m} l={l} x={x}");
            }
        }
    }
}

#[test]
fn torus_widths_against_exact_singular_values() {
    // equispaced samples make the monomials orthogonal: σ = √m r^|α|
    let d = Domain::polydisk(2).unwrap();
    let (r, per_axis, degree) = (0.5, 20, 8);
    let samples = torus_samples(2, r, per_axis);
    let m = samples.len() as f64;
    let mut sigma: Vec<f64> = enumerate_up_to(2, degree)
        .iter()
        .map(|a| m.sqrt() * r.powi(a.degree() as i32))
        .collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    let w = widths_sampled(&d, &samples, degree, 30).unwrap();
    let tail = truncation_tail_bound(r, degree, &d.good_reinhardt_constants()).unwrap();
    let s_d = (sigma.len() as f64).sqrt();
    for e in &w {
        let s = sigma[e.n - 1];
        assert!((e.upper - (s + tail)).abs() < 1e-12 * (s + tail), "n={}", e.n);
        assert!((e.lower - s / (m.sqrt() * s_d)).abs() < 1e-12 * e.lower, "n={}", e.n);
        assert!((e.sandwich_factor - m.sqrt() * s_d).abs() < 1e-9);
    }
}
