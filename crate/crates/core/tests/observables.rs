mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use weylchar::grid::PhaseGrid;
use weylchar::linalg::CMatrix;
use weylchar::observables::{from_operator, mean, quadrature_moments, to_operator, ObservableFunction};
use weylchar::states::fock_state;
use weylchar::transform::forward;

use common::{quadratures, second_moments, sup_norm, trace_with, zoo};

const HBAR: f64 = 1.0;
const DIM: usize = 24;

fn grid() -> PhaseGrid {
    PhaseGrid::eta_xi(12.0, 96).unwrap()
}

/// Gaussian envelopes times a constant, a plane wave and a quadratic form.
fn family(grid: PhaseGrid) -> Vec<(&'static str, ObservableFunction)> {
    let env = |e: f64, x: f64| (-(e * e + x * x) / (2.0 * HBAR)).exp();
    vec![
        ("gaussian", ObservableFunction::from_fn(HBAR, grid, |e, x| Complex64::new(env(e, x), 0.0)).unwrap()),
        (
            "plane wave",
            ObservableFunction::from_fn(HBAR, grid, |e, x| Complex64::from_polar(env(e, x), 0.8 * e - 0.5 * x)).unwrap(),
        ),
        (
            "quadratic",
            ObservableFunction::from_fn(HBAR, grid, |e, x| Complex64::new(env(e, x) * (e * e + 0.5 * e * x - 0.3 * x * x), 0.0)).unwrap(),
        ),
    ]
}

#[test]
fn function_round_trip() {
    let g = grid();
    for (name, f) in family(g) {
        let a = to_operator(&f, DIM).unwrap();
        let back = from_operator(&a, &g, HBAR).unwrap();
        let err = sup_norm(back.values(), f.values());
        assert!(err < 1e-6, "{name}: {err:e}");
    }
}

#[test]
fn operator_round_trip() {
    let g = grid();
    // Hermitian, supported on the lowest 8 levels
    let a = CMatrix::from_fn(DIM, DIM, |i, j| {
        if i < 8 && j < 8 {
            let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
            let im = if i < j { 0.1 * (hi - lo) } else { -0.1 * (hi - lo) };
            Complex64::new(1.0 / (1.0 + lo + hi), im)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let f = from_operator(&a, &g, HBAR).unwrap();
    assert!(f.reality_defect() < 1e-12);
    let back = to_operator(&ObservableFunction::new(HBAR, g, f.values().clone()).unwrap(), DIM).unwrap();
    assert!((back - &a).norm() < 1e-6);
}

#[test]
fn identity_round_trips() {
    let g = PhaseGrid::eta_xi(16.0, 128).unwrap();
    let id = CMatrix::identity(8, 8);
    let f = from_operator(&id, &g, HBAR).unwrap();
    let back = to_operator(&ObservableFunction::new(HBAR, g, f.values().clone()).unwrap(), 8).unwrap();
    assert!((back - id).norm() < 1e-6);
}

#[test]
fn smoothed_position_round_trips_on_interior_block() {
    let g = PhaseGrid::eta_xi(16.0, 128).unwrap();
    let (q, _) = quadratures(12, HBAR);
    let f = from_operator(&q, &g, HBAR).unwrap();
    let back = to_operator(&ObservableFunction::new(HBAR, g, f.values().clone()).unwrap(), 12).unwrap();
    let block = |m: &CMatrix| m.view((0, 0), (8, 8)).into_owned();
    assert!((block(&back) - block(&q)).norm() < 1e-4);
}

#[test]
fn means_match_operator_traces() {
    let g = grid();
    for s in zoo(DIM, HBAR, 0..3) {
        let chi = forward(&s.rho, &g).unwrap();
        for (name, f) in family(g) {
            let m = mean(&f, &chi).unwrap();
            let a = to_operator(&f, DIM).unwrap();
            let oracle = trace_with(s.rho.matrix(), &a);
            assert!((m.value - oracle.re).abs() < 1e-6, "{} / {name}: {} vs {}", s.name, m.value, oracle.re);
            assert!(m.imaginary_residue < 1e-6);
        }
    }
}

#[test]
fn number_and_identity_means() {
    let g = grid();
    let chi = forward(&fock_state(2, DIM, HBAR).unwrap(), &g).unwrap();
    let n = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(DIM, |k, _| Complex64::new(k as f64, 0.0)));
    assert!((mean(&from_operator(&n, &g, HBAR).unwrap(), &chi).unwrap().value - 2.0).abs() < 1e-4);
    let id = CMatrix::identity(DIM, DIM);
    assert!((mean(&from_operator(&id, &g, HBAR).unwrap(), &chi).unwrap().value - 1.0).abs() < 1e-6);
}

#[test]
fn fock_second_moments_match_traces() {
    for &hbar in &[0.5f64, 1.0, 2.0] {
        let g = PhaseGrid::eta_xi(4.0 * hbar.sqrt(), 128).unwrap();
        for m in 0..5 {
            let rho = fock_state(m, DIM, hbar).unwrap();
            let mo = quadrature_moments(&forward(&rho, &g).unwrap()).unwrap();
            let (q2, p2) = second_moments(&rho);
            let exact = hbar * (m as f64 + 0.5);
            assert!((q2 - exact).abs() < 1e-12 && (p2 - exact).abs() < 1e-12, "{q2} {p2} {exact}");
            assert!((mo.q2 - q2).abs() < 1e-6, "m={m} hbar={hbar}: {} vs {q2}", mo.q2);
            assert!((mo.p2 - p2).abs() < 1e-6, "m={m} hbar={hbar}: {} vs {p2}", mo.p2);
        }
    }
}

#[test]
fn uncertainty_holds_over_the_zoo() {
    let g = PhaseGrid::eta_xi(8.0, 128).unwrap();
    for s in zoo(DIM, HBAR, 0..5) {
        let mo = quadrature_moments(&forward(&s.rho, &g).unwrap()).unwrap();
        let product = (mo.var_q * mo.var_p).sqrt();
        assert!(product >= HBAR / 2.0 * (1.0 - 1e-6), "{}: {product}", s.name);
    }
}

#[test]
fn gaussian_observable_mean_is_a_vacuum_overlap() {
    // f = exp(-r^2 / 4 hbar) is the function of |0><0|
    let g = grid();
    let f = ObservableFunction::from_fn(HBAR, g, |e, x| Complex64::new((-(e * e + x * x) / (4.0 * HBAR)).exp(), 0.0)).unwrap();
    let chi = forward(&fock_state(0, DIM, HBAR).unwrap(), &g).unwrap();
    let m = mean(&f, &chi).unwrap();
    assert!((m.value - 1.0).abs() < 1e-8, "{m:?}");
    let a = to_operator(&f, DIM).unwrap();
    let mut expect = DMatrix::zeros(DIM, DIM);
    expect[(0, 0)] = Complex64::new(1.0, 0.0);
    assert!((a - expect).norm() < 1e-8);
}
