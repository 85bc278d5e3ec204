mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use weylchar::grid::PhaseGrid;
use weylchar::states::{coherent_state, fock_state, DensityMatrix};
use weylchar::transform::{forward, inverse, wigner, CharFunction};

use common::{hermite_function, laguerre_series, sup_norm, wigner_quadrature, zoo};

#[test]
fn fock_chars_match_laguerre_series() {
    for &hbar in &[0.5f64, 1.0, 2.0] {
        let grid = PhaseGrid::eta_xi(10.0 * hbar.sqrt(), 64).unwrap();
        for m in 0..4 {
            let chi = forward(&fock_state(m, 24, hbar).unwrap(), &grid).unwrap();
            let expect = grid.map(|e, x| {
                let r2 = e * e + x * x;
                Complex64::new((-r2 / (4.0 * hbar)).exp() * laguerre_series(m, r2 / (2.0 * hbar)), 0.0)
            });
            let err = sup_norm(chi.values(), &expect);
            assert!(err < 1e-8, "m={m} hbar={hbar}: {err:e}");
        }
    }
}

#[test]
fn round_trips_over_the_zoo() {
    let hbar = 1.0;
    let dim = 24;
    let grid = PhaseGrid::eta_xi(12.0, 96).unwrap();
    for s in zoo(dim, hbar, 0..3) {
        let chi = forward(&s.rho, &grid).unwrap();
        let rec = inverse(&chi, dim).unwrap();
        let frob = (rec.rho.matrix() - s.rho.matrix()).norm();
        assert!(frob < 1e-6, "{}: {frob:e}", s.name);
        let again = forward(&rec.rho, &grid).unwrap();
        let sup = sup_norm(again.values(), chi.values());
        assert!(sup < 1e-6, "{}: {sup:e}", s.name);
    }
}

#[test]
fn wigner_origin_of_fock_one_is_negative() {
    for &hbar in &[0.5f64, 1.0, 2.0] {
        let chi = forward(&fock_state(1, 24, hbar).unwrap(), &PhaseGrid::eta_xi(12.0 * hbar.sqrt(), 96).unwrap()).unwrap();
        let w = wigner(&chi, &PhaseGrid::qp(4.0, 32).unwrap()).unwrap();
        let origin = w.nearest(0.0, 0.0);
        let oracle = wigner_quadrature(1, 0.0, 0.0, hbar);
        assert!(origin < 0.0);
        assert!(((origin - oracle) / oracle).abs() < 1e-6, "{origin} vs {oracle}");
    }
}

#[test]
fn wigner_matches_quadrature_off_origin() {
    let hbar = 1.0;
    let chi = forward(&fock_state(2, 24, hbar).unwrap(), &PhaseGrid::eta_xi(12.0, 96).unwrap()).unwrap();
    let out = PhaseGrid::qp(3.0, 24).unwrap();
    let w = wigner(&chi, &out).unwrap();
    for &(i, j) in &[(12usize, 15usize), (5, 12), (18, 7)] {
        let (q, p) = (out.coord(i), out.coord(j));
        let oracle = wigner_quadrature(2, q, p, hbar);
        assert!((w.values[(i, j)] - oracle).abs() < 1e-8, "({q}, {p})");
    }
}

#[test]
fn wigner_marginal_is_position_density() {
    let hbar = 1.0;
    for m in 0..3 {
        let chi = forward(&fock_state(m, 24, hbar).unwrap(), &PhaseGrid::eta_xi(12.0, 96).unwrap()).unwrap();
        let out = PhaseGrid::qp(6.0, 96).unwrap();
        let w = wigner(&chi, &out).unwrap();
        let dp = out.spacing();
        for i in (0..96).step_by(7) {
            let q = out.coord(i);
            let marginal: f64 = (0..96).map(|j| w.values[(i, j)]).sum::<f64>() * dp;
            let oracle = hermite_function(m, q, hbar).powi(2);
            assert!((marginal - oracle).abs() < 1e-4, "m={m} q={q}: {marginal} vs {oracle}");
        }
    }
}

fn mix(a: &DensityMatrix, b: &DensityMatrix, t: f64) -> DensityMatrix {
    DensityMatrix::mixture(&[(t, a), (1.0 - t, b)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn forward_is_affine_on_mixtures(t in 0.0f64..1.0, q in -1.0f64..1.0, p in -1.0f64..1.0) {
        let hbar = 1.0;
        let grid = PhaseGrid::eta_xi(8.0, 32).unwrap();
        let a = coherent_state(q, p, 24, hbar).unwrap();
        let b = fock_state(1, 24, hbar).unwrap();
        let lhs = forward(&mix(&a, &b, t), &grid).unwrap();
        let ca = forward(&a, &grid).unwrap();
        let cb = forward(&b, &grid).unwrap();
        let rhs = ca.values() * Complex64::new(t, 0.0) + cb.values() * Complex64::new(1.0 - t, 0.0);
        prop_assert!(sup_norm(lhs.values(), &rhs) < 1e-12);
    }

    #[test]
    fn inverse_is_affine_on_mixtures(t in 0.0f64..1.0) {
        let hbar = 1.0;
        let grid = PhaseGrid::eta_xi(12.0, 96).unwrap();
        let a = coherent_state(0.3, -0.2, 24, hbar).unwrap();
        let b = fock_state(2, 24, hbar).unwrap();
        let ca = forward(&a, &grid).unwrap();
        let cb = forward(&b, &grid).unwrap();
        let mixed = CharFunction::new(hbar, grid, ca.values() * Complex64::new(t, 0.0) + cb.values() * Complex64::new(1.0 - t, 0.0)).unwrap();
        let lhs = inverse(&mixed, 24).unwrap().rho;
        let rhs = mix(&inverse(&ca, 24).unwrap().rho, &inverse(&cb, 24).unwrap().rho, t);
        prop_assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-10);
    }
}
