//! Reference values computed without the library: explicit series, quadratures
//! and operator traces built from scratch. Shared by the integration and
//! acceptance suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weylchar::states::{coherent_state, fock_state, p_mixture, random_state, DensityMatrix, PMixtureSpec};

/// `L_m(x) = sum_k C(m, k) (-x)^k / k!`
pub fn laguerre_series(m: usize, x: f64) -> f64 {
    let mut binom = 1.0;
    let mut fact = 1.0;
    let mut total = 0.0;
    for k in 0..=m {
        if k > 0 {
            binom *= (m - k + 1) as f64 / k as f64;
            fact *= k as f64;
        }
        total += binom * (-x).powi(k as i32) / fact;
    }
    total
}

/// `J_0(x) = (1/pi) int_0^pi cos(x sin t) dt` by the trapezoid rule, which is
/// spectrally accurate for this periodic integrand.
pub fn bessel_j0(x: f64) -> f64 {
    let n = 400;
    let h = PI / n as f64;
    let mut s = 0.5 * (1.0 + (x * PI.sin()).cos());
    for k in 1..n {
        s += (x * (k as f64 * h).sin()).cos();
    }
    s * h / PI
}

/// Normalized oscillator eigenfunction `psi_m(q)` for `H = (p^2 + q^2) / 2`.
pub fn hermite_function(m: usize, q: f64, hbar: f64) -> f64 {
    let x = q / hbar.sqrt();
    // orthonormal recurrence avoids overflow of H_m and m!
    let mut prev = 0.0;
    let mut cur = (PI * hbar).powf(-0.25) * (-x * x / 2.0).exp();
    for k in 0..m {
        let next = (2.0 / (k + 1) as f64).sqrt() * x * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `W(q, p) = (1 / pi hbar) int psi(q + y) psi(q - y) cos(2 p y / hbar) dy`
/// for the real eigenfunction `psi_m`.
pub fn wigner_quadrature(m: usize, q: f64, p: f64, hbar: f64) -> f64 {
    let half = 12.0 * hbar.sqrt() + q.abs();
    let n = 4000;
    let h = 2.0 * half / n as f64;
    let mut s = 0.0;
    for k in 0..=n {
        let y = -half + k as f64 * h;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        s += w * hermite_function(m, q + y, hbar) * hermite_function(m, q - y, hbar) * (2.0 * p * y / hbar).cos();
    }
    s * h / (PI * hbar)
}

/// `sqrt(hbar / 2) (a + a^dag)` and `i sqrt(hbar / 2) (a^dag - a)` in `dim` levels.
pub fn quadratures(dim: usize, hbar: f64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let a = DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let ad = a.adjoint();
    let c = (hbar / 2.0).sqrt();
    let q = (&a + &ad) * Complex64::new(c, 0.0);
    let p = (&ad - &a) * Complex64::new(0.0, c);
    (q, p)
}

pub fn trace_with(rho: &DMatrix<Complex64>, op: &DMatrix<Complex64>) -> Complex64 {
    (rho * op).trace()
}

/// `<q^2>` and `<p^2>` by explicit traces; squares are formed one level higher
/// so the truncation does not touch the retained block.
pub fn second_moments(rho: &DensityMatrix) -> (f64, f64) {
    let n = rho.dim();
    let (q, p) = quadratures(n + 1, rho.hbar());
    let q2 = (&q * &q).view((0, 0), (n, n)).into_owned();
    let p2 = (&p * &p).view((0, 0), (n, n)).into_owned();
    (trace_with(rho.matrix(), &q2).re, trace_with(rho.matrix(), &p2).re)
}

pub fn sup_norm(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

pub struct ZooState {
    pub name: String,
    pub rho: DensityMatrix,
}

/// Fock 0..4, a coherent state, two P-mixtures and seeded random states.
pub fn zoo(dim: usize, hbar: f64, seeds: std::ops::Range<u64>) -> Vec<ZooState> {
    let mut out = Vec::new();
    for m in 0..5 {
        out.push(ZooState { name: format!("fock {m}"), rho: fock_state(m, dim, hbar).unwrap() });
    }
    out.push(ZooState { name: "coherent".into(), rho: coherent_state(0.7, -0.4, dim, hbar).unwrap() });
    let mixtures = [
        vec![(0.5, 0.0, 0.5), (-0.5, 0.0, 0.5)],
        vec![(0.3, 0.4, 0.2), (-0.6, 0.1, 0.3), (0.0, -0.5, 0.5)],
    ];
    for (k, atoms) in mixtures.into_iter().enumerate() {
        let spec = PMixtureSpec::new(atoms).unwrap();
        out.push(ZooState { name: format!("p-mixture {k}"), rho: p_mixture(&spec, dim, hbar).unwrap() });
    }
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        out.push(ZooState { name: format!("random {seed}"), rho: random_state(&mut rng, 5, 3, dim, hbar).unwrap() });
    }
    out
}

/// Rescaled characteristic function of the coherent state at `(q0, p0)` after
/// time `t` under `H = p^2 / 2 + w^2 q^2 / 2 + f q`, by the classical
/// trajectory and the transported covariance `(hbar / 2) S S^T`.
pub fn gaussian_flow_char(q0: f64, p0: f64, hbar: f64, w: f64, f: f64, t: f64, eta: f64, xi: f64) -> Complex64 {
    let (c, s) = ((w * t).cos(), (w * t).sin());
    let rest = -f / (w * w);
    let (dq, dp) = (q0 - rest, p0);
    let q = rest + dq * c + dp * s / w;
    let p = -w * dq * s + dp * c;
    // rows of S map (q0, p0) to (q, p)
    let (a, b, cc, d) = (c, s / w, -w * s, c);
    let (u, v) = (eta, -xi);
    let su = (a * u + cc * v, b * u + d * v);
    let quad = 0.5 * hbar * (su.0 * su.0 + su.1 * su.1);
    Complex64::from_polar((-quad / 2.0).exp(), q * eta - p * xi)
}
