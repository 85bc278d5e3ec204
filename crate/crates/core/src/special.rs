//! Laguerre polynomials and closed-form displacement-operator matrix elements.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Generalized Laguerre polynomial `L_n^(a)(x)` by upward recurrence.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln(n!)`, exact summation for the small arguments used here.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Matrix elements `<m|D(alpha)|n>` of the displacement operator
/// `D(alpha) = exp(alpha a^dag - conj(alpha) a)` for `m, n < dim`.
///
/// These are the entries of the infinite-dimensional operator (the result is
/// the compression `P D P`, not a unitary matrix). For `m = n + d`,
///
/// ```text
/// <n+d|D|n> = sqrt(n!/(n+d)!) alpha^d exp(-|alpha|^2/2) L_n^(d)(|alpha|^2)
/// <n|D|n+d> = (-1)^d conj(<n+d|D|n>)
/// ```
///
/// Evaluated with the normalized three-term recurrence
/// `f_{n+1} = [(2n+1+d-x) f_n - sqrt(n(n+d)) f_{n-1}] / sqrt((n+1)(n+d+1))`.
pub fn displacement_elements(alpha: Complex64, dim: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(dim, dim);
    fill_displacement(alpha, dim, |m, n, v| out[(m, n)] = v);
    out
}

/// Same as [`displacement_elements`] but streams `(row, col, value)` to `sink`
/// to avoid allocating when the caller only contracts against the elements.
pub fn fill_displacement(alpha: Complex64, dim: usize, mut sink: impl FnMut(usize, usize, Complex64)) {
    let x = alpha.norm_sqr();
    let theta = alpha.arg();
    let log_x = if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
    for d in 0..dim {
        let df = d as f64;
        let f0 = if d == 0 {
            (-0.5 * x).exp()
        } else if x > 0.0 {
            (0.5 * df * log_x - 0.5 * x - 0.5 * ln_factorial(d)).exp()
        } else {
            0.0
        };
        let phase = Complex64::from_polar(1.0, df * theta);
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        let mut prev = 0.0;
        let mut cur = f0;
        for n in 0..(dim - d) {
            let below = phase * cur;
            sink(n + d, n, below);
            if d > 0 {
                sink(n, n + d, below.conj() * sign);
            }
            let nf = n as f64;
            let next = ((2.0 * nf + 1.0 + df - x) * cur - (nf * (nf + df)).sqrt() * prev)
                / ((nf + 1.0) * (nf + df + 1.0)).sqrt();
            prev = cur;
            cur = next;
        }
    }
}

/// `<m|D(alpha)|m> = exp(-|alpha|^2/2) L_m(|alpha|^2)`.
pub fn fock_char(m: usize, x: f64) -> f64 {
    (-0.5 * x).exp() * laguerre(m, 0.0, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn laguerre_low_orders() {
        for &x in &[0.0, 0.3, 1.7, 5.0] {
            assert_eq!(laguerre(0, 0.0, x), 1.0);
            assert!((laguerre(1, 0.0, x) - (1.0 - x)).abs() < 1e-14);
            assert!((laguerre(2, 0.0, x) - (1.0 - 2.0 * x + 0.5 * x * x)).abs() < 1e-13);
            assert!((laguerre(2, 1.0, x) - (3.0 - 3.0 * x + 0.5 * x * x)).abs() < 1e-13);
        }
    }

    #[test]
    fn laguerre_matches_explicit_sum() {
        // L_m(x) = m! sum_k (-1)^k x^k / [(m-k)! (k!)^2]
        for m in 0..12 {
            for &x in &[0.1f64, 1.0, 3.3] {
                let explicit: f64 = (0..=m)
                    .map(|k| {
                        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
                        sgn * factorial(m) * x.powi(k as i32)
                            / (factorial(m - k) * factorial(k).powi(2))
                    })
                    .sum();
                assert!((laguerre(m, 0.0, x) - explicit).abs() < 1e-10 * (1.0 + explicit.abs()));
            }
        }
    }

    #[test]
    fn displacement_diagonal_is_fock_char() {
        let alpha = Complex64::new(0.7, -0.4);
        let d = displacement_elements(alpha, 10);
        for m in 0..10 {
            let expect = fock_char(m, alpha.norm_sqr());
            assert!((d[(m, m)].re - expect).abs() < 1e-14);
            assert!(d[(m, m)].im.abs() < 1e-14);
        }
    }

    #[test]
    fn displacement_off_diagonal_against_direct_formula() {
        let alpha = Complex64::new(-0.9, 1.3);
        let x = alpha.norm_sqr();
        let d = displacement_elements(alpha, 12);
        for m in 0..12 {
            for n in 0..12 {
                let expect = if m >= n {
                    (factorial(n) / factorial(m)).sqrt()
                        * alpha.powu((m - n) as u32)
                        * (-0.5 * x).exp()
                        * laguerre(n, (m - n) as f64, x)
                } else {
                    (factorial(m) / factorial(n)).sqrt()
                        * (-alpha.conj()).powu((n - m) as u32)
                        * (-0.5 * x).exp()
                        * laguerre(m, (n - m) as f64, x)
                };
                assert!((d[(m, n)] - expect).norm() < 1e-12, "({m},{n})");
            }
        }
    }

    #[test]
    fn zero_displacement_is_identity() {
        let d = displacement_elements(Complex64::new(0.0, 0.0), 6);
        assert!((d - DMatrix::identity(6, 6)).norm() < 1e-15);
    }
}
