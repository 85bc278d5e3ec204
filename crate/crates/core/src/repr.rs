//! Unitary representations of `H_1` in a truncated Fock basis.
//!
//! The generators are realized with the harmonic-oscillator ladder
//! `q = sqrt(hbar/2)(a + a^dag)`, `p = i sqrt(hbar/2)(a^dag - a)`, for which
//!
//! ```text
//! T(s, eta, xi) = exp(-i hbar s) exp[(i/hbar)(eta q - xi p)] = exp(-i hbar s) D(alpha),
//! alpha = (xi + i eta) / sqrt(2 hbar).
//! ```
//!
//! With this normalization `T(g) T(h) = T(g h)` holds for the group law in
//! [`crate::group`] only at `hbar = 1`. For general `hbar` the homomorphism is
//! `g -> T(s, hbar eta, hbar xi)`, exposed as [`TruncatedRep::group_matrix`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, require_positive, Error, Result};
use crate::group::GroupElement;
use crate::linalg::CMatrix;
use crate::special::displacement_elements;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Lowering operator `a|m> = sqrt(m)|m-1>` truncated to `dim` levels.
pub fn lowering(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for m in 1..dim {
        a[(m - 1, m)] = Complex64::new((m as f64).sqrt(), 0.0);
    }
    a
}

/// Displacement amplitude of the group translation `(eta, xi)`.
pub fn displacement_alpha(eta: f64, xi: f64, hbar: f64) -> Complex64 {
    Complex64::new(xi, eta) / (2.0 * hbar).sqrt()
}

#[derive(Debug, Clone)]
pub struct TruncatedRep {
    hbar: f64,
    dim: usize,
    qhat: CMatrix,
    phat: CMatrix,
}

impl TruncatedRep {
    pub fn build_generators(hbar: f64, dim: usize) -> Result<Self> {
        require_positive("hbar", hbar)?;
        if dim < 2 {
            return Err(invalid("dim", format!("need at least 2 levels, got {dim}")));
        }
        let a = lowering(dim);
        let ad = a.adjoint();
        let c = (hbar / 2.0).sqrt();
        let qhat = (&a + &ad).scale(c);
        let phat = (&ad - &a) * Complex64::new(0.0, c);
        Ok(Self { hbar, dim, qhat, phat })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qhat(&self) -> &CMatrix {
        &self.qhat
    }

    pub fn phat(&self) -> &CMatrix {
        &self.phat
    }

    /// `max |[q, p] - i hbar|` on the leading `(dim-1) x (dim-1)` block.
    pub fn commutator_defect(&self) -> f64 {
        let comm = &self.qhat * &self.phat - &self.phat * &self.qhat;
        let k = self.dim - 1;
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { I * self.hbar } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((comm[(i, j)] - target).norm());
            }
        }
        worst
    }

    fn single_mode(g: &GroupElement) -> Result<(f64, f64, f64)> {
        if g.n() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: g.n(),
            });
        }
        let (eta, xi) = g.planar();
        Ok((g.s(), eta, xi))
    }

    /// `T(g)` by dense exponentiation of the truncated generators.
    pub fn rep_matrix(&self, g: &GroupElement) -> Result<CMatrix> {
        let (s, eta, xi) = Self::single_mode(g)?;
        let generator = (&self.qhat.scale(eta) - &self.phat.scale(xi)) * (I / self.hbar);
        Ok(generator.exp() * Complex64::from_polar(1.0, -self.hbar * s))
    }

    /// `T(g)` from the closed-form Laguerre matrix elements of `D(alpha)`.
    pub fn rep_matrix_closed_form(&self, g: &GroupElement) -> Result<CMatrix> {
        let (s, eta, xi) = Self::single_mode(g)?;
        let d = displacement_elements(displacement_alpha(eta, xi, self.hbar), self.dim);
        Ok(d * Complex64::from_polar(1.0, -self.hbar * s))
    }

    /// `T(s, hbar eta, hbar xi)`, a homomorphism of the group law for every `hbar`.
    pub fn group_matrix(&self, g: &GroupElement) -> Result<CMatrix> {
        let (s, eta, xi) = Self::single_mode(g)?;
        let scaled = GroupElement::single(s, self.hbar * eta, self.hbar * xi)?;
        self.rep_matrix(&scaled)
    }
}

/// One-dimensional representation `T0_{q,p}(g) = exp[i(eta.q - xi.p)]`.
pub fn rep_classical(q: &[f64], p: &[f64], g: &GroupElement) -> Result<Complex64> {
    let n = g.n();
    for len in [q.len(), p.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let phase: f64 = (0..n).map(|j| g.eta()[j] * q[j] - g.xi()[j] * p[j]).sum();
    Ok(Complex64::from_polar(1.0, phase))
}

/// `max |U U^dag - 1|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let prod = u * u.adjoint();
    let eye: DMatrix<Complex64> = DMatrix::identity(n, n);
    crate::linalg::max_abs(&(prod - eye))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::multiply;
    use crate::linalg::{max_abs, trace};
    use std::f64::consts::PI;

    fn el(s: f64, eta: f64, xi: f64) -> GroupElement {
        GroupElement::single(s, eta, xi).unwrap()
    }

    #[test]
    fn generators_n2() {
        let rep = TruncatedRep::build_generators(1.0, 2).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((rep.qhat()[(0, 1)].re - r).abs() < 1e-15);
        assert!((rep.qhat()[(1, 0)].re - r).abs() < 1e-15);
        assert_eq!(rep.qhat()[(0, 0)], Complex64::new(0.0, 0.0));
        let rep = TruncatedRep::build_generators(2.0, 3).unwrap();
        assert!((rep.qhat()[(0, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ccr_on_interior_block() {
        for &(hbar, dim) in &[(1.0, 2), (0.5, 8), (2.0, 33)] {
            let rep = TruncatedRep::build_generators(hbar, dim).unwrap();
            assert!(rep.commutator_defect() < 1e-12);
            let comm = rep.qhat() * rep.phat() - rep.phat() * rep.qhat();
            assert!((comm[(0, 0)] - I * hbar).norm() < 1e-12);
            assert!(crate::linalg::hermiticity_defect(rep.qhat()) < 1e-12);
            assert!(crate::linalg::hermiticity_defect(rep.phat()) < 1e-12);
        }
    }

    #[test]
    fn invalid_sizes() {
        assert!(TruncatedRep::build_generators(1.0, 1).is_err());
        assert!(TruncatedRep::build_generators(0.0, 4).is_err());
    }

    #[test]
    fn identity_element_maps_to_identity() {
        let rep = TruncatedRep::build_generators(0.7, 12).unwrap();
        let t = rep.rep_matrix(&GroupElement::identity(1)).unwrap();
        assert!(max_abs(&(t - CMatrix::identity(12, 12))) < 1e-14);
    }

    #[test]
    fn vacuum_element_is_gaussian() {
        for &hbar in &[0.5, 1.0, 2.0] {
            let rep = TruncatedRep::build_generators(hbar, 40).unwrap();
            let (eta, xi) = (0.8, -0.6);
            let expect = (-(eta * eta + xi * xi) / (4.0 * hbar)).exp();
            let t = rep.rep_matrix(&el(0.0, eta, xi)).unwrap();
            assert!((t[(0, 0)].re - expect).abs() < 1e-12);
            let c = rep.rep_matrix_closed_form(&el(0.0, eta, xi)).unwrap();
            assert!((c[(0, 0)].re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn unitary_for_small_alpha() {
        let rep = TruncatedRep::build_generators(1.0, 32).unwrap();
        for &(eta, xi) in &[(0.0, 1.41), (1.0, -0.9), (-0.3, 0.2)] {
            let t = rep.rep_matrix(&el(0.3, eta, xi)).unwrap();
            assert!(displacement_alpha(eta, xi, 1.0).norm() <= 1.0 + 1e-12);
            assert!(unitarity_defect(&t) < 1e-8);
        }
    }

    #[test]
    fn dense_and_closed_form_agree_on_interior_block() {
        // Truncating the generator corrupts elements coupled to the top
        // levels; at |alpha| <= 2 and N = 32 the leading 12x12 block is clean.
        let rep = TruncatedRep::build_generators(1.0, 32).unwrap();
        let k = 12;
        for &(eta, xi) in &[(0.0, 2.0 * 2f64.sqrt()), (1.7, 2.1), (-2.0, -1.0)] {
            assert!(displacement_alpha(eta, xi, 1.0).norm() <= 2.0 + 1e-12);
            let a = rep.rep_matrix(&el(0.1, eta, xi)).unwrap();
            let b = rep.rep_matrix_closed_form(&el(0.1, eta, xi)).unwrap();
            let diff = max_abs(&(a.view((0, 0), (k, k)) - b.view((0, 0), (k, k))));
            assert!(diff < 1e-10, "interior discrepancy {diff:e}");
        }
    }

    #[test]
    fn rejects_multimode() {
        let rep = TruncatedRep::build_generators(1.0, 4).unwrap();
        let g = GroupElement::new(0.0, vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(rep.rep_matrix(&g).is_err());
    }

    #[test]
    fn homomorphism_improves_with_truncation() {
        let g = el(0.2, 1.8, -1.5);
        let h = el(-0.1, -1.2, 2.0);
        let gh = multiply(&g, &h).unwrap();
        let mut last = f64::INFINITY;
        for &dim in &[16, 32, 64] {
            let rep = TruncatedRep::build_generators(1.0, dim).unwrap();
            let lhs = rep.rep_matrix(&g).unwrap() * rep.rep_matrix(&h).unwrap();
            let rhs = rep.rep_matrix(&gh).unwrap();
            // interior block, where truncation has not yet propagated
            let k = dim / 2;
            let err = max_abs(&(lhs.view((0, 0), (k, k)) - rhs.view((0, 0), (k, k))));
            assert!(err <= last.max(1e-13), "N={dim}: {err:e} > {last:e}");
            last = err;
        }
        assert!(last < 1e-8);
    }

    #[test]
    fn group_matrix_is_homomorphism_for_any_hbar() {
        let rep = TruncatedRep::build_generators(0.5, 48).unwrap();
        let g = el(0.7, 0.5, -0.3);
        let h = el(-0.2, -0.4, 0.6);
        let gh = multiply(&g, &h).unwrap();
        let lhs = rep.group_matrix(&g).unwrap() * rep.group_matrix(&h).unwrap();
        let rhs = rep.group_matrix(&gh).unwrap();
        let err = max_abs(&(lhs.view((0, 0), (16, 16)) - rhs.view((0, 0), (16, 16))));
        assert!(err < 1e-12, "{err:e}");
    }

    #[test]
    fn trace_concentrates_at_origin() {
        // |tr D(alpha)| at |alpha| = 1 relative to tr D(0) = N, N = 64.
        // Independent value: sum_{m<64} exp(-1/2) L_m(1) = 0.738679040489...
        let rep = TruncatedRep::build_generators(1.0, 64).unwrap();
        let t0 = trace(&rep.rep_matrix_closed_form(&el(0.0, 0.0, 0.0)).unwrap()).norm();
        let t1 = trace(&rep.rep_matrix_closed_form(&el(0.0, 0.0, 2f64.sqrt())).unwrap()).norm();
        assert!((t0 - 64.0).abs() < 1e-12);
        assert!((t1 - 0.738_679_040_489_192_3).abs() < 1e-9, "{t1}");
        assert!(t1 / t0 < 0.012);
        // decreases further away from the origin
        let t2 = trace(&rep.rep_matrix_closed_form(&el(0.0, 0.0, 4.0)).unwrap()).norm();
        assert!(t2 < t1);
    }

    #[test]
    fn classical_characters() {
        let g = el(3.0, PI, 0.0);
        assert!((rep_classical(&[0.0], &[0.0], &g).unwrap() - 1.0).norm() < 1e-15);
        assert!((rep_classical(&[1.0], &[0.0], &g).unwrap() + 1.0).norm() < 1e-15);
        let g = el(0.4, 0.3, -1.1);
        let h = el(-2.0, 1.2, 0.5);
        let (q, p) = ([0.7], [-0.4]);
        let lhs = rep_classical(&q, &p, &multiply(&g, &h).unwrap()).unwrap();
        let rhs = rep_classical(&q, &p, &g).unwrap() * rep_classical(&q, &p, &h).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
        let shifted = el(10.0, 0.3, -1.1);
        assert!((rep_classical(&q, &p, &g).unwrap() - rep_classical(&q, &p, &shifted).unwrap()).norm() < 1e-15);
        assert!(rep_classical(&[0.0, 1.0], &[0.0], &g).is_err());
    }
}
