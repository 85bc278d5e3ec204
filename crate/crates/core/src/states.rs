//! Benchmark density matrices in the truncated Fock basis and the von
//! Neumann evolution used as an oracle for characteristic-function dynamics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, trace, trace_product, unitary_propagator, CMatrix};
use crate::special::ln_factorial;

/// Tolerance for the Hermiticity, trace and positivity invariants.
pub const STATE_TOL: f64 = 1e-10;
/// Largest Fock-space tail mass accepted for a truncated coherent vector.
pub const TAIL_TOL: f64 = 1e-10;

/// A normalized, positive semidefinite matrix in a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    hbar: f64,
    data: CMatrix,
}

impl DensityMatrix {
    /// Validates the Hermiticity, trace and positivity invariants.
    pub fn new(data: CMatrix, hbar: f64) -> Result<Self> {
        require_positive("hbar", hbar)?;
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: data.nrows(),
                found: data.ncols(),
            });
        }
        let herm = hermiticity_defect(&data);
        if herm > STATE_TOL {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = trace(&data);
        if (tr - 1.0).norm() > STATE_TOL {
            return Err(invalid("trace", format!("expected 1, got {tr}")));
        }
        let min = hermitian_eigenvalues(&data).min();
        if min < -STATE_TOL {
            return Err(Error::Negativity {
                minimum: min,
                limit: -STATE_TOL,
            });
        }
        Ok(Self { hbar, data })
    }

    /// Projector onto a (not necessarily normalized) vector.
    pub fn pure(vector: &DVector<Complex64>, hbar: f64) -> Result<Self> {
        let norm = vector.norm();
        if norm == 0.0 {
            return Err(invalid("vector", "zero vector"));
        }
        let v = vector.unscale(norm);
        Self::new(&v * v.adjoint(), hbar)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.data, &self.data).re
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        hermitian_eigenvalues(&self.data)
    }

    /// `tr(rho A)`.
    pub fn expectation(&self, op: &CMatrix) -> Result<Complex64> {
        if op.shape() != self.data.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.nrows(),
            });
        }
        Ok(trace_product(&self.data, op))
    }

    /// Convex combination `sum w_k rho_k`; all inputs must share `dim` and `hbar`.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| invalid("parts", "empty mixture"))?;
        let sum: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::WeightNormalization { sum });
        }
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if rho.dim() != first.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: rho.dim(),
                });
            }
            acc += rho.matrix().scale(*w);
        }
        Self::new(acc, first.hbar)
    }

    /// Same matrix embedded into a larger truncation.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(invalid("dim", "cannot embed into a smaller space"));
        }
        let mut out = CMatrix::zeros(dim, dim);
        out.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.data);
        Ok(Self { hbar: self.hbar, data: out })
    }
}

pub fn fock_state(m: usize, dim: usize, hbar: f64) -> Result<DensityMatrix> {
    if m >= dim {
        return Err(invalid("m", format!("level {m} outside a {dim}-level truncation")));
    }
    let mut data = CMatrix::zeros(dim, dim);
    data[(m, m)] = Complex64::new(1.0, 0.0);
    DensityMatrix::new(data, hbar)
}

/// Amplitude `beta = (q + i p) / sqrt(2 hbar)` of the coherent state centred at `(q, p)`.
pub fn coherent_amplitude(q: f64, p: f64, hbar: f64) -> Complex64 {
    Complex64::new(q, p) / (2.0 * hbar).sqrt()
}

/// Truncated coherent vector and the discarded tail probability.
pub fn coherent_vector(q: f64, p: f64, dim: usize, hbar: f64) -> Result<(DVector<Complex64>, f64)> {
    require_positive("hbar", hbar)?;
    let beta = coherent_amplitude(q, p, hbar);
    let x = beta.norm_sqr();
    let theta = beta.arg();
    let log_x = if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
    let v = DVector::from_fn(dim, |n, _| {
        if n == 0 {
            Complex64::new((-0.5 * x).exp(), 0.0)
        } else if x == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            let mag = (0.5 * n as f64 * log_x - 0.5 * x - 0.5 * ln_factorial(n)).exp();
            Complex64::from_polar(mag, n as f64 * theta)
        }
    });
    let kept: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    Ok((v, (1.0 - kept).max(0.0)))
}

pub fn coherent_state(q: f64, p: f64, dim: usize, hbar: f64) -> Result<DensityMatrix> {
    let (v, tail) = coherent_vector(q, p, dim, hbar)?;
    if tail > TAIL_TOL {
        return Err(Error::TruncationInadequate(format!(
            "coherent state at ({q}, {p}) leaves tail mass {tail:.3e} beyond {dim} levels"
        )));
    }
    DensityMatrix::pure(&v, hbar)
}

/// A discrete P-measure: atoms `(q, p, weight)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PMixtureSpec {
    atoms: Vec<(f64, f64, f64)>,
}

impl PMixtureSpec {
    pub fn new(atoms: Vec<(f64, f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("atoms", "at least one atom"));
        }
        let sum: f64 = atoms.iter().map(|a| a.2).sum();
        if atoms.iter().any(|a| !(a.2 >= 0.0) || !a.0.is_finite() || !a.1.is_finite()) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::WeightNormalization { sum });
        }
        Ok(Self { atoms })
    }

    /// Isotropic Gaussian P-measure discretized on a `resolution x resolution`
    /// tensor grid covering `+-4 sigma`.
    pub fn gaussian(center: (f64, f64), sigma: f64, resolution: usize) -> Result<Self> {
        require_positive("sigma", sigma)?;
        if resolution < 2 {
            return Err(invalid("resolution", "need at least 2 nodes per axis"));
        }
        let step = 8.0 * sigma / (resolution - 1) as f64;
        let mut atoms = Vec::with_capacity(resolution * resolution);
        for i in 0..resolution {
            for j in 0..resolution {
                let dq = -4.0 * sigma + i as f64 * step;
                let dp = -4.0 * sigma + j as f64 * step;
                let w = (-(dq * dq + dp * dp) / (2.0 * sigma * sigma)).exp();
                atoms.push((center.0 + dq, center.1 + dp, w));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.2).sum();
        atoms.iter_mut().for_each(|a| a.2 /= total);
        Self::new(atoms)
    }

    /// Uniform measure on a circle of `radius` about the origin, `points` atoms.
    pub fn ring(radius: f64, points: usize) -> Result<Self> {
        require_positive("radius", radius)?;
        if points == 0 {
            return Err(invalid("points", "at least one atom"));
        }
        let w = 1.0 / points as f64;
        let atoms = (0..points)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
                (radius * phi.cos(), radius * phi.sin(), w)
            })
            .collect();
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(f64, f64, f64)] {
        &self.atoms
    }
}

pub fn p_mixture(spec: &PMixtureSpec, dim: usize, hbar: f64) -> Result<DensityMatrix> {
    let mut acc = CMatrix::zeros(dim, dim);
    for &(q, p, w) in spec.atoms() {
        let rho = coherent_state(q, p, dim, hbar)?;
        acc += rho.matrix().scale(w);
    }
    DensityMatrix::new(acc, hbar)
}

/// `rho -> U rho U^dag`, `U = exp(-i H dt / hbar)`.
pub fn von_neumann_step(rho: &DensityMatrix, hamiltonian: &CMatrix, dt: f64) -> Result<DensityMatrix> {
    if hamiltonian.shape() != rho.matrix().shape() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: hamiltonian.nrows(),
        });
    }
    let u = unitary_propagator(hamiltonian, dt, rho.hbar(), 1e-10)?;
    let evolved = &u * rho.matrix() * u.adjoint();
    // remove rounding-level anti-Hermitian residue
    DensityMatrix::new(crate::linalg::hermitian_part(&evolved), rho.hbar())
}

/// Random density matrix of rank `rank` supported on the first `support` levels.
pub fn random_state<R: rand::Rng>(rng: &mut R, support: usize, rank: usize, dim: usize, hbar: f64) -> Result<DensityMatrix> {
    if support > dim || support == 0 || rank == 0 {
        return Err(invalid("support", "need 0 < support <= dim and rank > 0"));
    }
    let g = DMatrix::from_fn(support, rank, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let mut small = &g * g.adjoint();
    let tr = trace(&small).re;
    small.unscale_mut(tr);
    let mut data = CMatrix::zeros(dim, dim);
    data.view_mut((0, 0), (support, support)).copy_from(&small);
    DensityMatrix::new(crate::linalg::hermitian_part(&data), hbar)
}
