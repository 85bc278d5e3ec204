//! The non-commutative Fourier transform between density matrices and
//! characteristic functions, and the Wigner transform.
//!
//! A physical state is `phi(s, eta, xi) = exp(-i hbar s) chi(eta, xi)`. Only
//! `chi` is sampled; the phase is always carried analytically. The `s`
//! integral of the reconstruction formula over `[0, 2 pi / hbar]` against
//! `ds / (2 pi)^2` contributes `1 / (2 pi hbar)`, leaving
//!
//! ```text
//! rho = (1 / 2 pi hbar) int d(eta) d(xi) chi(eta, xi) D(alpha)^dag
//! ```
//!
//! evaluated by the trapezoidal rule on the grid (the integrand is smooth and
//! decays, so the rule converges spectrally).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, require_positive, Error, Result};
use crate::grid::{boundary_ratio, Axes, PhaseGrid};
use crate::linalg::{hermitian_eigen, hermitian_part, hermiticity_defect, trace, CMatrix};
use crate::repr::displacement_alpha;
use crate::special::fill_displacement;
use crate::states::DensityMatrix;

/// Tolerance of the normalization, symmetry and boundedness invariants.
pub const CHAR_TOL: f64 = 1e-8;
/// Boundary decay required before integrating a sampled function.
pub const DECAY_TOL: f64 = 1e-6;
/// Eigenvalues of a reconstruction below `-REPAIR_TOL` are an error.
pub const REPAIR_TOL: f64 = 1e-6;

/// Samples of `chi(eta, xi)` on an `(eta, xi)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFunction {
    hbar: f64,
    grid: PhaseGrid,
    values: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharInvariants {
    /// `|chi(0,0) - 1|`
    pub origin_defect: f64,
    /// `max |chi(-z) - conj chi(z)|` over grid-symmetric nodes
    pub symmetry_defect: f64,
    pub max_modulus: f64,
}

impl CharInvariants {
    pub fn holds(&self, tol: f64) -> bool {
        self.origin_defect <= tol && self.symmetry_defect <= tol && self.max_modulus <= 1.0 + tol
    }
}

impl CharFunction {
    /// Wraps samples and checks the characteristic-function invariants at
    /// [`CHAR_TOL`].
    pub fn new(hbar: f64, grid: PhaseGrid, values: DMatrix<Complex64>) -> Result<Self> {
        let chi = Self::unchecked(hbar, grid, values)?;
        let inv = chi.invariants();
        if !inv.holds(CHAR_TOL) {
            return Err(invalid(
                "chi",
                format!(
                    "invariants violated: |chi(0)-1| = {:.3e}, symmetry {:.3e}, max |chi| = {:.12}",
                    inv.origin_defect, inv.symmetry_defect, inv.max_modulus
                ),
            ));
        }
        Ok(chi)
    }

    /// Wraps samples after checking only shapes and axes.
    pub fn unchecked(hbar: f64, grid: PhaseGrid, values: DMatrix<Complex64>) -> Result<Self> {
        require_positive("hbar", hbar)?;
        if grid.axes() != Axes::EtaXi {
            return Err(Error::GridMismatch("characteristic functions live on (eta, xi)".into()));
        }
        let m = grid.points();
        if values.shape() != (m, m) {
            return Err(Error::GridMismatch(format!("values {:?} vs grid {m}x{m}", values.shape())));
        }
        Ok(Self { hbar, grid, values })
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(hbar: f64, grid: PhaseGrid, f: F) -> Result<Self> {
        Self::new(hbar, grid, grid.map(f))
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<Complex64> {
        self.values
    }

    pub fn at_origin(&self) -> Complex64 {
        let o = self.grid.origin_index();
        self.values[(o, o)]
    }

    pub fn invariants(&self) -> CharInvariants {
        invariants_of(&self.values, &self.grid)
    }

    pub fn boundary_ratio(&self) -> f64 {
        boundary_ratio(&self.values)
    }

    /// `exp(-i hbar s) chi(eta, xi)` at a grid node.
    pub fn physical_at(&self, s: f64, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, -self.hbar * s) * self.values[(i, j)]
    }
}

pub(crate) fn invariants_of(values: &DMatrix<Complex64>, grid: &PhaseGrid) -> CharInvariants {
    let m = grid.points();
    let o = grid.origin_index();
    let mut symmetry: f64 = 0.0;
    let mut max_modulus: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            max_modulus = max_modulus.max(values[(i, j)].norm());
            if i > 0 && j > 0 {
                symmetry = symmetry.max((values[(m - i, m - j)] - values[(i, j)].conj()).norm());
            }
        }
    }
    CharInvariants {
        origin_defect: (values[(o, o)] - 1.0).norm(),
        symmetry_defect: symmetry,
        max_modulus,
    }
}

/// `tr[A D(alpha(eta, xi))]` at every node of `grid`.
pub fn trace_against_displacement(a: &CMatrix, grid: &PhaseGrid, hbar: f64) -> Result<DMatrix<Complex64>> {
    require_positive("hbar", hbar)?;
    let dim = a.nrows();
    if a.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: a.ncols() });
    }
    let m = grid.points();
    let coords = grid.coords();
    let flat: Vec<Complex64> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % m, idx / m);
            let alpha = displacement_alpha(coords[i], coords[j], hbar);
            let mut acc = Complex64::new(0.0, 0.0);
            fill_displacement(alpha, dim, |r, c, v| acc += a[(c, r)] * v);
            acc
        })
        .collect();
    Ok(DMatrix::from_vec(m, m, flat))
}

/// `(h^2 / 2 pi hbar) sum_nodes values * D(alpha)` (or `D(alpha)^dag`), truncated to `dim` levels.
pub fn integrate_against_displacement(
    values: &DMatrix<Complex64>,
    grid: &PhaseGrid,
    hbar: f64,
    dim: usize,
    adjoint: bool,
) -> Result<CMatrix> {
    require_positive("hbar", hbar)?;
    if dim < 1 {
        return Err(invalid("dim", "need at least one level"));
    }
    let m = grid.points();
    let coords = grid.coords();
    let weight = grid.cell_area() / (2.0 * PI * hbar);
    let partial: Vec<CMatrix> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut acc = CMatrix::zeros(dim, dim);
            for j in 0..m {
                let v = values[(i, j)];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let alpha = displacement_alpha(coords[i], coords[j], hbar);
                if adjoint {
                    fill_displacement(alpha, dim, |r, c, d| acc[(c, r)] += v * d.conj());
                } else {
                    fill_displacement(alpha, dim, |r, c, d| acc[(r, c)] += v * d);
                }
            }
            acc
        })
        .collect();
    let mut total = CMatrix::zeros(dim, dim);
    for p in &partial {
        total += p;
    }
    Ok(total.scale(weight))
}

/// `chi(eta, xi) = tr[rho D(alpha)]` on `grid`.
pub fn forward(rho: &DensityMatrix, grid: &PhaseGrid) -> Result<CharFunction> {
    if grid.axes() != Axes::EtaXi {
        return Err(Error::GridMismatch("forward transform needs an (eta, xi) grid".into()));
    }
    let values = trace_against_displacement(rho.matrix(), grid, rho.hbar())?;
    let chi = CharFunction::unchecked(rho.hbar(), *grid, values)?;
    let inv = chi.invariants();
    if inv.max_modulus > 1.0 + 1e-6 {
        return Err(Error::TruncationInadequate(format!(
            "|chi| reaches {:.9} > 1",
            inv.max_modulus
        )));
    }
    Ok(chi)
}

/// Result of the inverse transform with its diagnostics.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub rho: DensityMatrix,
    /// Trace of the raw quadrature; deviation from 1 measures the measure
    /// constant and truncation loss.
    pub raw_trace: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    /// Whether small negative eigenvalues were clipped and the trace restored.
    pub repaired: bool,
}

/// Reconstruct the density matrix of `chi` in a `dim`-level truncation.
pub fn inverse(chi: &CharFunction, dim: usize) -> Result<Reconstruction> {
    let ratio = chi.boundary_ratio();
    if ratio > DECAY_TOL {
        return Err(Error::BoundaryDecay { ratio, limit: DECAY_TOL });
    }
    let raw = integrate_against_displacement(chi.values(), chi.grid(), chi.hbar(), dim, true)?;
    let herm = hermiticity_defect(&raw);
    let raw_trace = trace(&raw).re;
    if (raw_trace - 1.0).abs() > REPAIR_TOL {
        return Err(Error::TruncationInadequate(format!(
            "reconstruction carries trace {raw_trace:.9} in {dim} levels"
        )));
    }
    let h = hermitian_part(&raw);
    let (values, vectors) = hermitian_eigen(&h);
    let min = values.min();
    if min < -REPAIR_TOL {
        return Err(Error::Negativity { minimum: min, limit: -REPAIR_TOL });
    }
    let repaired = min < 0.0;
    let clipped = values.map(|v| v.max(0.0));
    let total: f64 = clipped.sum();
    let diag = CMatrix::from_diagonal(&clipped.map(|v| Complex64::new(v / total, 0.0)));
    let data = hermitian_part(&(&vectors * diag * vectors.adjoint()));
    Ok(Reconstruction {
        rho: DensityMatrix::new(data, chi.hbar())?,
        raw_trace,
        hermiticity_defect: herm,
        min_eigenvalue: min,
        repaired,
    })
}

/// `C sum_{j,k} v(eta_j, xi_k) exp[-i(eta_j q - xi_k p)/scale]` with
/// `C = h^2 / (2 pi scale)^2`, evaluated at every node of `out` by a
/// separable matrix DFT.
pub fn symplectic_transform(values: &DMatrix<Complex64>, grid: &PhaseGrid, out: &PhaseGrid, scale: f64) -> DMatrix<Complex64> {
    let m = grid.points();
    let n = out.points();
    let c_in = grid.coords();
    let c_out = out.coords();
    let left = DMatrix::from_fn(n, m, |a, j| Complex64::from_polar(1.0, -c_in[j] * c_out[a] / scale));
    let right = DMatrix::from_fn(m, n, |k, b| Complex64::from_polar(1.0, c_in[k] * c_out[b] / scale));
    let norm = grid.cell_area() / (2.0 * PI * scale).powi(2);
    (left * values * right).scale(norm)
}

/// Same sum as [`symplectic_transform`] evaluated by FFT on the conjugate grid
/// `grid.conjugate(scale)`.
///
/// With `eta_j = -L + j h` and `q_a = -Q + a dq`, `h dq = 2 pi scale / M`,
/// the kernel factors as `(-1)^(a+b) (-1)^(j+k) exp(-2 pi i j a / M) exp(+2 pi i k b / M)`:
/// modulate, forward FFT along the first axis, unnormalized inverse FFT
/// along the second, modulate again.
pub fn symplectic_fft(values: &DMatrix<Complex64>, grid: &PhaseGrid, scale: f64, out_axes: Axes) -> Result<(PhaseGrid, DMatrix<Complex64>)> {
    let out = grid.conjugate(scale, out_axes)?;
    let m = grid.points();
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut work = DMatrix::from_fn(m, m, |j, k| values[(j, k)] * sign(j + k));
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    for mut col in work.column_iter_mut() {
        let mut buf: Vec<Complex64> = col.iter().copied().collect();
        fwd.process(&mut buf);
        col.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for r in 0..m {
        for (k, slot) in buf.iter_mut().enumerate() {
            *slot = work[(r, k)];
        }
        inv.process(&mut buf);
        for (k, v) in buf.iter().enumerate() {
            work[(r, k)] = *v;
        }
    }
    let norm = grid.cell_area() / (2.0 * PI * scale).powi(2);
    let result = DMatrix::from_fn(m, m, |a, b| work[(a, b)] * (norm * sign(a + b)));
    Ok((out, result))
}

/// A real grid over `(q, p)` produced by a symplectic Fourier transform.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    pub grid: PhaseGrid,
    pub values: DMatrix<f64>,
    /// `max |Im| / max |Re|` that was discarded.
    pub imag_residue: f64,
}

impl RealGrid {
    /// `sum values * dq dp`.
    pub fn mass(&self) -> f64 {
        self.values.sum() * self.grid.cell_area()
    }

    /// Value at the node nearest to `(q, p)`.
    pub fn nearest(&self, q: f64, p: f64) -> f64 {
        let h = self.grid.spacing();
        let clamp = |x: f64| (((x + self.grid.extent()) / h).round().max(0.0) as usize).min(self.grid.points() - 1);
        self.values[(clamp(q), clamp(p))]
    }
}

/// Largest imaginary residue (relative to the peak real part) accepted by a
/// transform that must be real.
pub const IMAG_TOL: f64 = 1e-6;

pub(crate) fn realize(grid: PhaseGrid, complex: DMatrix<Complex64>, limit: f64) -> Result<RealGrid> {
    let peak = complex.iter().fold(0.0f64, |a, z| a.max(z.re.abs()));
    let imag = complex.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
    let residue = if peak > 0.0 { imag / peak } else { imag };
    if residue > limit {
        return Err(Error::ImaginaryResidue { residue, limit });
    }
    Ok(RealGrid {
        grid,
        values: complex.map(|z| z.re),
        imag_residue: residue,
    })
}

fn check_decay(chi: &CharFunction) -> Result<()> {
    let ratio = chi.boundary_ratio();
    if ratio > DECAY_TOL {
        return Err(Error::BoundaryDecay { ratio, limit: DECAY_TOL });
    }
    Ok(())
}

/// `W(q, p) = int d(eta) d(xi) / (2 pi hbar)^2 exp[-i(eta q - xi p)/hbar] chi(eta, xi)` on `out`.
pub fn wigner(chi: &CharFunction, out: &PhaseGrid) -> Result<RealGrid> {
    check_decay(chi)?;
    if out.axes() != Axes::QP {
        return Err(Error::GridMismatch("Wigner functions live on (q, p)".into()));
    }
    let w = symplectic_transform(chi.values(), chi.grid(), out, chi.hbar());
    realize(*out, w, IMAG_TOL)
}

/// [`wigner`] on the FFT-conjugate grid of `chi`.
pub fn wigner_fft(chi: &CharFunction) -> Result<RealGrid> {
    check_decay(chi)?;
    let (grid, w) = symplectic_fft(chi.values(), chi.grid(), chi.hbar(), Axes::QP)?;
    realize(grid, w, IMAG_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::fock_char;
    use crate::states::{coherent_state, fock_state, p_mixture, PMixtureSpec};

    fn grid() -> PhaseGrid {
        PhaseGrid::eta_xi(10.0, 64).unwrap()
    }

    #[test]
    fn fock_char_matches_laguerre_formula() {
        let g = grid();
        for m in 0..4 {
            let chi = forward(&fock_state(m, 16, 1.0).unwrap(), &g).unwrap();
            let expect = g.map(|e, x| Complex64::new(fock_char(m, (e * e + x * x) / 2.0), 0.0));
            assert!((chi.values() - expect).iter().all(|z| z.norm() < 1e-12));
            assert!(chi.invariants().holds(1e-12));
        }
    }

    #[test]
    fn gaussian_char_inverts_to_vacuum() {
        let g = PhaseGrid::eta_xi(12.0, 96).unwrap();
        let hbar = 0.7;
        let chi = CharFunction::from_fn(hbar, g, |e, x| Complex64::new((-(e * e + x * x) / (4.0 * hbar)).exp(), 0.0)).unwrap();
        let rec = inverse(&chi, 12).unwrap();
        let vac = fock_state(0, 12, hbar).unwrap();
        assert!((rec.rho.matrix() - vac.matrix()).norm() < 1e-9);
        assert!((rec.raw_trace - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_rejects_slow_decay() {
        let g = PhaseGrid::eta_xi(3.0, 32).unwrap();
        let chi = forward(&fock_state(0, 8, 1.0).unwrap(), &g).unwrap();
        assert!(matches!(inverse(&chi, 8), Err(Error::BoundaryDecay { .. })));
    }

    #[test]
    fn inverse_rejects_truncation_loss() {
        // a state living on levels up to 9 reconstructed in 4 levels
        let g = PhaseGrid::eta_xi(16.0, 128).unwrap();
        let chi = forward(&fock_state(9, 12, 1.0).unwrap(), &g).unwrap();
        assert!(matches!(inverse(&chi, 4), Err(Error::TruncationInadequate(_))));
    }

    #[test]
    fn mixture_char_matches_closed_form() {
        let hbar = 0.8;
        let spec = PMixtureSpec::new(vec![(0.6, -0.3, 0.25), (-0.2, 0.9, 0.75)]).unwrap();
        let rho = p_mixture(&spec, 32, hbar).unwrap();
        let g = grid();
        let chi = forward(&rho, &g).unwrap();
        let expect = g.map(|e, x| {
            spec.atoms()
                .iter()
                .map(|&(q, p, w)| w * Complex64::from_polar((-(x * x + e * e) / (4.0 * hbar)).exp(), (q * e - p * x) / hbar))
                .sum::<Complex64>()
        });
        assert!((chi.values() - expect).iter().all(|z| z.norm() < 1e-8));
    }

    #[test]
    fn wigner_vacuum_is_positive_gaussian() {
        let hbar = 1.0;
        let chi = forward(&fock_state(0, 8, hbar).unwrap(), &PhaseGrid::eta_xi(12.0, 64).unwrap()).unwrap();
        let out = PhaseGrid::qp(5.0, 40).unwrap();
        let w = wigner(&chi, &out).unwrap();
        let expect = out.map(|q, p| (-(q * q + p * p) / hbar).exp() / (PI * hbar));
        assert!((&w.values - expect).abs().max() < 1e-12);
        assert!(w.values.min() > -1e-15);
        assert!(w.imag_residue < 1e-12);
    }

    #[test]
    fn wigner_fft_matches_matrix_dft() {
        let hbar = 0.5;
        let chi = forward(&coherent_state(0.5, -0.3, 24, hbar).unwrap(), &PhaseGrid::eta_xi(8.0, 64).unwrap()).unwrap();
        let fast = wigner_fft(&chi).unwrap();
        let slow = wigner(&chi, &fast.grid).unwrap();
        assert!((&fast.values - &slow.values).abs().max() < 1e-12);
        assert!((fast.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wigner_coherent_centered() {
        let hbar = 1.0;
        let (q0, p0) = (1.0, -0.5);
        let chi = forward(&coherent_state(q0, p0, 24, hbar).unwrap(), &PhaseGrid::eta_xi(12.0, 64).unwrap()).unwrap();
        let w = wigner(&chi, &PhaseGrid::qp(4.0, 32).unwrap()).unwrap();
        assert!((w.nearest(q0, p0) - 1.0 / (PI * hbar)).abs() < 1e-10);
        assert!(w.values.min() > -1e-12);
    }
}
