//! Observables as functions on the group and their operator images.
//!
//! An observable function `F(s, eta, xi) = exp(i hbar s) f(eta, xi)` pairs
//! with a physical state `exp(-i hbar s) chi(eta, xi)`; the central integral
//! collapses and only `f` is sampled:
//!
//! ```text
//! A_F     = (1 / 2 pi hbar) int f(eta, xi) D(alpha)
//! f_A     = tr[A D(alpha)^dag]
//! <F>_chi = (1 / 2 pi hbar) int chi(eta, xi) f(eta, xi) = tr[rho A_F]
//! ```

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::climit::{ClassicalChar, ClassicalDensity};
use crate::error::{require_positive, Error, Result};
use crate::grid::{boundary_ratio, Axes, PhaseGrid};
use crate::linalg::CMatrix;
use crate::transform::{
    integrate_against_displacement, invariants_of, realize, symplectic_transform, trace_against_displacement, CharFunction, RealGrid,
    DECAY_TOL,
};

/// Tolerance of the reality condition `f(-z) = conj f(z)`.
pub const REALITY_TOL: f64 = 1e-8;

/// Samples of `f(eta, xi)` for `F(s, eta, xi) = exp(i hbar s) f(eta, xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableFunction {
    hbar: f64,
    grid: PhaseGrid,
    values: DMatrix<Complex64>,
}

impl ObservableFunction {
    /// Checks the reality condition to [`REALITY_TOL`] relative to the peak.
    pub fn new(hbar: f64, grid: PhaseGrid, values: DMatrix<Complex64>) -> Result<Self> {
        let f = Self::unchecked(hbar, grid, values)?;
        let defect = f.reality_defect();
        if defect > REALITY_TOL * f.peak().max(1.0) {
            return Err(Error::RealityViolation { defect });
        }
        Ok(f)
    }

    fn unchecked(hbar: f64, grid: PhaseGrid, values: DMatrix<Complex64>) -> Result<Self> {
        require_positive("hbar", hbar)?;
        if grid.axes() != Axes::EtaXi {
            return Err(Error::GridMismatch("observable functions live on (eta, xi)".into()));
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

    fn peak(&self) -> f64 {
        self.values.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// `max |f(-z) - conj f(z)|` over grid-symmetric nodes.
    pub fn reality_defect(&self) -> f64 {
        invariants_of(&self.values, &self.grid).symmetry_defect
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { values: self.values.map(|z| z * a), ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(&other.grid, other.hbar)?;
        Ok(Self { values: &self.values + &other.values, ..self.clone() })
    }

    fn compatible(&self, grid: &PhaseGrid, hbar: f64) -> Result<()> {
        if !self.grid.same_nodes(grid) {
            return Err(Error::GridMismatch("observable and state use different grids".into()));
        }
        if (self.hbar - hbar).abs() > 1e-14 * hbar {
            return Err(Error::GridMismatch(format!("hbar {} vs {}", self.hbar, hbar)));
        }
        Ok(())
    }
}

/// `f_A = tr[A D(alpha)^dag]`; satisfies the reality condition iff `A` is Hermitian.
pub fn from_operator(a: &CMatrix, grid: &PhaseGrid, hbar: f64) -> Result<ObservableFunction> {
    if grid.axes() != Axes::EtaXi {
        return Err(Error::GridMismatch("observable functions live on (eta, xi)".into()));
    }
    // tr[A D^dag] = conj tr[A^dag D]
    let values = trace_against_displacement(&a.adjoint(), grid, hbar)?.map(|z| z.conj());
    ObservableFunction::unchecked(hbar, *grid, values)
}

/// `A_F = (1 / 2 pi hbar) int f D(alpha)` in `dim` levels.
pub fn to_operator(f: &ObservableFunction, dim: usize) -> Result<CMatrix> {
    let ratio = boundary_ratio(&f.values);
    if ratio > DECAY_TOL {
        return Err(Error::BoundaryDecay { ratio, limit: DECAY_TOL });
    }
    integrate_against_displacement(&f.values, &f.grid, f.hbar, dim, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanValue {
    pub value: f64,
    pub imaginary_residue: f64,
}

/// `<F> = (h^2 / 2 pi hbar) sum chi f`.
pub fn mean(f: &ObservableFunction, chi: &CharFunction) -> Result<MeanValue> {
    f.compatible(chi.grid(), chi.hbar())?;
    let product = chi.values().component_mul(&f.values);
    let ratio = boundary_ratio(&product);
    if ratio > DECAY_TOL {
        return Err(Error::BoundaryDecay { ratio, limit: DECAY_TOL });
    }
    let total: Complex64 = product.iter().sum::<Complex64>() * (chi.grid().cell_area() / (2.0 * PI * chi.hbar()));
    Ok(MeanValue {
        value: total.re,
        imaginary_residue: total.im.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean_q: f64,
    pub mean_p: f64,
    pub q2: f64,
    pub p2: f64,
    /// `<(qp + pq) / 2>`
    pub qp_sym: f64,
    pub var_q: f64,
    pub var_p: f64,
    /// `var_q var_p - hbar^2 / 4`, nonnegative for states
    pub uncertainty_margin: f64,
    /// Largest change of any moment between the plain `h` stencil and the
    /// extrapolated value.
    pub stencil_gap: f64,
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

/// `[d_eta, d_xi, d_eta^2, d_xi^2, d_eta d_xi]` of `chi` at the origin.
fn derivatives(chi: &CharFunction, stride: usize) -> [Complex64; 5] {
    let o = chi.grid().origin_index() as isize;
    let h = chi.grid().spacing() * stride as f64;
    let s = stride as isize;
    let v = |a: isize, b: isize| chi.values()[((o + a * s) as usize, (o + b * s) as usize)];
    let mut d = [Complex64::new(0.0, 0.0); 5];
    for (k, (&w1, &w2)) in D1.iter().zip(&D2).enumerate() {
        let a = k as isize - 2;
        d[0] += v(a, 0) * w1;
        d[1] += v(0, a) * w1;
        d[2] += v(a, 0) * w2;
        d[3] += v(0, a) * w2;
        for (l, &u1) in D1.iter().enumerate() {
            d[4] += v(a, l as isize - 2) * (w1 * u1);
        }
    }
    [d[0] / h, d[1] / h, d[2] / (h * h), d[3] / (h * h), d[4] / (h * h)]
}

/// First and second quadrature moments from derivatives of `chi` at the
/// origin: `<q> = -i hbar d_eta chi`, `<p> = i hbar d_xi chi`,
/// `<q^2> = -hbar^2 d_eta^2 chi`, `<p^2> = -hbar^2 d_xi^2 chi`,
/// `<(qp+pq)/2> = hbar^2 d_eta d_xi chi`.
///
/// Five-point stencils at spacings `h`, `2h` and (when the grid allows) `4h`
/// are combined by Richardson extrapolation in powers `h^4, h^6`.
pub fn quadrature_moments(chi: &CharFunction) -> Result<Moments> {
    let m = chi.grid().points();
    let o = chi.grid().origin_index();
    if o < 4 || o + 4 >= m {
        return Err(Error::StencilOutOfRange { points: m });
    }
    let levels = if o >= 8 && o + 8 < m { 3 } else { 2 };
    let mut table: Vec<[Complex64; 5]> = (0..levels).map(|k| derivatives(chi, 1 << k)).collect();
    let plain = table[0];
    for (round, factor) in [16.0, 64.0].into_iter().enumerate().take(levels - 1) {
        for k in 0..levels - 1 - round {
            for c in 0..5 {
                table[k][c] = (table[k][c] * factor - table[k + 1][c]) / (factor - 1.0);
            }
        }
    }
    let hb = chi.hbar();
    let i = Complex64::i();
    let moments = |d: &[Complex64; 5]| {
        [
            (-i * hb * d[0]).re,
            (i * hb * d[1]).re,
            (-hb * hb * d[2]).re,
            (-hb * hb * d[3]).re,
            (hb * hb * d[4]).re,
        ]
    };
    let best = moments(&table[0]);
    let gap = best.iter().zip(&moments(&plain)).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let [mean_q, mean_p, q2, p2, qp_sym] = best;
    let var_q = q2 - mean_q * mean_q;
    let var_p = p2 - mean_p * mean_p;
    Ok(Moments {
        mean_q,
        mean_p,
        q2,
        p2,
        qp_sym,
        var_q,
        var_p,
        uncertainty_margin: var_q * var_p - hb * hb / 4.0,
        stencil_gap: gap,
    })
}

/// A function `F(eta, xi)` on `R^2` playing the role of an observable in the
/// classical limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalObservable {
    grid: PhaseGrid,
    values: DMatrix<Complex64>,
}

impl ClassicalObservable {
    pub fn new(grid: PhaseGrid, values: DMatrix<Complex64>) -> Result<Self> {
        if grid.axes() != Axes::EtaXi {
            return Err(Error::GridMismatch("observable functions live on (eta, xi)".into()));
        }
        let m = grid.points();
        if values.shape() != (m, m) {
            return Err(Error::GridMismatch(format!("values {:?} vs grid {m}x{m}", values.shape())));
        }
        let defect = invariants_of(&values, &grid).symmetry_defect;
        let peak = values.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if defect > REALITY_TOL * peak.max(1.0) {
            return Err(Error::RealityViolation { defect });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(grid: PhaseGrid, f: F) -> Result<Self> {
        Self::new(grid, grid.map(f))
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }
}

/// `A_F(q, p) = int d(eta) d(xi) / (2 pi)^2 F(eta, xi) exp[-i(eta q - xi p)]` on `out`.
pub fn classical_observable(f: &ClassicalObservable, out: &PhaseGrid) -> Result<RealGrid> {
    if out.axes() != Axes::QP {
        return Err(Error::GridMismatch("classical observables live on (q, p)".into()));
    }
    let ratio = boundary_ratio(&f.values);
    if ratio > DECAY_TOL {
        return Err(Error::BoundaryDecay { ratio, limit: DECAY_TOL });
    }
    realize(*out, symplectic_transform(&f.values, &f.grid, out, 1.0), REALITY_TOL)
}

/// `int A_F d(mu)` on the density grid.
pub fn classical_mean(a: &RealGrid, mu: &ClassicalDensity) -> Result<f64> {
    if !a.grid.same_nodes(mu.grid()) {
        return Err(Error::GridMismatch("observable and density use different grids".into()));
    }
    Ok(a.values.component_mul(mu.values()).sum() * a.grid.cell_area())
}

/// The same average computed on the `(eta, xi)` side:
/// `(1 / (2 pi)^2) int F(z) cc(-z) = (1 / (2 pi)^2) int F(z) conj cc(z)`.
pub fn classical_mean_direct(f: &ClassicalObservable, cc: &ClassicalChar) -> Result<MeanValue> {
    if !f.grid.same_nodes(cc.grid()) {
        return Err(Error::GridMismatch("observable and characteristic function use different grids".into()));
    }
    let total: Complex64 = f
        .values
        .iter()
        .zip(cc.values().iter())
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        * (f.grid.cell_area() / (2.0 * PI).powi(2));
    Ok(MeanValue {
        value: total.re,
        imaginary_residue: total.im.abs(),
    })
}
