//! Uniform square grids over a phase-space plane and spectral tools on them.
//!
//! A grid with extent `L` and `M` points per axis samples the nodes
//! `x_k = -L + k h`, `h = 2L / M`, `k = 0..M`. The origin is node `M / 2`.
//! Values are stored in `DMatrix` with row index along the first axis
//! (`eta` or `q`) and column index along the second (`xi` or `p`).
//!
//! Fourier conventions: a column (or row) is expanded as
//! `f(x) = sum_k c_k exp(i k x)` with wavenumbers `k = 2 pi j / (M h)` for
//! `j` in `[-M/2, M/2)`. Multipliers evaluated at the Nyquist wavenumber are
//! averaged over `+-k_N`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axes {
    /// Group translation coordinates, the domain of characteristic functions.
    EtaXi,
    /// Phase-space coordinates, the domain of densities.
    QP,
}

impl Axes {
    pub fn labels(self) -> [&'static str; 2] {
        match self {
            Axes::EtaXi => ["eta", "xi"],
            Axes::QP => ["q", "p"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    extent: f64,
    points: usize,
    axes: Axes,
}

impl PhaseGrid {
    pub fn new(extent: f64, points: usize, axes: Axes) -> Result<Self> {
        require_positive("extent", extent)?;
        if points < 8 || points % 2 != 0 {
            return Err(invalid("points", format!("must be even and >= 8, got {points}")));
        }
        Ok(Self { extent, points, axes })
    }

    pub fn eta_xi(extent: f64, points: usize) -> Result<Self> {
        Self::new(extent, points, Axes::EtaXi)
    }

    pub fn qp(extent: f64, points: usize) -> Result<Self> {
        Self::new(extent, points, Axes::QP)
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn axes(&self) -> Axes {
        self.axes
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    pub fn coord(&self, k: usize) -> f64 {
        -self.extent + k as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.coord(k)).collect()
    }

    pub fn origin_index(&self) -> usize {
        self.points / 2
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing().powi(2)
    }

    /// Index of the node at `x`, if `x` is a node to within `1e-9 h`.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let h = self.spacing();
        let k = ((x + self.extent) / h).round();
        if k < 0.0 || k >= self.points as f64 {
            return None;
        }
        if (self.coord(k as usize) - x).abs() <= 1e-9 * h.max(1.0) {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Whether `x` lies in the sampled interval `[-L, L - h]`.
    pub fn covers(&self, x: f64) -> bool {
        x >= -self.extent - 1e-12 && x <= self.extent - self.spacing() + 1e-12
    }

    /// Same node layout with coordinates multiplied by `factor`.
    pub fn scaled(&self, factor: f64, axes: Axes) -> Result<Self> {
        Self::new(self.extent * factor, self.points, axes)
    }

    /// The grid on which an FFT of this grid's samples lands for the kernel
    /// `exp(-i x y / scale)`: spacing `2 pi scale / (M h)`, extent `M pi scale / (2 L)`.
    pub fn conjugate(&self, scale: f64, axes: Axes) -> Result<Self> {
        Self::new(self.points as f64 * PI * scale / (2.0 * self.extent), self.points, axes)
    }

    /// Angular wavenumber of FFT bin `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        let m = self.points as isize;
        let signed = if (j as isize) < m / 2 { j as isize } else { j as isize - m };
        2.0 * PI * signed as f64 / (self.points as f64 * self.spacing())
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn same_nodes(&self, other: &Self) -> bool {
        self.points == other.points && (self.extent - other.extent).abs() <= 1e-12 * self.extent
    }

    pub fn map<T, F>(&self, f: F) -> DMatrix<T>
    where
        T: nalgebra::Scalar,
        F: Fn(f64, f64) -> T,
    {
        let c = self.coords();
        DMatrix::from_fn(self.points, self.points, |i, j| f(c[i], c[j]))
    }
}

/// `max over the outer ring / max over the grid` of `|values|`.
pub fn boundary_ratio<T>(values: &DMatrix<T>) -> f64
where
    T: nalgebra::Scalar + Copy + Into<Complex64>,
{
    let (r, c) = values.shape();
    let mut peak: f64 = 0.0;
    let mut edge: f64 = 0.0;
    for j in 0..c {
        for i in 0..r {
            let v = values[(i, j)].into().norm();
            peak = peak.max(v);
            if i == 0 || j == 0 || i == r - 1 || j == c - 1 {
                edge = edge.max(v);
            }
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        edge / peak
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    First,
    Second,
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
}

fn plans(len: usize) -> Plans {
    let mut planner = FftPlanner::new();
    Plans {
        forward: planner.plan_fft_forward(len),
        backward: planner.plan_fft_inverse(len),
    }
}

/// Transform every line along `axis` to Fourier space, multiply bin `j` of
/// line `line` by `multiplier(line, k_j)`, and transform back.
pub fn apply_axis_multiplier<F>(values: &mut DMatrix<Complex64>, grid: &PhaseGrid, axis: Axis, multiplier: F)
where
    F: Fn(usize, f64) -> Complex64,
{
    let m = grid.points();
    let p = plans(m);
    let norm = 1.0 / m as f64;
    let nyq = m / 2;
    let k_nyq = grid.nyquist();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for line in 0..m {
        for (t, slot) in buf.iter_mut().enumerate() {
            *slot = match axis {
                Axis::First => values[(t, line)],
                Axis::Second => values[(line, t)],
            };
        }
        p.forward.process(&mut buf);
        for (j, slot) in buf.iter_mut().enumerate() {
            let factor = if j == nyq {
                0.5 * (multiplier(line, k_nyq) + multiplier(line, -k_nyq))
            } else {
                multiplier(line, grid.wavenumber(j))
            };
            *slot *= factor * norm;
        }
        p.backward.process(&mut buf);
        for (t, v) in buf.iter().enumerate() {
            match axis {
                Axis::First => values[(t, line)] = *v,
                Axis::Second => values[(line, t)] = *v,
            }
        }
    }
}

/// Spectral translation: `f(x, y) -> f(x + shift(y), y)` for `Axis::First`,
/// `f(x, y) -> f(x, y + shift(x))` for `Axis::Second`.
pub fn translate_axis<S>(values: &mut DMatrix<Complex64>, grid: &PhaseGrid, axis: Axis, shift: S)
where
    S: Fn(f64) -> f64,
{
    let coords = grid.coords();
    let shifts: Vec<f64> = coords.iter().map(|&c| shift(c)).collect();
    apply_axis_multiplier(values, grid, axis, |line, k| {
        Complex64::from_polar(1.0, k * shifts[line])
    });
}

/// Band-limited trigonometric interpolant of gridded samples.
#[derive(Debug, Clone)]
pub struct SpectralInterpolant {
    grid: PhaseGrid,
    coefficients: DMatrix<Complex64>,
}

impl SpectralInterpolant {
    pub fn new(values: &DMatrix<Complex64>, grid: &PhaseGrid) -> Self {
        let m = grid.points();
        let p = plans(m);
        let mut coeffs = values.clone();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for axis in [Axis::First, Axis::Second] {
            for line in 0..m {
                for (t, slot) in buf.iter_mut().enumerate() {
                    *slot = match axis {
                        Axis::First => coeffs[(t, line)],
                        Axis::Second => coeffs[(line, t)],
                    };
                }
                p.forward.process(&mut buf);
                for (t, v) in buf.iter().enumerate() {
                    match axis {
                        Axis::First => coeffs[(t, line)] = *v,
                        Axis::Second => coeffs[(line, t)] = *v,
                    }
                }
            }
        }
        coeffs.scale_mut(1.0 / (m * m) as f64);
        Self {
            grid: *grid,
            coefficients: coeffs,
        }
    }

    fn basis(&self, x: f64) -> Vec<Complex64> {
        let m = self.grid.points();
        let offset = x + self.grid.extent();
        (0..m)
            .map(|j| {
                if j == m / 2 {
                    let k = self.grid.nyquist();
                    Complex64::new((k * offset).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, self.grid.wavenumber(j) * offset)
                }
            })
            .collect()
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let bx = self.basis(x);
        let by = self.basis(y);
        let m = self.grid.points();
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..m {
            let mut col = Complex64::new(0.0, 0.0);
            for a in 0..m {
                col += self.coefficients[(a, b)] * bx[a];
            }
            acc += col * by[b];
        }
        acc
    }
}

fn fft2(values: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let m = values.nrows();
    let p = plans(m);
    let mut out = values.clone();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for axis in [Axis::First, Axis::Second] {
        for line in 0..m {
            for (t, slot) in buf.iter_mut().enumerate() {
                *slot = match axis {
                    Axis::First => out[(t, line)],
                    Axis::Second => out[(line, t)],
                };
            }
            p.forward.process(&mut buf);
            for (t, v) in buf.iter().enumerate() {
                match axis {
                    Axis::First => out[(t, line)] = *v,
                    Axis::Second => out[(line, t)] = *v,
                }
            }
        }
    }
    out
}

/// Largest Fourier coefficient with `|j| >= 3M/8` on either axis, relative to
/// the largest coefficient. Small values mean the samples resolve the function.
pub fn spectral_tail(values: &DMatrix<Complex64>) -> f64 {
    let m = values.nrows();
    let spec = fft2(values);
    let outer = |j: usize| {
        let signed = if j < m / 2 { j } else { m - j };
        signed >= 3 * m / 8
    };
    let mut peak: f64 = 0.0;
    let mut tail: f64 = 0.0;
    for j in 0..m {
        for l in 0..m {
            let v = spec[(j, l)].norm();
            peak = peak.max(v);
            if outer(j) || outer(l) {
                tail = tail.max(v);
            }
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        tail / peak
    }
}

/// `f(eta, xi) -> f(eta, xi + x eta)`
fn shear_lower(values: &mut DMatrix<Complex64>, grid: &PhaseGrid, x: f64) {
    if x != 0.0 {
        translate_axis(values, grid, Axis::Second, |eta| x * eta);
    }
}

/// `f(eta, xi) -> f(eta + b xi, xi)`
fn shear_upper(values: &mut DMatrix<Complex64>, grid: &PhaseGrid, b: f64) {
    if b != 0.0 {
        translate_axis(values, grid, Axis::First, |xi| b * xi);
    }
}

/// `f(z) -> f(-z)`; node `k` maps to node `M - k`, node 0 to itself by periodicity.
fn reflect(values: &mut DMatrix<Complex64>) {
    let m = values.nrows();
    let src = values.clone();
    for i in 0..m {
        for j in 0..m {
            values[(i, j)] = src[((m - i) % m, (m - j) % m)];
        }
    }
}

/// Replaces `f` by `f o B` for a unit-determinant matrix `B = [[a, b], [c, d]]`,
/// written as a product of three shears, each a spectral translation.
///
/// `B = L(y) U(b) L(x)` with `x = (a - 1) / b`, `y = (d - 1) / b` when `b` is
/// large enough, `B = U(y) L(c) U(x)` with `y = (a - 1) / c`, `x = (d - 1) / c`
/// when `c` is; near-diagonal `B` is first multiplied by a unit shear, and
/// `B` with negative trace is split off as a reflection.
pub fn pullback_linear(values: &mut DMatrix<Complex64>, grid: &PhaseGrid, matrix: [[f64; 2]; 2]) -> Result<()> {
    let [[a, b], [c, d]] = matrix;
    let det = a * d - b * c;
    if !det.is_finite() || (det - 1.0).abs() > 1e-9 {
        return Err(invalid("matrix", format!("determinant {det} is not 1")));
    }
    const PIVOT: f64 = 0.1;
    if (a - 1.0).abs() < 1e-15 && b == 0.0 && c == 0.0 && (d - 1.0).abs() < 1e-15 {
        return Ok(());
    }
    if a + d < 0.0 {
        // B = (-I)(-B); the reflection is exact on the grid
        reflect(values);
        return pullback_linear(values, grid, [[-a, -b], [-c, -d]]);
    }
    if b.abs() >= c.abs() && b.abs() > PIVOT {
        shear_lower(values, grid, (d - 1.0) / b);
        shear_upper(values, grid, b);
        shear_lower(values, grid, (a - 1.0) / b);
    } else if c.abs() > PIVOT {
        shear_upper(values, grid, (a - 1.0) / c);
        shear_lower(values, grid, c);
        shear_upper(values, grid, (d - 1.0) / c);
    } else if a.abs() >= d.abs() {
        // B = (B U(1)) U(-1)
        pullback_linear(values, grid, [[a, a + b], [c, c + d]])?;
        shear_upper(values, grid, -1.0);
    } else {
        // B = (B L(1)) L(-1)
        pullback_linear(values, grid, [[a + b, b], [c + d, d]])?;
        shear_lower(values, grid, -1.0);
    }
    Ok(())
}
