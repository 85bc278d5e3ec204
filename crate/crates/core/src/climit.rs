//! Rescaled characteristic functions and the `hbar -> 0` limit.
//!
//! For a family of states `rho_hbar`, the rescaled function
//! `chi_hbar(hbar eta, hbar xi)` is sampled on one fixed `(eta, xi)` grid for
//! a decreasing schedule of `hbar`. A limit is detected as sup-norm
//! convergence on that grid; the limit is a characteristic function on `R^2`
//! and its Fourier transform
//!
//! ```text
//! mu(q, p) = int d(eta) d(xi) / (2 pi)^2 cc(eta, xi) exp[-i(eta q - xi p)]
//! ```
//!
//! is the classical phase-space measure.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{boundary_ratio, Axes, PhaseGrid};
use crate::positivity::{GridLookup, GroupFunction};
use crate::special::fock_char;
use crate::states::{DensityMatrix, PMixtureSpec};
use crate::transform::{forward, invariants_of, realize, symplectic_transform, CharInvariants};

/// Tolerance of the classical characteristic-function invariants.
pub const CLASSICAL_TOL: f64 = 1e-8;
/// Default sup-norm threshold for declaring convergence.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-3;
/// `sup |cc - 1|` below which a limit is reported as a point mass at the origin.
pub const ATOMIC_TOL: f64 = 1e-6;
/// Negative density values down to `-REPAIR_BAND * peak` are clipped.
pub const REPAIR_BAND: f64 = 1e-4;
/// Boundary decay required for a regular inversion.
pub const REGULAR_DECAY: f64 = 1e-4;

/// A characteristic function on `R^2` sampled on an `(eta, xi)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalChar {
    grid: PhaseGrid,
    values: DMatrix<Complex64>,
}

impl ClassicalChar {
    /// Checks `cc(0) = 1` and `cc(-z) = conj cc(z)` to [`CLASSICAL_TOL`].
    pub fn new(grid: PhaseGrid, values: DMatrix<Complex64>) -> Result<Self> {
        if grid.axes() != Axes::EtaXi {
            return Err(Error::GridMismatch("classical characteristic functions live on (eta, xi)".into()));
        }
        let m = grid.points();
        if values.shape() != (m, m) {
            return Err(Error::GridMismatch(format!("values {:?} vs grid {m}x{m}", values.shape())));
        }
        let inv = invariants_of(&values, &grid);
        if inv.origin_defect > CLASSICAL_TOL || inv.symmetry_defect > CLASSICAL_TOL {
            return Err(invalid(
                "cc",
                format!("|cc(0)-1| = {:.3e}, symmetry defect {:.3e}", inv.origin_defect, inv.symmetry_defect),
            ));
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

    pub fn invariants(&self) -> CharInvariants {
        invariants_of(&self.values, &self.grid)
    }

    /// `sup |self - other|` on a shared grid.
    pub fn sup_distance(&self, other: &ClassicalChar) -> Result<f64> {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::GridMismatch("sup distance needs identical grids".into()));
        }
        Ok(sup_diff(&self.values, &other.values))
    }

    pub fn as_group_function(&self) -> impl GroupFunction + '_ {
        ClassicalView { lookup: GridLookup::new(&self.grid, &self.values) }
    }
}

struct ClassicalView<'a> {
    lookup: GridLookup<'a>,
}

impl GroupFunction for ClassicalView<'_> {
    fn grid(&self) -> &PhaseGrid {
        self.lookup.grid()
    }

    fn coordinate_scale(&self) -> f64 {
        1.0
    }

    fn sample(&self, x: f64, y: f64) -> Result<Complex64> {
        self.lookup.at(x, y)
    }
}

fn sup_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// A nonnegative phase-space density on a `(q, p)` grid with unit mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalDensity {
    #[serde(skip)]
    grid: PhaseGrid,
    #[serde(skip)]
    values: DMatrix<f64>,
    /// Mass before renormalization.
    pub raw_mass: f64,
    /// Most negative value relative to the peak, before clipping.
    pub min_relative: f64,
    pub repaired: bool,
}

impl ClassicalDensity {
    /// Applies the repair policy: values down to `-REPAIR_BAND * peak` are
    /// clipped and the mass restored; anything more negative is an error.
    /// A raw mass off by more than `mass_tol` is reported as an inadequate grid.
    pub fn from_values(grid: PhaseGrid, values: DMatrix<f64>, mass_tol: f64) -> Result<Self> {
        if grid.axes() != Axes::QP {
            return Err(Error::GridMismatch("densities live on (q, p)".into()));
        }
        let m = grid.points();
        if values.shape() != (m, m) {
            return Err(Error::GridMismatch(format!("values {:?} vs grid {m}x{m}", values.shape())));
        }
        let peak = values.max();
        if !(peak > 0.0) {
            return Err(invalid("density", "no positive mass"));
        }
        let min_relative = values.min() / peak;
        if min_relative < -REPAIR_BAND {
            return Err(Error::Negativity { minimum: min_relative, limit: -REPAIR_BAND });
        }
        let raw_mass = values.sum() * grid.cell_area();
        if (raw_mass - 1.0).abs() > mass_tol {
            return Err(Error::GridInadequate(format!("density carries mass {raw_mass:.9} on the output grid")));
        }
        let repaired = min_relative < 0.0;
        let clipped = values.map(|v| v.max(0.0));
        let total = clipped.sum() * grid.cell_area();
        Ok(Self {
            grid,
            values: clipped / total,
            raw_mass,
            min_relative,
            repaired,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.sum() * self.grid.cell_area()
    }

    /// Mass of the nodes where `region(q, p)` holds.
    pub fn mass_where<F: Fn(f64, f64) -> bool>(&self, region: F) -> f64 {
        let c = self.grid.coords();
        let mut total = 0.0;
        for i in 0..c.len() {
            for j in 0..c.len() {
                if region(c[i], c[j]) {
                    total += self.values[(i, j)];
                }
            }
        }
        total * self.grid.cell_area()
    }

    /// `sum f(q, p) mu(q, p) dq dp`.
    pub fn expectation<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let c = self.grid.coords();
        let mut total = 0.0;
        for i in 0..c.len() {
            for j in 0..c.len() {
                total += f(c[i], c[j]) * self.values[(i, j)];
            }
        }
        total * self.grid.cell_area()
    }
}

/// A family of states indexed by `hbar`, evaluated in rescaled coordinates.
pub trait StateFamily: Sync {
    fn label(&self) -> String;

    /// `chi_hbar(hbar eta, hbar xi)` at the nodes of `grid`.
    fn rescaled(&self, hbar: f64, grid: &PhaseGrid) -> Result<DMatrix<Complex64>>;
}

/// Coherent states at the atoms of `spec`, mixed with the atom weights.
#[derive(Debug, Clone)]
pub struct CoherentMixture(pub PMixtureSpec);

impl StateFamily for CoherentMixture {
    fn label(&self) -> String {
        format!("coherent mixture of {} atoms", self.0.atoms().len())
    }

    fn rescaled(&self, hbar: f64, grid: &PhaseGrid) -> Result<DMatrix<Complex64>> {
        crate::error::require_positive("hbar", hbar)?;
        Ok(grid.map(|e, x| {
            let envelope = (-hbar * (e * e + x * x) / 4.0).exp();
            self.0
                .atoms()
                .iter()
                .map(|&(q, p, w)| Complex64::from_polar(w * envelope, q * e - p * x))
                .sum()
        }))
    }
}

/// The Fock state `m` at every `hbar`.
#[derive(Debug, Clone, Copy)]
pub struct FixedFock(pub usize);

impl StateFamily for FixedFock {
    fn label(&self) -> String {
        format!("Fock state m = {}", self.0)
    }

    fn rescaled(&self, hbar: f64, grid: &PhaseGrid) -> Result<DMatrix<Complex64>> {
        crate::error::require_positive("hbar", hbar)?;
        Ok(grid.map(|e, x| Complex64::new(fock_char(self.0, hbar * (e * e + x * x) / 2.0), 0.0)))
    }
}

/// Fock states at fixed energy: `m = round(energy / hbar)`.
#[derive(Debug, Clone, Copy)]
pub struct FockShell {
    pub energy: f64,
}

impl FockShell {
    pub fn level(&self, hbar: f64) -> usize {
        (self.energy / hbar).round() as usize
    }
}

impl StateFamily for FockShell {
    fn label(&self) -> String {
        format!("Fock shell at hbar m = {}", self.energy)
    }

    fn rescaled(&self, hbar: f64, grid: &PhaseGrid) -> Result<DMatrix<Complex64>> {
        crate::error::require_positive("hbar", hbar)?;
        if !(self.energy > 0.0) {
            return Err(invalid("energy", "must be positive"));
        }
        FixedFock(self.level(hbar)).rescaled(hbar, grid)
    }
}

/// Any state constructor, transformed numerically on the scaled grid.
pub struct MatrixFamily<F> {
    pub label: String,
    pub build: F,
}

impl<F> StateFamily for MatrixFamily<F>
where
    F: Fn(f64) -> Result<DensityMatrix> + Sync,
{
    fn label(&self) -> String {
        self.label.clone()
    }

    fn rescaled(&self, hbar: f64, grid: &PhaseGrid) -> Result<DMatrix<Complex64>> {
        let rho = (self.build)(hbar)?;
        let chi = forward(&rho, &grid.scaled(hbar, Axes::EtaXi)?)?;
        Ok(chi.into_values())
    }
}

/// Multiplies another family by `exp(i eta / hbar)`, a factor with no limit.
pub struct PhaseInjected<S>(pub S);

impl<S: StateFamily> StateFamily for PhaseInjected<S> {
    fn label(&self) -> String {
        format!("{} with phase exp(i eta / hbar)", self.0.label())
    }

    fn rescaled(&self, hbar: f64, grid: &PhaseGrid) -> Result<DMatrix<Complex64>> {
        let mut v = self.0.rescaled(hbar, grid)?;
        let c = grid.coords();
        for i in 0..c.len() {
            let phase = Complex64::from_polar(1.0, c[i] / hbar);
            for j in 0..c.len() {
                v[(i, j)] *= phase;
            }
        }
        Ok(v)
    }
}

pub fn rescaled_char(family: &dyn StateFamily, hbar: f64, grid: &PhaseGrid) -> Result<ClassicalChar> {
    ClassicalChar::new(*grid, family.rescaled(hbar, grid)?)
}

/// Geometric schedule `start, start r, start r^2, ...`.
pub fn geometric_schedule(start: f64, ratio: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 3 {
        return Err(invalid("schedule", "need start > 0, 0 < ratio < 1 and at least 3 points"));
    }
    Ok((0..count).map(|k| start * ratio.powi(k as i32)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub family: String,
    pub schedule: Vec<f64>,
    /// `sup |cc_{k+1} - cc_k|` for consecutive schedule points.
    pub sup_differences: Vec<f64>,
    /// Ratios of consecutive differences.
    pub ratios: Vec<f64>,
    pub threshold: f64,
    pub converged: bool,
    /// `sup |extrapolated - last|`.
    pub extrapolation_gap: f64,
}

#[derive(Debug, Clone)]
pub struct LimitResult {
    /// Iterate at the smallest `hbar`.
    pub last: ClassicalChar,
    /// Pointwise polynomial extrapolation of all iterates to `hbar = 0`.
    pub extrapolated: ClassicalChar,
    pub report: ConvergenceReport,
}

/// Evaluate `family` along `schedule` and test for a sup-norm limit.
///
/// Converged means the successive differences decrease monotonically and the
/// last is below `threshold`; a failed test is reported, not raised.
pub fn limit_extrapolate(family: &dyn StateFamily, schedule: &[f64], grid: &PhaseGrid, threshold: f64) -> Result<LimitResult> {
    if schedule.len() < 3 {
        return Err(invalid("schedule", "need at least 3 points"));
    }
    if schedule.iter().any(|&h| !(h > 0.0)) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("schedule", "must be positive and strictly decreasing"));
    }
    let iterates: Vec<Result<ClassicalChar>> = schedule.par_iter().map(|&h| rescaled_char(family, h, grid)).collect();
    let iterates: Vec<ClassicalChar> = iterates.into_iter().collect::<Result<_>>()?;
    let diffs: Vec<f64> = iterates.windows(2).map(|w| sup_diff(&w[0].values, &w[1].values)).collect();
    let ratios: Vec<f64> = diffs.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect();
    let monotone = diffs.windows(2).all(|w| w[1] <= w[0]);
    let converged = monotone && *diffs.last().unwrap() < threshold;
    let extrapolated = neville_to_zero(schedule, &iterates);
    let last = iterates.into_iter().last().unwrap();
    let extrapolated = ClassicalChar::new(*grid, extrapolated)?;
    let gap = sup_diff(&last.values, &extrapolated.values);
    Ok(LimitResult {
        last,
        extrapolated,
        report: ConvergenceReport {
            family: family.label(),
            schedule: schedule.to_vec(),
            sup_differences: diffs,
            ratios,
            threshold,
            converged,
            extrapolation_gap: gap,
        },
    })
}

fn neville_to_zero(xs: &[f64], iterates: &[ClassicalChar]) -> DMatrix<Complex64> {
    let mut table: Vec<DMatrix<Complex64>> = iterates.iter().map(|c| c.values.clone()).collect();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            // P(0) from P_{i..j-1} and P_{i+1..j}
            let next = (&table[i + 1] * Complex64::new(xi, 0.0) - &table[i] * Complex64::new(xj, 0.0)) / Complex64::new(xi - xj, 0.0);
            table[i] = next;
        }
    }
    table.swap_remove(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitClass {
    /// The limit is `delta(q) delta(p)`.
    AtomicAtOrigin,
    /// The limit is to be inverted numerically.
    Extended,
}

pub fn classify(cc: &ClassicalChar) -> LimitClass {
    let dev = cc.values.iter().fold(0.0f64, |a, z| a.max((z - 1.0).norm()));
    if dev < ATOMIC_TOL {
        LimitClass::AtomicAtOrigin
    } else {
        LimitClass::Extended
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Support {
    /// `cc` decays at the boundary; inverted as sampled.
    Regular,
    /// `cc` does not decay (singular measure); multiplied by
    /// `exp(-r^2 / 2 sigma^2)` first, which blurs the measure by a Gaussian of
    /// width `1 / sigma`.
    Singular { sigma: f64 },
}

impl Support {
    /// Singular support with the default window `sigma = extent / 5`.
    pub fn singular_for(grid: &PhaseGrid) -> Self {
        Support::Singular { sigma: grid.extent() / 5.0 }
    }
}

fn windowed(cc: &ClassicalChar, support: Support) -> Result<DMatrix<Complex64>> {
    match support {
        Support::Regular => {
            let ratio = boundary_ratio(&cc.values);
            if ratio > REGULAR_DECAY {
                return Err(Error::BoundaryDecay { ratio, limit: REGULAR_DECAY });
            }
            Ok(cc.values.clone())
        }
        Support::Singular { sigma } => {
            crate::error::require_positive("sigma", sigma)?;
            let c = cc.grid.coords();
            Ok(DMatrix::from_fn(c.len(), c.len(), |i, j| {
                cc.values[(i, j)] * (-(c[i] * c[i] + c[j] * c[j]) / (2.0 * sigma * sigma)).exp()
            }))
        }
    }
}

/// Fourier inversion of `cc` onto `out`, followed by the repair policy.
pub fn bochner_invert(cc: &ClassicalChar, out: &PhaseGrid, support: Support) -> Result<ClassicalDensity> {
    if out.axes() != Axes::QP {
        return Err(Error::GridMismatch("densities live on (q, p)".into()));
    }
    let values = windowed(cc, support)?;
    let mu = symplectic_transform(&values, &cc.grid, out, 1.0);
    let real = realize(*out, mu, 1e-6)?;
    ClassicalDensity::from_values(*out, real.values, 1e-3)
}

/// The inverted density evaluated at arbitrary points, without repair.
pub fn bochner_at(cc: &ClassicalChar, points: &[(f64, f64)], support: Support) -> Result<Vec<f64>> {
    let values = windowed(cc, support)?;
    let c = cc.grid.coords();
    let norm = cc.grid.cell_area() / (2.0 * PI).powi(2);
    Ok(points
        .par_iter()
        .map(|&(q, p)| {
            let row: Vec<Complex64> = c.iter().map(|&e| Complex64::from_polar(1.0, -e * q)).collect();
            let col: Vec<Complex64> = c.iter().map(|&x| Complex64::from_polar(1.0, x * p)).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..c.len() {
                let mut inner = Complex64::new(0.0, 0.0);
                for j in 0..c.len() {
                    inner += values[(i, j)] * col[j];
                }
                acc += row[i] * inner;
            }
            acc.re * norm
        })
        .collect())
}
