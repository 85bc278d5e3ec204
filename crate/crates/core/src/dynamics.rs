//! Time evolution of characteristic functions.
//!
//! For `H = T(p) + V(q)` the von Neumann equation, written for
//! `chi(eta, xi) = tr[rho D(alpha)]`, reads
//!
//! ```text
//! i hbar d_t chi = [ H(-i hbar d_eta - xi/2, i hbar d_xi - eta/2)
//!                  - H(-i hbar d_eta + xi/2, i hbar d_xi + eta/2) ] chi
//! ```
//!
//! `T` and `V` act in separate slots, so each part is diagonal in a
//! one-dimensional Fourier transform: the potential along `eta` with symbol
//! `V(hbar k - xi/2) - V(hbar k + xi/2)`, the kinetic term along `xi` with
//! symbol `T(-hbar l - eta/2) - T(-hbar l + eta/2)`. Both symbols vanish on
//! the axis through the origin they act across, so `chi(0, 0)` is invariant
//! under every substep.
//!
//! Quadratic Hamiltonians generate an affine flow `z -> S z + v` of `(q, p)`;
//! then `chi_t(eta, xi) = exp[i(eta v_q - xi v_p)/hbar] chi_0(B (eta, xi))`
//! with `B = [[S11, -S21], [-S12, S22]]`, applied exactly by shears.
//! Other Hamiltonians are integrated by a fourth-order (Yoshida) composition
//! of Strang splittings; the step error is estimated by step halving.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::climit::{ClassicalChar, ClassicalDensity};
use crate::error::{invalid, Error, Result};
use crate::grid::{apply_axis_multiplier, boundary_ratio, pullback_linear, spectral_tail, translate_axis, Axis, PhaseGrid};
use crate::linalg::{unitary_propagator, CMatrix};
use crate::repr::TruncatedRep;
use crate::states::DensityMatrix;
use crate::transform::{forward, inverse, CharFunction};

/// Largest polynomial degree of `T` and `V`.
pub const MAX_DEGREE: usize = 4;
/// `|chi_t(0,0) - 1|` beyond which evolution aborts.
pub const DRIFT_LIMIT: f64 = 1e-4;
/// Boundary and spectral-tail level an evolved grid must stay below.
pub const ADEQUACY_TOL: f64 = 1e-6;

/// `H(q, p) = T(p) + V(q)` with polynomial coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub kinetic: Vec<f64>,
    pub potential: Vec<f64>,
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

/// `P(x - a) - P(x + a) = -2 sum_{j odd} P^(j)(x) a^j / j!`, free of cancellation.
fn odd_difference(c: &[f64], x: f64, a: f64) -> f64 {
    let mut d = derivative(c);
    let mut total = 0.0;
    let mut j = 1;
    let mut factorial = 1.0;
    let mut power = a;
    while !d.is_empty() {
        if j % 2 == 1 {
            total += poly(&d, x) * power / factorial;
        }
        d = derivative(&d);
        j += 1;
        factorial *= j as f64;
        power *= a;
    }
    -2.0 * total
}

fn degree(c: &[f64]) -> usize {
    c.iter().rposition(|&a| a != 0.0).unwrap_or(0)
}

impl HamiltonianSpec {
    pub fn new(kinetic: Vec<f64>, potential: Vec<f64>) -> Result<Self> {
        let h = Self { kinetic, potential };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kinetic.len() > MAX_DEGREE + 1 || self.potential.len() > MAX_DEGREE + 1 {
            return Err(invalid("hamiltonian", format!("polynomial degree is limited to {MAX_DEGREE}")));
        }
        if self.kinetic.iter().chain(&self.potential).any(|v| !v.is_finite()) {
            return Err(invalid("hamiltonian", "coefficients must be finite"));
        }
        Ok(())
    }

    pub fn zero() -> Self {
        Self { kinetic: vec![], potential: vec![] }
    }

    /// `p^2 / 2m`
    pub fn free(mass: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(invalid("mass", "must be positive"));
        }
        Self::new(vec![0.0, 0.0, 0.5 / mass], vec![])
    }

    /// `p^2 / 2m + m omega^2 q^2 / 2`
    pub fn harmonic(mass: f64, omega: f64) -> Result<Self> {
        let mut h = Self::free(mass)?;
        h.potential = vec![0.0, 0.0, 0.5 * mass * omega * omega];
        Ok(h)
    }

    /// `p^2 / 2m + m omega^2 q^2 / 2 + lambda q^4`
    pub fn anharmonic(mass: f64, omega: f64, lambda: f64) -> Result<Self> {
        let mut h = Self::harmonic(mass, omega)?;
        h.potential.extend([0.0, lambda]);
        h.validate()?;
        Ok(h)
    }

    pub fn is_quadratic(&self) -> bool {
        degree(&self.kinetic) <= 2 && degree(&self.potential) <= 2
    }

    pub fn kinetic_at(&self, p: f64) -> f64 {
        poly(&self.kinetic, p)
    }

    pub fn potential_at(&self, q: f64) -> f64 {
        poly(&self.potential, q)
    }

    pub fn energy(&self, q: f64, p: f64) -> f64 {
        self.kinetic_at(p) + self.potential_at(q)
    }

    /// `T'(p)`, the velocity `dq/dt`.
    pub fn velocity(&self, p: f64) -> f64 {
        poly(&derivative(&self.kinetic), p)
    }

    /// `V'(q)`, minus the force.
    pub fn gradient(&self, q: f64) -> f64 {
        poly(&derivative(&self.potential), q)
    }

    /// `T(p) + V(q)` with the quadrature operators of a `dim`-level truncation.
    /// Powers are formed in `dim + 4` levels and then truncated, so every
    /// retained matrix element is exact.
    pub fn operator_matrix(&self, dim: usize, hbar: f64) -> Result<CMatrix> {
        let big = dim + MAX_DEGREE;
        let rep = TruncatedRep::build_generators(hbar, big)?;
        let series = |c: &[f64], x: &CMatrix| {
            let mut acc = CMatrix::zeros(big, big);
            let mut power = CMatrix::identity(big, big);
            for &a in c {
                acc += power.map(|z| z * a);
                power = &power * x;
            }
            acc
        };
        let full = series(&self.kinetic, rep.phat()) + series(&self.potential, rep.qhat());
        Ok(full.view((0, 0), (dim, dim)).into_owned())
    }

    /// For quadratic `H`, the exact classical flow `z(t) = S z(0) + v`.
    pub fn linear_flow(&self, t: f64) -> Result<([[f64; 2]; 2], [f64; 2])> {
        if !self.is_quadratic() {
            return Err(invalid("hamiltonian", "the linear flow needs a quadratic Hamiltonian"));
        }
        let c = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        let (t1, t2) = (c(&self.kinetic, 1), c(&self.kinetic, 2));
        let (v1, v2) = (c(&self.potential, 1), c(&self.potential, 2));
        // dq/dt = t1 + 2 t2 p, dp/dt = -v1 - 2 v2 q
        let generator = Matrix3::new(0.0, 2.0 * t2, t1, -2.0 * v2, 0.0, -v1, 0.0, 0.0, 0.0) * t;
        let e = generator.exp();
        Ok(([[e[(0, 0)], e[(0, 1)]], [e[(1, 0)], e[(1, 1)]]], [e[(0, 2)], e[(1, 2)]]))
    }
}

const YOSHIDA: [f64; 3] = {
    // w1 = 1 / (2 - 2^(1/3)), w0 = -2^(1/3) w1
    let w1 = 1.351_207_191_959_657_8;
    let w0 = -1.702_414_383_919_315_3;
    [w1, w0, w1]
};

/// One substep of the potential part, `tau` long, on a grid in which
/// `eta = scale * eta_grid`.
trait Splitting {
    fn potential(&self, values: &mut DMatrix<Complex64>, tau: f64);
    fn kinetic(&self, values: &mut DMatrix<Complex64>, tau: f64);

    fn strang(&self, values: &mut DMatrix<Complex64>, tau: f64) {
        self.potential(values, 0.5 * tau);
        self.kinetic(values, tau);
        self.potential(values, 0.5 * tau);
    }

    fn step(&self, values: &mut DMatrix<Complex64>, dt: f64) {
        for w in YOSHIDA {
            self.strang(values, w * dt);
        }
    }
}

struct QuantumSplit<'a> {
    h: &'a HamiltonianSpec,
    grid: &'a PhaseGrid,
    hbar: f64,
    coords: Vec<f64>,
}

impl Splitting for QuantumSplit<'_> {
    fn potential(&self, values: &mut DMatrix<Complex64>, tau: f64) {
        if degree(&self.h.potential) == 0 {
            return;
        }
        let (hb, c) = (self.hbar, &self.coords);
        apply_axis_multiplier(values, self.grid, Axis::First, |line, k| {
            let d = odd_difference(&self.h.potential, hb * k, 0.5 * c[line]);
            Complex64::from_polar(1.0, -tau * d / hb)
        });
    }

    fn kinetic(&self, values: &mut DMatrix<Complex64>, tau: f64) {
        if degree(&self.h.kinetic) == 0 {
            return;
        }
        let (hb, c) = (self.hbar, &self.coords);
        apply_axis_multiplier(values, self.grid, Axis::Second, |line, l| {
            let d = odd_difference(&self.h.kinetic, -hb * l, 0.5 * c[line]);
            Complex64::from_polar(1.0, -tau * d / hb)
        });
    }
}

struct ClassicalCharSplit<'a> {
    h: &'a HamiltonianSpec,
    grid: &'a PhaseGrid,
    coords: Vec<f64>,
}

impl Splitting for ClassicalCharSplit<'_> {
    fn potential(&self, values: &mut DMatrix<Complex64>, tau: f64) {
        let c = &self.coords;
        apply_axis_multiplier(values, self.grid, Axis::First, |line, k| {
            Complex64::from_polar(1.0, tau * c[line] * self.h.gradient(k))
        });
    }

    fn kinetic(&self, values: &mut DMatrix<Complex64>, tau: f64) {
        let c = &self.coords;
        apply_axis_multiplier(values, self.grid, Axis::Second, |line, l| {
            Complex64::from_polar(1.0, tau * c[line] * self.h.velocity(-l))
        });
    }
}

struct LiouvilleSplit<'a> {
    h: &'a HamiltonianSpec,
    grid: &'a PhaseGrid,
}

impl Splitting for LiouvilleSplit<'_> {
    /// `rho(q, p) -> rho(q, p + tau V'(q))`
    fn potential(&self, values: &mut DMatrix<Complex64>, tau: f64) {
        translate_axis(values, self.grid, Axis::Second, |q| tau * self.h.gradient(q));
    }

    /// `rho(q, p) -> rho(q - tau T'(p), p)`
    fn kinetic(&self, values: &mut DMatrix<Complex64>, tau: f64) {
        translate_axis(values, self.grid, Axis::First, |p| -tau * self.h.velocity(p));
    }
}

/// Projects onto `chi(-z) = conj chi(z)` over the paired nodes and returns
/// the defect removed. The unpaired first row and column feed asymmetric
/// content back into the interior whenever the split steps push mass out to
/// the boundary.
fn symmetrize(values: &mut DMatrix<Complex64>) -> f64 {
    let m = values.nrows();
    let mut defect: f64 = 0.0;
    for i in 1..m {
        for j in 1..m {
            let (a, b) = ((i, j), (m - i, m - j));
            if a > b {
                continue;
            }
            let (x, y) = (values[a], values[b]);
            defect = defect.max((y - x.conj()).norm());
            let avg = 0.5 * (x + y.conj());
            values[a] = avg;
            values[b] = avg.conj();
        }
    }
    defect
}

/// `chi_t = phase * chi_0 o B` for the flow `(S, v)`; `hbar = 1` gives the
/// classical characteristic-function flow.
fn linear_char_flow(values: &DMatrix<Complex64>, grid: &PhaseGrid, flow: ([[f64; 2]; 2], [f64; 2]), hbar: f64) -> Result<DMatrix<Complex64>> {
    let (s, v) = flow;
    let b = [[s[0][0], -s[1][0]], [-s[0][1], s[1][1]]];
    let mut out = values.clone();
    pullback_linear(&mut out, grid, b)?;
    let c = grid.coords();
    for i in 0..c.len() {
        for j in 0..c.len() {
            out[(i, j)] *= Complex64::from_polar(1.0, (c[i] * v[0] - c[j] * v[1]) / hbar);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactLinearFlow,
    SplitStep4,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionReport {
    pub method: Method,
    pub steps: usize,
    pub times: Vec<f64>,
    /// `|chi_t(0,0) - 1|` at every reported time.
    pub drift: Vec<f64>,
    /// Largest drift divided by the final time.
    pub drift_rate: f64,
    /// `sup |chi_t - forward(U rho U^dag)|` at every reported time.
    pub oracle_deviation: Option<Vec<f64>>,
    /// `sup |chi(steps) - chi(2 steps)|` at the final time.
    pub step_error: Option<f64>,
    /// Largest symmetry defect removed after a split step.
    pub symmetry_repair: f64,
    pub boundary_ratio: f64,
    pub spectral_tail: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EvolveOptions {
    /// Number of reported times after `t = 0`; the last one is `t_final`.
    pub frames: usize,
    /// Reconstruct `rho_0` in this many levels and compare with the exact
    /// unitary evolution.
    pub oracle_dim: Option<usize>,
    pub estimate_error: bool,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub chi: CharFunction,
    /// Snapshots at `report.times`, starting with `t = 0`.
    pub frames: Vec<CharFunction>,
    pub report: EvolutionReport,
}

fn frame_steps(steps: usize, frames: usize) -> Vec<usize> {
    let frames = frames.max(1).min(steps.max(1));
    (1..=frames).map(|k| (k * steps) / frames).collect()
}

struct Oracle {
    rho0: CMatrix,
    hamiltonian: CMatrix,
    hbar: f64,
}

impl Oracle {
    fn new(rho0: &DensityMatrix, h: &HamiltonianSpec) -> Result<Self> {
        Ok(Self {
            rho0: rho0.matrix().clone(),
            hamiltonian: h.operator_matrix(rho0.dim(), rho0.hbar())?,
            hbar: rho0.hbar(),
        })
    }

    fn deviation(&self, t: f64, chi: &CharFunction) -> Result<f64> {
        let u = unitary_propagator(&self.hamiltonian, t, self.hbar, 1e-10)?;
        let rho = &u * &self.rho0 * u.adjoint();
        let dim = rho.nrows();
        let top = (dim / 8).max(2);
        let tail: f64 = (dim - top..dim).map(|k| rho[(k, k)].re).sum();
        if tail > 1e-8 {
            return Err(Error::TruncationInadequate(format!(
                "evolved state puts {tail:.3e} in the top {top} of {dim} levels"
            )));
        }
        let rho = DensityMatrix::new(rho, self.hbar)?;
        let exact = forward(&rho, chi.grid())?;
        Ok((exact.values() - chi.values()).iter().fold(0.0f64, |a, z| a.max(z.norm())))
    }
}

fn check_adequacy(values: &DMatrix<Complex64>, t: f64) -> Result<(f64, f64)> {
    let ratio = boundary_ratio(values);
    let tail = spectral_tail(values);
    if ratio > ADEQUACY_TOL || tail > ADEQUACY_TOL {
        return Err(Error::GridInadequate(format!(
            "at t = {t}: boundary/peak {ratio:.2e}, spectral tail {tail:.2e} (limit {ADEQUACY_TOL:.0e})"
        )));
    }
    Ok((ratio, tail))
}

fn evolve_inner(chi0: &CharFunction, h: &HamiltonianSpec, t_final: f64, steps: usize, opts: &EvolveOptions, oracle: Option<Oracle>) -> Result<Evolution> {
    h.validate()?;
    if !t_final.is_finite() || t_final < 0.0 {
        return Err(invalid("t_final", "must be finite and nonnegative"));
    }
    let grid = *chi0.grid();
    let hbar = chi0.hbar();
    let quadratic = h.is_quadratic();
    if !quadratic && steps == 0 {
        return Err(invalid("steps", "split stepping needs at least one step"));
    }
    let steps_eff = if quadratic { steps.max(1) } else { steps };
    let marks = frame_steps(steps_eff, opts.frames);
    let dt = t_final / steps_eff as f64;
    let mut times = vec![0.0];
    let mut frames = vec![chi0.clone()];
    let split = QuantumSplit { h, grid: &grid, hbar, coords: grid.coords() };
    let mut current = chi0.values().clone();
    let mut done = 0;
    let mut symmetry_repair: f64 = 0.0;
    for &mark in &marks {
        let t = t_final * mark as f64 / steps_eff as f64;
        if quadratic {
            current = linear_char_flow(chi0.values(), &grid, h.linear_flow(t)?, hbar)?;
        } else {
            for _ in done..mark {
                split.step(&mut current, dt);
                symmetry_repair = symmetry_repair.max(symmetrize(&mut current));
            }
        }
        done = mark;
        let o = grid.origin_index();
        let drift = (current[(o, o)] - 1.0).norm();
        if drift > DRIFT_LIMIT {
            return Err(Error::NormalizationDrift { drift, limit: DRIFT_LIMIT });
        }
        check_adequacy(&current, t)?;
        times.push(t);
        frames.push(CharFunction::new(hbar, grid, current.clone())?);
    }
    let drift: Vec<f64> = frames.iter().map(|f| (f.at_origin() - 1.0).norm()).collect();
    let max_drift = drift.iter().fold(0.0f64, |a, &b| a.max(b));
    let oracle_deviation = match &oracle {
        Some(o) => Some(times.iter().zip(&frames).map(|(&t, f)| o.deviation(t, f)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    let step_error = if opts.estimate_error && !quadratic {
        let mut fine = chi0.values().clone();
        for _ in 0..2 * steps {
            split.step(&mut fine, 0.5 * dt);
            symmetrize(&mut fine);
        }
        Some((&fine - &current).iter().fold(0.0f64, |a, z| a.max(z.norm())))
    } else if opts.estimate_error {
        Some(0.0)
    } else {
        None
    };
    let (ratio, tail) = check_adequacy(&current, t_final)?;
    let chi = frames.last().unwrap().clone();
    Ok(Evolution {
        chi,
        frames,
        report: EvolutionReport {
            method: if quadratic { Method::ExactLinearFlow } else { Method::SplitStep4 },
            steps: steps_eff,
            times,
            drift,
            drift_rate: if t_final > 0.0 { max_drift / t_final } else { max_drift },
            oracle_deviation,
            step_error,
            symmetry_repair,
            boundary_ratio: ratio,
            spectral_tail: tail,
        },
    })
}

/// Evolve `chi0` to `t_final`. Quadratic `H` uses the exact linear flow and
/// ignores `steps`; other `H` take `steps` fourth-order split steps.
pub fn evolve_char(chi0: &CharFunction, h: &HamiltonianSpec, t_final: f64, steps: usize, opts: &EvolveOptions) -> Result<Evolution> {
    let oracle = match opts.oracle_dim {
        Some(dim) => Some(Oracle::new(&inverse(chi0, dim)?.rho, h)?),
        None => None,
    };
    evolve_inner(chi0, h, t_final, steps, opts, oracle)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub max_deviation: f64,
    pub deviations: Vec<f64>,
    pub times: Vec<f64>,
    pub drift_rate: f64,
    pub step_error: Option<f64>,
    pub method: Method,
}

/// `sup |evolve_char(forward(rho0)) - forward(U rho0 U^dag)|` over the grid
/// and over `frames` equally spaced times.
pub fn oracle_evolve_compare(rho0: &DensityMatrix, h: &HamiltonianSpec, t: f64, steps: usize, grid: &PhaseGrid, frames: usize) -> Result<OracleComparison> {
    let chi0 = forward(rho0, grid)?;
    let opts = EvolveOptions { frames, oracle_dim: None, estimate_error: true };
    let evo = evolve_inner(&chi0, h, t, steps, &opts, Some(Oracle::new(rho0, h)?))?;
    let deviations = evo.report.oracle_deviation.clone().unwrap_or_default();
    Ok(OracleComparison {
        max_deviation: deviations.iter().fold(0.0f64, |a, &b| a.max(b)),
        deviations,
        times: evo.report.times,
        drift_rate: evo.report.drift_rate,
        step_error: evo.report.step_error,
        method: evo.report.method,
    })
}

/// Classical (`hbar -> 0`) flow of a rescaled characteristic function:
/// exact for quadratic `H`, otherwise split steps with the symbols
/// `exp(i tau xi V'(k))` and `exp(i tau eta T'(-l))`.
pub fn classical_char_evolve(cc: &ClassicalChar, h: &HamiltonianSpec, t_final: f64, steps: usize) -> Result<ClassicalChar> {
    h.validate()?;
    let grid = *cc.grid();
    let values = if h.is_quadratic() {
        linear_char_flow(cc.values(), &grid, h.linear_flow(t_final)?, 1.0)?
    } else {
        if steps == 0 {
            return Err(invalid("steps", "split stepping needs at least one step"));
        }
        let split = ClassicalCharSplit { h, grid: &grid, coords: grid.coords() };
        let mut v = cc.values().clone();
        for _ in 0..steps {
            split.step(&mut v, t_final / steps as f64);
            symmetrize(&mut v);
        }
        v
    };
    check_adequacy(&values, t_final)?;
    ClassicalChar::new(grid, values)
}

/// Liouville transport of a phase-space density: the exact pushforward
/// `rho_t(z) = rho_0(S^-1 (z - v))` for quadratic `H`, otherwise split steps
/// of the kick `p -> p - tau V'(q)` and the drift `q -> q + tau T'(p)`.
pub fn classical_liouville(rho: &ClassicalDensity, h: &HamiltonianSpec, t_final: f64, steps: usize) -> Result<ClassicalDensity> {
    h.validate()?;
    let grid = *rho.grid();
    let mut values = rho.values().map(|v| Complex64::new(v, 0.0));
    if h.is_quadratic() {
        let (s, v) = h.linear_flow(t_final)?;
        // S is symplectic: S^-1 = [[S22, -S12], [-S21, S11]]
        let inv = [[s[1][1], -s[0][1]], [-s[1][0], s[0][0]]];
        pullback_linear(&mut values, &grid, inv)?;
        translate_axis(&mut values, &grid, Axis::First, |_| -v[0]);
        translate_axis(&mut values, &grid, Axis::Second, |_| -v[1]);
    } else {
        if steps == 0 {
            return Err(invalid("steps", "split stepping needs at least one step"));
        }
        let split = LiouvilleSplit { h, grid: &grid };
        for _ in 0..steps {
            split.step(&mut values, t_final / steps as f64);
        }
    }
    let ratio = boundary_ratio(&values);
    if ratio > ADEQUACY_TOL {
        return Err(Error::GridInadequate(format!("density reaches the boundary (ratio {ratio:.2e})")));
    }
    ClassicalDensity::from_values(grid, values.map(|z| z.re), 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{coherent_state, fock_state};
    use std::f64::consts::PI;

    #[test]
    fn odd_difference_matches_direct() {
        let c = [0.3, -1.0, 0.5, 0.25, -0.125];
        for &(x, a) in &[(0.0, 0.5), (1.5, -0.25), (-2.0, 3.0)] {
            let direct = poly(&c, x - a) - poly(&c, x + a);
            assert!((odd_difference(&c, x, a) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_flow_is_rotation() {
        let h = HamiltonianSpec::harmonic(1.0, 1.0).unwrap();
        let (s, v) = h.linear_flow(0.7).unwrap();
        let (c, sn) = (0.7f64.cos(), 0.7f64.sin());
        assert!((s[0][0] - c).abs() < 1e-14 && (s[0][1] - sn).abs() < 1e-14);
        assert!((s[1][0] + sn).abs() < 1e-14 && (s[1][1] - c).abs() < 1e-14);
        assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
        assert!(HamiltonianSpec::anharmonic(1.0, 1.0, 0.1).unwrap().linear_flow(1.0).is_err());
    }

    #[test]
    fn degree_is_limited() {
        assert!(HamiltonianSpec::new(vec![0.0; 6], vec![]).is_err());
        assert!(HamiltonianSpec::new(vec![f64::NAN], vec![]).is_err());
    }

    #[test]
    fn operator_matrix_matches_number_operator() {
        let hbar = 0.5;
        let h = HamiltonianSpec::harmonic(1.0, 1.0).unwrap().operator_matrix(10, hbar).unwrap();
        for k in 0..10 {
            assert!((h[(k, k)].re - hbar * (k as f64 + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn free_particle_shears_xi() {
        let hbar = 1.0;
        let grid = PhaseGrid::eta_xi(16.0, 128).unwrap();
        let chi0 = forward(&coherent_state(0.5, 1.0, 32, hbar).unwrap(), &grid).unwrap();
        let h = HamiltonianSpec::free(2.0).unwrap();
        let t = 0.8;
        let evo = evolve_char(&chi0, &h, t, 1, &EvolveOptions::default()).unwrap();
        let expect = CharFunction::from_fn(hbar, grid, |e, x| {
            let (e2, x2) = (e, x - e * t / 2.0);
            Complex64::from_polar((-(e2 * e2 + x2 * x2) / 4.0).exp(), 0.5 * e2 - 1.0 * x2)
        })
        .unwrap();
        let err = (evo.chi.values() - expect.values()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        assert!(err < 1e-10, "{err:e}");
    }

    #[test]
    fn split_step_agrees_with_exact_flow_for_quadratic() {
        let hbar = 0.5;
        let grid = PhaseGrid::eta_xi(8.0, 96).unwrap();
        let chi0 = forward(&coherent_state(0.6, -0.3, 32, hbar).unwrap(), &grid).unwrap();
        let h = HamiltonianSpec::harmonic(1.0, 1.3).unwrap();
        let exact = evolve_char(&chi0, &h, 1.1, 1, &EvolveOptions::default()).unwrap();
        let split = QuantumSplit { h: &h, grid: &grid, hbar, coords: grid.coords() };
        let mut v = chi0.values().clone();
        for _ in 0..40 {
            split.step(&mut v, 1.1 / 40.0);
        }
        let err = (exact.chi.values() - v).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        assert!(err < 1e-6, "{err:e}");
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let grid = PhaseGrid::eta_xi(10.0, 64).unwrap();
        let rho = fock_state(1, 16, 1.0).unwrap();
        let cmp = oracle_evolve_compare(&rho, &HamiltonianSpec::zero(), 2.0, 4, &grid, 2).unwrap();
        assert!(cmp.max_deviation < 1e-12);
    }

    #[test]
    fn harmonic_period_returns() {
        let grid = PhaseGrid::eta_xi(12.0, 96).unwrap();
        let rho = coherent_state(1.0, 0.5, 40, 1.0).unwrap();
        let h = HamiltonianSpec::harmonic(1.0, 1.0).unwrap();
        let cmp = oracle_evolve_compare(&rho, &h, 2.0 * PI, 1, &grid, 4).unwrap();
        assert!(cmp.max_deviation < 1e-8, "{cmp:?}");
    }

    #[test]
    fn liouville_free_drift() {
        let grid = PhaseGrid::qp(8.0, 128).unwrap();
        let rho = ClassicalDensity::from_values(
            grid,
            grid.map(|q, p| (-(q * q + (p - 1.0).powi(2)) / 0.5).exp() / (0.5 * PI)),
            1e-6,
        )
        .unwrap();
        let h = HamiltonianSpec::free(2.0).unwrap();
        let out = classical_liouville(&rho, &h, 1.5, 1).unwrap();
        let mean = out.expectation(|q, _| q);
        assert!((mean - 0.75).abs() < 1e-10, "{mean}");
        assert!((out.mass() - 1.0).abs() < 1e-12);
        let zero = classical_liouville(&rho, &HamiltonianSpec::zero(), 1.5, 1).unwrap();
        assert!((zero.values() - rho.values()).abs().max() < 1e-14);
    }

    #[test]
    fn liouville_split_matches_exact_rotation() {
        let grid = PhaseGrid::qp(6.0, 96).unwrap();
        let rho = ClassicalDensity::from_values(
            grid,
            grid.map(|q, p| (-((q - 1.0).powi(2) + p * p) / 0.5).exp() / (0.5 * PI)),
            1e-6,
        )
        .unwrap();
        let h = HamiltonianSpec::harmonic(1.0, 1.0).unwrap();
        let exact = classical_liouville(&rho, &h, 1.0, 1).unwrap();
        let split = LiouvilleSplit { h: &h, grid: &grid };
        let mut v = rho.values().map(|x| Complex64::new(x, 0.0));
        for _ in 0..50 {
            split.step(&mut v, 0.02);
        }
        let err = (exact.values() - v.map(|z| z.re)).abs().max();
        assert!(err < 1e-6, "{err:e}");
    }
}
