//! Finite Gram-matrix tests of positive-definiteness.
//!
//! A function `phi` on a group is positive-definite when every matrix
//! `M_jk = phi(g_j^-1 g_k)` is positive semidefinite. The same sampled data
//! can be tested with two composition laws: the Heisenberg product, which
//! carries the central phase, and plain vector addition on `R^2`.
//!
//! For a state of Planck constant `hbar`, the positive-definite function on
//! the group is `phi(s, eta, xi) = exp(-i hbar s) chi(hbar eta, hbar xi)`;
//! the representation `T(s, eta, xi)` composes with the group law only in
//! these rescaled coordinates. Samplers therefore pick nodes of the `chi`
//! grid and divide them by `hbar`.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{PhaseGrid, SpectralInterpolant};
use crate::group::{inverse, multiply, GroupElement};
use crate::linalg::{hermitian_eigenvalues, hermitian_part, hermiticity_defect, CMatrix};
use crate::transform::CharFunction;

/// Default eigenvalue tolerance relative to the Gram scale.
pub const PD_TOL: f64 = 1e-8;

/// A function on `H_1` backed by samples on a phase grid.
pub trait GroupFunction: Sync {
    fn grid(&self) -> &PhaseGrid;

    /// Group coordinates are grid coordinates divided by this factor.
    fn coordinate_scale(&self) -> f64;

    /// Central character `exp(-i hbar s)`; 1 for functions on `R^2`.
    fn central(&self, _s: f64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    /// Sampled function at grid coordinates `(x, y)`.
    fn sample(&self, x: f64, y: f64) -> Result<Complex64>;

    fn value(&self, g: &GroupElement) -> Result<Complex64> {
        if g.n() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: g.n() });
        }
        let (eta, xi) = g.planar();
        let c = self.coordinate_scale();
        Ok(self.central(g.s()) * self.sample(c * eta, c * xi)?)
    }
}

/// Grid lookup with spectral interpolation off the nodes.
#[derive(Debug)]
pub(crate) struct GridLookup<'a> {
    grid: &'a PhaseGrid,
    values: &'a DMatrix<Complex64>,
    interpolant: OnceLock<SpectralInterpolant>,
}

impl<'a> GridLookup<'a> {
    pub(crate) fn new(grid: &'a PhaseGrid, values: &'a DMatrix<Complex64>) -> Self {
        Self { grid, values, interpolant: OnceLock::new() }
    }

    pub(crate) fn grid(&self) -> &'a PhaseGrid {
        self.grid
    }

    pub(crate) fn at(&self, x: f64, y: f64) -> Result<Complex64> {
        if !self.grid.covers(x) || !self.grid.covers(y) {
            return Err(Error::OutsideDomain { eta: x, xi: y });
        }
        match (self.grid.node_index(x), self.grid.node_index(y)) {
            (Some(i), Some(j)) => Ok(self.values[(i, j)]),
            _ => Ok(self
                .interpolant
                .get_or_init(|| SpectralInterpolant::new(self.values, self.grid))
                .eval(x, y)),
        }
    }
}

/// `phi(s, eta, xi) = exp(-i hbar s) chi(hbar eta, hbar xi)` for a sampled state.
pub struct PhysicalState<'a> {
    hbar: f64,
    lookup: GridLookup<'a>,
}

impl<'a> PhysicalState<'a> {
    pub fn new(chi: &'a CharFunction) -> Self {
        Self {
            hbar: chi.hbar(),
            lookup: GridLookup::new(chi.grid(), chi.values()),
        }
    }
}

impl GroupFunction for PhysicalState<'_> {
    fn grid(&self) -> &PhaseGrid {
        self.lookup.grid
    }

    fn coordinate_scale(&self) -> f64 {
        self.hbar
    }

    fn central(&self, s: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.hbar * s)
    }

    fn sample(&self, x: f64, y: f64) -> Result<Complex64> {
        self.lookup.at(x, y)
    }
}

/// An arbitrary sampled function on `R^2`, tested at its own coordinates.
pub struct SampledFunction<'a> {
    lookup: GridLookup<'a>,
}

impl<'a> SampledFunction<'a> {
    pub fn new(grid: &'a PhaseGrid, values: &'a DMatrix<Complex64>) -> Result<Self> {
        let m = grid.points();
        if values.shape() != (m, m) {
            return Err(Error::GridMismatch(format!("values {:?} vs grid {m}x{m}", values.shape())));
        }
        Ok(Self { lookup: GridLookup::new(grid, values) })
    }
}

impl GroupFunction for SampledFunction<'_> {
    fn grid(&self) -> &PhaseGrid {
        self.lookup.grid
    }

    fn coordinate_scale(&self) -> f64 {
        1.0
    }

    fn sample(&self, x: f64, y: f64) -> Result<Complex64> {
        self.lookup.at(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Composition {
    /// `g_j^-1 g_k` in `H_1`, central phase included.
    Heisenberg,
    /// `z_k - z_j` in `R^2`, central coordinate dropped.
    Abelian,
}

/// Sum of the translation parts; the central coordinate is dropped.
pub fn abelian_compose(a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: b.n() });
    }
    GroupElement::new(
        0.0,
        a.eta().iter().zip(b.eta()).map(|(x, y)| x + y).collect(),
        a.xi().iter().zip(b.xi()).map(|(x, y)| x + y).collect(),
    )
}

fn relative(a: &GroupElement, b: &GroupElement, law: Composition) -> Result<GroupElement> {
    match law {
        Composition::Heisenberg => multiply(&inverse(a), b),
        Composition::Abelian => abelian_compose(&inverse(a), b),
    }
}

/// `M_jk = phi(g_j^-1 g_k)` under the chosen composition law.
pub fn gram_matrix(phi: &dyn GroupFunction, elements: &[GroupElement], law: Composition) -> Result<CMatrix> {
    let k = elements.len();
    if k == 0 {
        return Err(invalid("elements", "need at least one element"));
    }
    let entries: Vec<Result<Complex64>> = (0..k * k)
        .into_par_iter()
        .map(|idx| {
            let (j, l) = (idx % k, idx / k);
            phi.value(&relative(&elements[j], &elements[l], law)?)
        })
        .collect();
    let mut flat = Vec::with_capacity(k * k);
    for e in entries {
        flat.push(e?);
    }
    Ok(DMatrix::from_vec(k, k, flat))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Sampler {
    /// `count` grid nodes drawn uniformly within `radius` of the origin,
    /// each with a uniform central coordinate.
    Random { seed: u64, count: usize, radius: f64 },
    /// Square lattice of grid nodes with the given spacing, within `radius`.
    Lattice { spacing: f64, radius: f64 },
}

impl Sampler {
    pub fn seed(&self) -> u64 {
        match self {
            Sampler::Random { seed, .. } => *seed,
            Sampler::Lattice { .. } => 0,
        }
    }

    /// Group elements whose pairwise relative positions stay on grid nodes
    /// inside the sampled domain.
    pub fn elements(&self, phi: &dyn GroupFunction) -> Result<Vec<GroupElement>> {
        let grid = phi.grid();
        let h = grid.spacing();
        let o = grid.origin_index() as i64;
        // offsets within a quarter of the grid keep every difference inside it
        let reach = (grid.points() / 4) as i64 - 1;
        let scale = phi.coordinate_scale();
        let period = 2.0 * std::f64::consts::PI / scale;
        let node = |i: i64| grid.coord((o + i) as usize) / scale;
        match *self {
            Sampler::Random { seed, count, radius } => {
                if count == 0 || !(radius > 0.0) {
                    return Err(invalid("sampler", "random sampler needs count >= 1 and radius > 0"));
                }
                let r = ((radius / h).floor() as i64).min(reach);
                if r < 1 {
                    return Err(invalid("sampler", "radius is below one grid spacing"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|_| {
                        let a = rng.random_range(-r..=r);
                        let b = rng.random_range(-r..=r);
                        let s = rng.random::<f64>() * period;
                        GroupElement::single(s, node(a), node(b))
                    })
                    .collect()
            }
            Sampler::Lattice { spacing, radius } => {
                if !(spacing > 0.0) || !(radius >= spacing) {
                    return Err(invalid("sampler", "lattice needs 0 < spacing <= radius"));
                }
                let stride = ((spacing / h).round() as i64).max(1);
                let r = ((radius / h).floor() as i64).min(reach);
                let n = r / stride;
                let mut out = Vec::new();
                for a in -n..=n {
                    for b in -n..=n {
                        out.push(GroupElement::single(0.0, node(a * stride), node(b * stride))?);
                    }
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Positive,
    Indefinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PDReport {
    pub sample_count: usize,
    pub min_eigenvalue: f64,
    /// Largest eigenvalue of the Gram matrix.
    pub gram_scale: f64,
    pub verdict: Verdict,
    pub sampler_seed: u64,
    pub composition: Composition,
    pub tolerance: f64,
    pub hermiticity_defect: f64,
}

/// Samples elements, builds the Gram matrix and classifies its spectrum:
/// positive iff `min eig >= -tol * max eig`.
pub fn pd_check(phi: &dyn GroupFunction, law: Composition, sampler: &Sampler, tol: f64) -> Result<PDReport> {
    if !(tol >= 0.0) {
        return Err(invalid("tol", "must be nonnegative"));
    }
    let elements = sampler.elements(phi)?;
    let gram = gram_matrix(phi, &elements, law)?;
    let defect = hermiticity_defect(&gram);
    let eig = hermitian_eigenvalues(&hermitian_part(&gram));
    let min = eig.min();
    let scale = eig.max();
    let verdict = if min >= -tol * scale { Verdict::Positive } else { Verdict::Indefinite };
    Ok(PDReport {
        sample_count: elements.len(),
        min_eigenvalue: min,
        gram_scale: scale,
        verdict,
        sampler_seed: sampler.seed(),
        composition: law,
        tolerance: tol,
        hermiticity_defect: defect,
    })
}
