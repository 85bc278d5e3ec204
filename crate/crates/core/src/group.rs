//! The Heisenberg-Weyl group `H_n = R x R^n x R^n`.
//!
//! Elements are stored in the coordinates `(s, eta, xi)`, where `s` is the
//! central phase coordinate and `(eta, xi)` are the phase-space translation
//! coordinates. The product is
//!
//! ```text
//! (s, eta, xi) . (s', eta', xi') = (s + s' + w/2, eta + eta', xi + xi')
//! ```
//!
//! with `w = xi . eta' - eta . xi'` (see [`symplectic_form`]).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// A point of the Heisenberg-Weyl group with `n` degrees of freedom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    s: f64,
    eta: Vec<f64>,
    xi: Vec<f64>,
}

impl GroupElement {
    pub fn new(s: f64, eta: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if eta.is_empty() {
            return Err(crate::error::invalid("n", "at least one degree of freedom"));
        }
        if eta.len() != xi.len() {
            return Err(Error::DimensionMismatch {
                expected: eta.len(),
                found: xi.len(),
            });
        }
        if !s.is_finite() || eta.iter().chain(&xi).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { s, eta, xi })
    }

    /// Single degree of freedom element `(s, eta, xi)`.
    pub fn single(s: f64, eta: f64, xi: f64) -> Result<Self> {
        Self::new(s, vec![eta], vec![xi])
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "H_n needs n >= 1");
        Self {
            s: 0.0,
            eta: vec![0.0; n],
            xi: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.eta.len()
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// `(eta, xi)` for `n = 1`; panics otherwise.
    pub fn planar(&self) -> (f64, f64) {
        assert_eq!(self.n(), 1, "planar() requires a single degree of freedom");
        (self.eta[0], self.xi[0])
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        multiply(self, other)
    }

    pub fn inverse(&self) -> Self {
        inverse(self)
    }
}

/// `(eta, xi)^T omega (eta', xi') = xi . eta' - eta . xi'` for
/// `omega = [[0, -1], [1, 0]]`.
pub fn symplectic_form(a: (&[f64], &[f64]), b: (&[f64], &[f64])) -> Result<f64> {
    let n = a.0.len();
    for len in [a.1.len(), b.0.len(), b.1.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let mut w = 0.0;
    for j in 0..n {
        w += a.1[j] * b.0[j] - a.0[j] * b.1[j];
    }
    Ok(w)
}

pub fn multiply(g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    let w = symplectic_form((&g.eta, &g.xi), (&h.eta, &h.xi))?;
    Ok(GroupElement {
        s: g.s + h.s + 0.5 * w,
        eta: g.eta.iter().zip(&h.eta).map(|(a, b)| a + b).collect(),
        xi: g.xi.iter().zip(&h.xi).map(|(a, b)| a + b).collect(),
    })
}

pub fn inverse(g: &GroupElement) -> GroupElement {
    GroupElement {
        s: -g.s,
        eta: g.eta.iter().map(|v| -v).collect(),
        xi: g.xi.iter().map(|v| -v).collect(),
    }
}

/// Constant prefactor of the rescaled Haar measure on
/// `S_n = [0, 2 pi / hbar] x R^{2n}`: `[(2 pi)^2 (2 pi hbar)^(n-1)]^-1`.
pub fn haar_weight(hbar: f64, n: usize) -> Result<f64> {
    require_positive("hbar", hbar)?;
    if n == 0 {
        return Err(crate::error::invalid("n", "at least one degree of freedom"));
    }
    let exponent = n as i32 - 1;
    Ok(1.0 / ((2.0 * PI).powi(2) * (2.0 * PI * hbar).powi(exponent)))
}
