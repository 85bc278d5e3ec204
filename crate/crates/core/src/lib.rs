//! Characteristic functions on the Heisenberg group: quantum states as
//! positive-definite functions, their inversion, and the classical limit.

pub mod climit;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod group;
pub mod io;
pub mod linalg;
pub mod observables;
pub mod positivity;
pub mod repr;
pub mod special;
pub mod states;
pub mod transform;

pub use error::{Error, Result};
