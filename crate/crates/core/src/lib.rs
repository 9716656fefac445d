//! Numerical laboratory for classical mechanics obtained as constrained
//! quantum dynamics of algebraic models.
//!
//! * [`algebra`]: structure constants, coadjoint orbits, Lie–Poisson flows,
//!   matrix representations and stability-group averaging.
//! * [`barrier`]: square-barrier transmission in ideal and Gaussian-smeared
//!   classical mechanics and in quantum mechanics.
//! * [`constrained`]: dynamics restricted to coherent-state families.
//! * [`rotor`]: the asymmetric top from the rotor model algebra.
//! * [`schrodinger`]: Crank–Nicolson wave-packet solver used as an oracle.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod barrier;
pub mod constrained;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod rotor;
pub mod schrodinger;

pub use error::{Error, Result};
