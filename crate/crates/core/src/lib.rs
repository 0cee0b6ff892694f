//! Collapse dynamics from an optimization principle over evolution paths.
//!
//! The library measures how far a candidate evolution deviates from the
//! Schrodinger flow, fixes the phase gauge that makes the deviation
//! minimal, integrates it into an action, and derives branch selection
//! statistics from that action. On top of the state-space layer sit the
//! gravitational estimators (collapse timescales, self-energy comparisons)
//! and a radial self-gravitating solver.
//!
//! All numerics are generic over the scalar precision through [`scalar::Real`];
//! concrete `f64` aliases live at the crate root.

// `!(x > 0)` rejects NaN where `x <= 0` would accept it; generic scalars
// carry no compound assignment; index loops mirror the discretised
// formulas they implement.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::assign_op_pattern,
    clippy::needless_range_loop
)]

pub mod born;
pub mod error;
pub mod gravity;
pub mod hilbert;
pub mod paths;
pub mod quad;
pub mod residual;
pub mod scalar;
pub mod sn;
pub mod units;

pub use error::{Error, Result};

/// Double precision state vector.
pub type StateVector64 = hilbert::StateVector<f64>;
/// Single precision state vector.
pub type StateVector32 = hilbert::StateVector<f32>;
/// Double precision operator.
pub type Operator64 = hilbert::Operator<f64>;
/// Single precision operator.
pub type Operator32 = hilbert::Operator<f32>;
/// Double precision evolution path.
pub type EvolutionPath64 = residual::EvolutionPath<f64>;
/// Single precision evolution path.
pub type EvolutionPath32 = residual::EvolutionPath<f32>;
