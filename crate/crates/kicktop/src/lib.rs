//! Simulation library for the quantum kicked top as a multi-qubit system.
//!
//! The library covers four layers:
//!
//! - [`spin`]: angular-momentum operators, rotation/torsion factors and
//!   spin-coherent states in the (2j+1)-dimensional symmetric subspace.
//! - [`classical`]: the classical kicked-top map on the unit sphere, phase
//!   portraits, and bifurcation (stability-loss) scans of periodic cycles.
//! - [`reduction`] and [`correlations`]: one- and two-qubit reduced density
//!   matrices of permutation-symmetric states, quantum discord, geometric
//!   discord and the Meyer-Wallach Q measure.
//! - [`dynamics`] and [`rmt`]: Floquet evolution, time-averaged correlation
//!   sweeps in kick strength and in j, power-law fits, and block-COE
//!   random-matrix baselines with ensemble eigenvector statistics.
//!
//! All numerical code is generic over the real scalar type through the
//! [`scalar::Real`] trait (`f32` or `f64`); the concrete aliases below pin
//! the `f64` instantiations that the CLI and the test suites use.

pub mod classical;
pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod numfmt;
pub mod reduction;
pub mod rmt;
pub mod scalar;
pub mod spin;

pub use error::{Error, Result};
pub use scalar::Real;
pub use spin::SpinQuantumNumber;

/// `f64` operator set.
pub type OperatorSet64 = spin::OperatorSet<f64>;
/// `f64` symmetric state.
pub type SymmetricState64 = spin::SymmetricState<f64>;
/// `f64` point on the classical sphere.
pub type ClassicalPoint64 = classical::ClassicalPoint<f64>;
/// `f64` two-qubit reduced density matrix.
pub type TwoQubitDensityMatrix64 = reduction::TwoQubitDensityMatrix<f64>;
/// `f64` one-qubit reduced density matrix.
pub type OneQubitDensityMatrix64 = reduction::OneQubitDensityMatrix<f64>;
/// `f64` Bloch decomposition of a two-qubit state.
pub type BlochForm64 = correlations::BlochForm<f64>;
/// `f64` correlation-measure triple.
pub type CorrelationValues64 = correlations::CorrelationValues<f64>;
/// `f64` Floquet operator.
pub type FloquetOperator64 = dynamics::FloquetOperator<f64>;
