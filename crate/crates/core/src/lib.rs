//! Recurrence entanglement purification with a rank-two Bell-basis projector.
//!
//! Two identical copies of a two-qubit state are processed with the local
//! operation `M = |Ψ⁻⟩⟨Ψ⁻| + |Φ⁻⟩⟨Φ⁻|` applied at both locations. One pair is
//! then measured in the computational basis and the survivor is corrected
//! with a local phase/flip gate. The crate provides:
//!
//! * [`bell`]: Bell-basis density matrices, X states, validation and seeded
//!   random state generation.
//! * [`map`]: the closed-form one-round map on general states and on X states.
//! * [`oracle`]: a literal four-qubit simulation of the protocol used to
//!   certify the closed form.
//! * [`convergence`]: purification conditions and attractor classification.
//! * [`fixed_points`]: Newton search, Jacobians and stability of fixed points
//!   of the X-state map.
//! * [`measures`]: concurrence, Bell fidelities and the maximal overlap with
//!   maximally entangled pure states.
//! * [`regions`] and [`worked_examples`]: region scans over the diagonal simplex and
//!   the two worked example families.

pub mod bell;
pub mod convergence;
pub mod eigen;
mod error;
pub mod fixed_points;
pub mod io;
pub mod map;
pub mod measures;
pub mod oracle;
pub mod regions;
pub mod worked_examples;

pub use bell::{BellDensityMatrix, BellVector, Matrix4c, StateKind, XState};
pub use error::{Error, Result};
pub use map::MapOutcome;

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex64;
