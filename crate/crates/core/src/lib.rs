//! Numerical toolkit for integrable Hamiltonian systems on T*S¹, T*S² and
//! T*SO(3): Poisson commutation, minimax critical values, singleton checks on
//! critical fibers, and sampled certificates for graph-shift displacement.
//!
//! Every verdict produced here is sampling based. Certificates record the
//! grid density and seed they were checked on.

pub mod brackets;
pub mod critical;
pub mod displacement;
pub mod dynamics;
pub mod error;
pub mod fiberscan;
pub mod geometry;
pub mod optim;
pub mod sampling;
pub mod shift;
pub mod systems;

pub use brackets::{bracket, verify_commutation, CommutationReport, PhaseField, PhaseGradient};
pub use critical::{CriticalReport, SigmaKind, SigmaSet};
pub use displacement::{DisplacementCertificate, FiberStatus};
pub use dynamics::{ConservationReport, FlowSpec, Method};
pub use error::{Error, Result};
pub use fiberscan::FiberSample;
pub use geometry::{
    differential_norm, graph_shift, inverse_legendre, legendre, Config, ConfigurationSpace,
    FiberVec, FnScalar, Mat3, PhasePoint, ScalarField, SpaceKind, Vec3,
};
pub use shift::{Basis, ShiftFunction};
pub use systems::IntegrableSystem;
