//! Structure-preserving numerics on duals of Lie algebras.
//!
//! The crate provides four engines plus the shared machinery they sit on:
//!
//! * [`algebra`] — finite-dimensional Lie algebras given by structure
//!   constants (bracket, pairing, coadjoint action) and a discretized
//!   semidirect-product algebra of periodic vector fields with advected
//!   scalars.
//! * [`lp`] — generic Lie-Poisson time evolution `dμ/dt = ad*_{∂H/∂μ} μ`
//!   with conservation diagnostics.
//! * [`phase`] — transport of a synchronicity phase field on a periodic
//!   1-D grid by the method of characteristics: canonical momentum from
//!   the phase gradient, emergence-density continuity, reference-phase
//!   (shadow) frequency fields, and emergence-event detection.
//! * [`functionals`] — polynomial functionals of the momentum field and
//!   its derivatives, density-weighted variational derivatives, and the
//!   associated null-Lagrangian identity.
//! * [`fluids`] — a 1-D compressible isentropic fluid and 2-D
//!   incompressible flow via spectral divergence-free projection.
//!
//! All state types are plain values and all operations are pure
//! functions, so independent runs may execute concurrently without
//! shared mutable state.

pub mod algebra;
pub mod error;
pub mod fluids;
pub mod functionals;
pub mod grid;
pub mod lp;
pub mod phase;
pub mod rng;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
