//! Gaussian quantum states evolving under a noncommutative phase-space
//! oscillator, composed with a Markovian thermal-diffusion channel.
//!
//! The state of every mode is carried as first moments plus a covariance
//! matrix in the convention `hbar = 1`, vacuum covariance = identity,
//! coordinate ordering `(Q1, P1, Q2, P2)`.
//!
//! - [`gaussian`]: state representation, constructors, validity checks,
//!   partial trace and Wigner-function evaluation.
//! - [`dynamics`]: gauge constraint, mapped-Hamiltonian coefficients,
//!   effective field and the symplectic propagator.
//! - [`channel`]: closed-form thermal diffusion and composed trajectories.
//! - [`metrics`]: Gaussian fidelity, derivatives and the fidelity-decrease
//!   witness.
//! - [`oracle`]: brute-force cross-checks (phase-space quadrature and
//!   number-basis Uhlmann fidelity), used by the test suites.
//!
//! With the default `parallel` feature, per-time-point and per-grid-row
//! work is spread across a rayon pool. Every routine that parallelises also
//! has a `*_with` variant taking an [`Execution`] so both paths can be
//! compared at runtime.

pub mod channel;
pub mod dynamics;
mod error;
mod exec;
pub mod gaussian;
pub mod metrics;
pub mod oracle;

pub use error::{Error, Result};
pub use exec::Execution;

pub use channel::{
    composed_trajectory, diffuse, ChannelParams, CmScaling, InitialConditions, NcSource,
    TrajectoryConfig, TrajectoryPoint,
};
pub use dynamics::{
    coefficients, evolve_unitary, params_from_b0, propagator, solve_gauge, DerivedCoeffs, Gauge,
    NcParams, Propagator, Units,
};
pub use gaussian::{
    check_bona_fide, make_initial_state, reduce_to_mode, symplectic_form, thermal_state,
    wigner_eval, BonaFide, CovarianceMatrix, FirstMoments, GaussianState, ThermalOccupancy,
};
pub use metrics::{
    fidelity, fidelity_series, nonmarkov_witness, numerical_derivative, FidelitySeries,
    WitnessReport,
};
