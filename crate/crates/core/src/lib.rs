//! Two-particle double-slit simulator.
//!
//! Evaluates entangled and unentangled two-particle Gaussian slit wave
//! functions, integrates their Bohmian (pilot-wave) trajectories, and computes
//! the matching standard quantum-mechanical detection statistics by
//! quadrature, so that individual-level and ensemble-level predictions can be
//! compared against closed-form oracles.
//!
//! Units are natural by default (`hbar = mass = sigma0 = 1`); every length,
//! time and velocity is expressed in those units.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod guidance;
pub mod integrator;
pub mod oracles;
pub mod pattern;
pub mod quadrature;
pub mod sampling;
pub mod sqm;
pub mod wavefunction;

pub use config::{
    derive_kinematics, validate_regime, Kinematics, PhysicalConfig, RegimeFinding, Scenario, SourceSpec, Strictness,
    WaveKind,
};
pub use ensemble::{run_ensemble, sample_initial, selective_filter, DetectionRecord, EnsembleOptions};
pub use error::{Error, Result};
pub use guidance::{com_velocity, velocity, VelocityPair};
pub use integrator::{integrate_trajectory, IntegratorOptions, Trajectory, TrajectoryStatus};
pub use pattern::{compare_patterns, histogram, measure_gap, Divergence, Gap, Pattern, Projection};
pub use sqm::{QuadratureGrid, QuadratureRule, SqmPredictor};
pub use wavefunction::{ConfigurationPoint, Slit, WaveFunction};

/// Version string of the CSV/JSON output schemas.
pub const SCHEMA_VERSION: &str = "1.0";
