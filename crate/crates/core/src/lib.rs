//! Simulation and analysis toolkit for the conditional beam-splitter (CBS)
//! gate of a trapped ion: one spin qubit coupled to up to three truncated
//! motional modes.
//!
//! The crate is organised bottom-up:
//!
//! - [`fockspace`]: layouts, states and operators on the truncated space.
//! - [`generators`]: Hamiltonians and unitaries (CBS, beam splitter, spin
//!   rotations, displacements, sidebands, CSWAP composition).
//! - [`noise`]: Lindblad master-equation layer and noise calibration.
//! - [`circuit`]: timed gate sequences and the simulator that runs them.
//! - [`protocols`]: complete experiments and their estimators.
//! - [`seqlang`]: a line-based text language for gate sequences.
//!
//! Units: time in seconds, rates in s⁻¹, angular frequencies in rad/s.

pub mod circuit;
mod error;
pub mod fockspace;
pub mod generators;
mod linalg;
pub mod noise;
pub mod protocols;
pub mod seqlang;

pub use error::{Error, Result};
pub use fockspace::{Factor, HybridState, LinearOperator, Mode, ModeLayout, OperatorKind, Spin};
pub use generators::{CbsParams, JointSidebandParams, Preparation, RotationParams, SidebandKind};
pub use noise::NoiseParams;
pub use protocols::{ExperimentResult, Sampling, ShotPlan};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
