//! Linearly coupled quantum harmonic oscillators with time-dependent
//! couplings and an optional classical drive.
//!
//! The analytic layer builds evolved states in closed form from the normal
//! modes of the coupling matrix: binomial states for two modes, product
//! coherent states under a drive, and multinomial spreading over three-mode
//! stars and chains. [`oracle`] integrates the same Hamiltonians by brute
//! force so every closed form can be checked.
//!
//! Units have `ħ = 1`; frequencies, couplings and drive amplitudes share one
//! angular-frequency unit. Everything is generic over [`Real`] (`f32` or
//! `f64`); the `*F64` aliases cover the usual case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod coupling;
pub mod driven;
pub mod error;
pub mod linalg;
pub mod multimode;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod two_mode;

pub use coupling::{CouplingSchedule, PhaseIntegrals, TwoModeSystem, DEFAULT_TOL};
pub use driven::{DriveFunctionals, DriveWaveform};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use multimode::{ChainSystem, OccupationDistribution, SpectralDecomposition, ThreeModeSystem};
pub use oracle::{BosonicNetwork, ComparisonReport, SectorBasis, SectorStateVector, TruncatedState};
pub use scalar::Real;
pub use two_mode::{BinomialStateCoefficients, ReducedDensityMatrix};

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;

pub type CouplingScheduleF64 = CouplingSchedule<f64>;
pub type TwoModeSystemF64 = TwoModeSystem<f64>;
pub type DriveWaveformF64 = DriveWaveform<f64>;
pub type ThreeModeSystemF64 = ThreeModeSystem<f64>;
pub type ChainSystemF64 = ChainSystem<f64>;
pub type SectorStateVectorF64 = SectorStateVector<f64>;
pub type TruncatedStateF64 = TruncatedState<f64>;
pub type MatrixF64 = Matrix<f64>;

pub type CouplingScheduleF32 = CouplingSchedule<f32>;
pub type TwoModeSystemF32 = TwoModeSystem<f32>;
pub type DriveWaveformF32 = DriveWaveform<f32>;
pub type ThreeModeSystemF32 = ThreeModeSystem<f32>;
pub type ChainSystemF32 = ChainSystem<f32>;
pub type SectorStateVectorF32 = SectorStateVector<f32>;
