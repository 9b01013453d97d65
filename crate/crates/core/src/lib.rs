//! Small-signal gain and quantum noise of a pumped Kerr (Duffing) resonator
//! used as a bifurcation amplifier.
//!
//! The pipeline runs bottom-up:
//!
//! - [`model`]: device constants and rotating-frame parameters,
//! - [`steady_state`]: fixed points of the pumped resonator and their stability,
//! - [`response`]: the gain matrix and homodyne signal of a weak detuned drive,
//! - [`noise`]: normally-ordered output spectra, SNR and minimum detectable force,
//! - [`verify`]: independent numerical oracles for the closed forms,
//! - [`sweep`]: tabular datasets over pump, detuning and occupation grids.
//!
//! ```
//! use duffamp_core::{fixed_points, ModelParams};
//!
//! let params = ModelParams::new(2.0, -2.0, 1.0).unwrap();
//! let fps = fixed_points(0.95f64.sqrt(), &params).unwrap();
//! assert_eq!(fps.len(), 3);
//! assert!(!fps[1].stable);
//! ```

pub mod error;
pub mod model;
pub mod noise;
pub mod response;
pub mod steady_state;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    alpha_from_geometry, chi_from_alpha, DriveConfig, LoSideband, ModelParams, PhysicalParams, HBAR,
};
pub use noise::{
    dc_noise_at_gain_phase, dc_noise_closed_form, min_force_empty, min_force_nonlinear,
    output_spectrum, snr, MinForce, NoiseResult,
};
pub use response::{
    dc_signal, empty_cavity_response, gain_angle, gain_matrix, optimal_gain, optimal_phase,
    upper_sideband_dc_signal, CriticalMask, GainMatrix,
};
pub use steady_state::{
    bistability_condition, fixed_points, pump_intensity, response_curve, stability_eigenvalues,
    turning_points, Branch, FixedPoint, Mat2, ResponseCurve,
};
pub use sweep::{
    branch_partition, run_sweep, BranchFilter, BranchPartition, Dataset, Grid, Quantity,
    SweepMetadata, SweepSpec, ThetaMode,
};
pub use verify::{run_all as run_oracles, OracleReport};
