//! Linearised small-signal response around a fixed point.
//!
//! A weak signal at detuning `δ` from the pump drives the fluctuations
//! `(δα, δα*)` through the gain matrix `𝒢(ω) = (M + iω)⁻¹`. Homodyne
//! detection with the local oscillator at `ωp − δ` sees a DC quadrature that
//! exists only because of the nonlinearity; with the oscillator at `ωp + δ`
//! it sees the ordinary (empty-cavity-like) response.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DriveConfig, LoSideband, ModelParams};
use crate::steady_state::{FixedPoint, Mat2};

/// Default near-critical mask, as a fraction of `γ²`.
pub const DEFAULT_MASK_FRACTION: f64 = 1e-3;

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// `𝒢(ω)` with the constituents it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainMatrix {
    pub omega: f64,
    pub entries: Mat2,
    /// `G = 2χ α0²`
    pub coupling: Complex64,
    /// `Δ̃ = Δ + 4χ n0`
    pub effective_detuning: f64,
}

impl GainMatrix {
    /// 1-based element access, matching the usual `𝒢_ij` notation.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i - 1][j - 1]
    }
}

/// Closed-form inverse of `M + iω`:
///
/// `𝒢(ω) = [4(Δ̃² − |G|²) + (γ − 2iω)²]⁻¹ · [[−2γ + 4i(ω+Δ̃), 4iG], [−4iG*, −2γ + 4i(ω−Δ̃)]]`
pub fn gain_matrix(omega: f64, fp: &FixedPoint, params: &ModelParams) -> Result<GainMatrix> {
    let gamma = params.gamma;
    let dt = fp.effective_detuning(params);
    let g = fp.coupling(params);
    let i = Complex64::i();
    let lin = Complex64::new(gamma, -2.0 * omega);
    let denom = lin * lin + 4.0 * (dt * dt - g.norm_sqr());
    let scale = gamma * gamma + 4.0 * dt * dt + 4.0 * g.norm_sqr() + 4.0 * omega * omega;
    if denom.norm() <= 1e-14 * scale {
        return Err(Error::CriticalPoint(format!(
            "gain matrix is singular at n0 = {}, omega = {omega}",
            fp.n0
        )));
    }
    let entries = [
        [
            (Complex64::new(-2.0 * gamma, 4.0 * (omega + dt))) / denom,
            (4.0 * i * g) / denom,
        ],
        [
            (-4.0 * i * g.conj()) / denom,
            (Complex64::new(-2.0 * gamma, 4.0 * (omega - dt))) / denom,
        ],
    ];
    Ok(GainMatrix {
        omega,
        entries,
        coupling: g,
        effective_detuning: dt,
    })
}

/// `(λ² − δ²)² + γ²δ²`, the squared modulus of `det(M + iδ)` up to a factor 16.
pub(crate) fn response_denominator(delta: f64, fp: &FixedPoint, params: &ModelParams) -> Result<f64> {
    let a = fp.lambda_sq - delta * delta;
    let b = params.gamma * delta;
    let q = a * a + b * b;
    let floor = 1e-14 * params.gamma * params.gamma;
    if q <= floor * floor {
        return Err(Error::CriticalPoint(format!(
            "linear response diverges at n0 = {} (lambda^2 = {:e}), delta = {delta}",
            fp.n0, fp.lambda_sq
        )));
    }
    Ok(q)
}

/// Gain angle `ν = atan2(−γδ, λ² − δ²)`.
pub fn gain_angle(delta: f64, fp: &FixedPoint, params: &ModelParams) -> f64 {
    (-params.gamma * delta).atan2(fp.lambda_sq - delta * delta)
}

/// Local-oscillator phase `θ = ν − 2φ0` that maximises the lower-sideband signal.
pub fn optimal_phase(delta: f64, fp: &FixedPoint, params: &ModelParams) -> f64 {
    wrap_angle(gain_angle(delta, fp, params) - 2.0 * fp.phi0)
}

/// DC homodyne quadrature for the lower-sideband local oscillator,
///
/// `4ε_s χ n0 [(λ²−δ²) cos(θ+2φ0) − γδ sin(θ+2φ0)] / [(λ²−δ²)² + γ²δ²]`.
pub fn dc_signal(fp: &FixedPoint, params: &ModelParams, drive: &DriveConfig) -> Result<f64> {
    drive.validate()?;
    let delta = drive.signal_detuning;
    let q = response_denominator(delta, fp, params)?;
    let psi = drive.lo_phase + 2.0 * fp.phi0;
    let a = fp.lambda_sq - delta * delta;
    let amp = 4.0 * drive.signal_amplitude * params.chi * fp.n0;
    Ok(amp * (a * psi.cos() - params.gamma * delta * psi.sin()) / q)
}

/// The same quadrature from gain-matrix elements,
/// `−iε_s {𝒢12(δ) e^{iθ} − 𝒢21(−δ) e^{−iθ}}`.
pub fn dc_signal_from_gain_matrix(
    fp: &FixedPoint,
    params: &ModelParams,
    drive: &DriveConfig,
) -> Result<f64> {
    drive.validate()?;
    let delta = drive.signal_detuning;
    let plus = gain_matrix(delta, fp, params)?;
    let minus = gain_matrix(-delta, fp, params)?;
    let rot = Complex64::from_polar(1.0, drive.lo_phase);
    let v = -Complex64::i()
        * drive.signal_amplitude
        * (plus.element(1, 2) * rot - minus.element(2, 1) * rot.conj());
    Ok(v.re)
}

/// Peak lower-sideband gain `g = 4ε_s χ n0 / √((λ²−δ²)² + γ²δ²)`.
pub fn optimal_gain(
    delta: f64,
    fp: &FixedPoint,
    signal_amplitude: f64,
    params: &ModelParams,
) -> Result<f64> {
    if signal_amplitude.is_nan() || signal_amplitude < 0.0 {
        return Err(Error::Domain(format!(
            "signal amplitude must be non-negative, got {signal_amplitude}"
        )));
    }
    let q = response_denominator(delta, fp, params)?;
    Ok(4.0 * signal_amplitude * params.chi * fp.n0 / q.sqrt())
}

/// Response of the linear, unpumped resonator, `2ε_s / √(γ²/4 + δ²)`.
pub fn empty_cavity_response(delta: f64, signal_amplitude: f64, gamma: f64) -> f64 {
    2.0 * signal_amplitude / (gamma * gamma / 4.0 + delta * delta).sqrt()
}

/// DC quadrature for the upper-sideband local oscillator,
/// `iε_s (𝒢11(δ) e^{iθ} − 𝒢22(−δ) e^{−iθ})`.
pub fn upper_sideband_dc_signal(
    fp: &FixedPoint,
    params: &ModelParams,
    drive: &DriveConfig,
) -> Result<f64> {
    drive.validate()?;
    let delta = drive.signal_detuning;
    let plus = gain_matrix(delta, fp, params)?;
    let minus = gain_matrix(-delta, fp, params)?;
    let rot = Complex64::from_polar(1.0, drive.lo_phase);
    let v = Complex64::i()
        * drive.signal_amplitude
        * (plus.element(1, 1) * rot - minus.element(2, 2) * rot.conj());
    Ok(v.re)
}

/// Phase that maximises [`upper_sideband_dc_signal`]: the signal equals
/// `−2ε_s Im(𝒢11(δ) e^{iθ})`, largest when `arg 𝒢11 + θ = −π/2`.
pub fn upper_sideband_optimal_phase(
    delta: f64,
    fp: &FixedPoint,
    params: &ModelParams,
) -> Result<f64> {
    let g11 = gain_matrix(delta, fp, params)?.element(1, 1);
    Ok(wrap_angle(-std::f64::consts::FRAC_PI_2 - g11.arg()))
}

/// Homodyne DC signal for whichever sideband `drive` selects.
pub fn homodyne_signal(fp: &FixedPoint, params: &ModelParams, drive: &DriveConfig) -> Result<f64> {
    match drive.lo_sideband {
        LoSideband::Lower => dc_signal(fp, params, drive),
        LoSideband::Upper => upper_sideband_dc_signal(fp, params, drive),
    }
}

/// Near-critical mask on `λ²`. Inside it the linearisation is not trusted and
/// results are flagged rather than rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalMask {
    pub lambda_sq_min: f64,
}

impl CriticalMask {
    pub fn new(lambda_sq_min: f64) -> Self {
        Self { lambda_sq_min }
    }

    /// `λ²_min = 10⁻³ γ²`
    pub fn for_params(params: &ModelParams) -> Self {
        Self::new(DEFAULT_MASK_FRACTION * params.gamma * params.gamma)
    }

    pub fn is_near_critical(&self, fp: &FixedPoint) -> bool {
        fp.lambda_sq < self.lambda_sq_min
    }
}

/// Optimal-phase gain at one `(δ, fixed point)`, absolute and per unit signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainReport {
    pub delta: f64,
    pub nu: f64,
    pub theta: f64,
    pub gain: f64,
    pub gain_per_unit_signal: f64,
    pub near_critical: bool,
}

pub fn gain_report(
    delta: f64,
    fp: &FixedPoint,
    signal_amplitude: f64,
    params: &ModelParams,
    mask: &CriticalMask,
) -> Result<GainReport> {
    let per_unit = optimal_gain(delta, fp, 1.0, params)?;
    Ok(GainReport {
        delta,
        nu: gain_angle(delta, fp, params),
        theta: optimal_phase(delta, fp, params),
        gain: per_unit * signal_amplitude,
        gain_per_unit_signal: per_unit,
        near_critical: mask.is_near_critical(fp),
    })
}
