//! Output noise of the homodyne-detected transducer field.
//!
//! Conventions: the transducer output is `a_out = √γ_T a − a_in`, with the
//! transducer rate folded into the total damping `γ`. The input field is in
//! the vacuum (zero-temperature bath), the detected quadrature is
//! `X_θ = a e^{i(θ + ω_LO t)} + h.c.` with `[X_θ, X_{θ+π/2}] = 2i`, and the
//! spectra here are normally ordered: the vacuum floor (1 in these units) is
//! subtracted, so `S < 0` means squeezing and `S + 1` is the total noise.
//!
//! All spectra are for the lower-sideband oscillator `ω_LO = ωp − δ`; the
//! upper sideband is the same quadrature with `δ → −δ`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DriveConfig, LoSideband, ModelParams};
use crate::response::{
    dc_signal, gain_angle, gain_matrix, response_denominator, upper_sideband_dc_signal, wrap_angle,
};
use crate::steady_state::FixedPoint;

/// Imaginary residue tolerated in a spectrum before it is rejected.
pub const REALNESS_TOL: f64 = 1e-10;
/// `S + 1` below this is flagged unphysical.
pub const UNPHYSICAL_TOL: f64 = -1e-9;

/// The four-term gain-matrix expression for `S_θ(ω, δ)` before taking the
/// real part:
///
/// `γ² ( e^{2iθ}(𝒢11(ω−δ) + 1/γ) 𝒢12(δ−ω) + 𝒢21(δ−ω) 𝒢12(ω−δ)
///     + 𝒢21(ω+δ) 𝒢12(−ω−δ) + e^{−2iθ} 𝒢21(ω+δ)(𝒢22(−ω−δ) + 1/γ) )`
///
/// It is real at `ω = 0` and whenever `δ = 0`.
pub fn output_spectrum_complex(
    omega: f64,
    delta: f64,
    theta: f64,
    fp: &FixedPoint,
    params: &ModelParams,
) -> Result<Complex64> {
    let gamma = params.gamma;
    let a = gain_matrix(omega - delta, fp, params)?;
    let b = gain_matrix(delta - omega, fp, params)?;
    let c = gain_matrix(omega + delta, fp, params)?;
    let d = gain_matrix(-omega - delta, fp, params)?;
    let rot = Complex64::from_polar(1.0, 2.0 * theta);
    let inv = 1.0 / gamma;
    let sum = rot * (a.element(1, 1) + inv) * b.element(1, 2)
        + b.element(2, 1) * a.element(1, 2)
        + c.element(2, 1) * d.element(1, 2)
        + rot.conj() * c.element(2, 1) * (d.element(2, 2) + inv);
    Ok(sum * (gamma * gamma))
}

/// Normally-ordered output spectrum `S_θ(ω, δ)`.
///
/// Fails with [`Error::NonRealSpectrum`] if the four-term sum has an imaginary
/// part above `REALNESS_TOL·(1 + |S|)`, which happens off `ω = 0` when `δ ≠ 0`.
pub fn output_spectrum(
    omega: f64,
    delta: f64,
    theta: f64,
    fp: &FixedPoint,
    params: &ModelParams,
) -> Result<f64> {
    let s = output_spectrum_complex(omega, delta, theta, fp, params)?;
    if s.im.abs() > REALNESS_TOL * (1.0 + s.re.abs()) {
        return Err(Error::NonRealSpectrum { re: s.re, im: s.im });
    }
    Ok(s.re)
}

/// Closed form of `S_θ(0, δ)`:
///
/// `[2γ²|G|² + γ(−iG e^{2iθ}((γ/2 − iΔ̃)² + δ² + |G|²) + c.c.)] / [(λ²−δ²)² + γ²δ²]`
pub fn dc_noise_closed_form(
    delta: f64,
    theta: f64,
    fp: &FixedPoint,
    params: &ModelParams,
) -> Result<f64> {
    let gamma = params.gamma;
    let q = response_denominator(delta, fp, params)?;
    let g = fp.coupling(params);
    let dt = fp.effective_detuning(params);
    let half = Complex64::new(gamma / 2.0, -dt);
    let k = half * half + delta * delta + g.norm_sqr();
    let cross = -Complex64::i() * g * Complex64::from_polar(1.0, 2.0 * theta) * k;
    Ok((2.0 * gamma * gamma * g.norm_sqr() + gamma * 2.0 * cross.re) / q)
}

/// `S_θ(0, δ)` at the gain-optimal phase `θ = ν − 2φ0`:
///
/// `γ[8χ²n0²γ + 4χn0(δ² − λ² + γ²/2) sin ψ − 4χn0 γ Δ̃ cos ψ] / [(λ²−δ²)² + γ²δ²]`
///
/// with `ψ = 2(ν − φ0)`, the phase of `G e^{2iθ}` at that `θ`.
pub fn dc_noise_at_gain_phase(delta: f64, fp: &FixedPoint, params: &ModelParams) -> Result<f64> {
    let gamma = params.gamma;
    let chi_n = params.chi * fp.n0;
    let q = response_denominator(delta, fp, params)?;
    let psi = wrap_angle(2.0 * (gain_angle(delta, fp, params) - fp.phi0));
    let dt = fp.effective_detuning(params);
    let num = 8.0 * chi_n * chi_n * gamma
        + 4.0 * chi_n * (delta * delta - fp.lambda_sq + gamma * gamma / 2.0) * psi.sin()
        - 4.0 * chi_n * gamma * dt * psi.cos();
    Ok(gamma * num / q)
}

/// Phase minimising `S_θ(0, δ)` and the minimum value.
///
/// `S_θ = A + 2γ Re(−iGK e^{2iθ}) / Q`, so the minimum is `A − 2γ|GK|/Q`.
pub fn min_noise_phase(delta: f64, fp: &FixedPoint, params: &ModelParams) -> Result<(f64, f64)> {
    let gamma = params.gamma;
    let q = response_denominator(delta, fp, params)?;
    let g = fp.coupling(params);
    let dt = fp.effective_detuning(params);
    let half = Complex64::new(gamma / 2.0, -dt);
    let z = -Complex64::i() * g * (half * half + delta * delta + g.norm_sqr());
    let theta = wrap_angle((std::f64::consts::PI - z.arg()) / 2.0);
    let s = (2.0 * gamma * gamma * g.norm_sqr() - 2.0 * gamma * z.norm()) / q;
    Ok((theta, s))
}

/// A spectrum value with the vacuum floor restored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseResult {
    pub spectrum: f64,
    pub total: f64,
    pub theta: f64,
    pub delta: f64,
    pub omega: f64,
    /// `S + 1 < −1e-9`: the linearisation has been pushed past validity.
    pub unphysical: bool,
}

pub fn noise_result(
    omega: f64,
    delta: f64,
    theta: f64,
    fp: &FixedPoint,
    params: &ModelParams,
) -> Result<NoiseResult> {
    let spectrum = output_spectrum(omega, delta, theta, fp, params)?;
    let total = spectrum + 1.0;
    Ok(NoiseResult {
        spectrum,
        total,
        theta,
        delta,
        omega,
        unphysical: total < UNPHYSICAL_TOL,
    })
}

/// DC noise seen by the configured oscillator sideband at phase `drive.lo_phase`.
pub fn homodyne_dc_noise(fp: &FixedPoint, params: &ModelParams, drive: &DriveConfig) -> Result<f64> {
    let delta = match drive.lo_sideband {
        LoSideband::Lower => drive.signal_detuning,
        LoSideband::Upper => -drive.signal_detuning,
    };
    output_spectrum(0.0, delta, drive.lo_phase, fp, params)
}

/// `SNR = |signal|² / (S + 1)`.
///
/// The signal is the intracavity DC quadrature (no `√γ` output factor); this
/// is the normalisation under which the empty resonator reaches SNR = 1 at
/// `ε_s = ½√(γ²/4 + δ²)`.
pub fn snr(fp: &FixedPoint, params: &ModelParams, drive: &DriveConfig) -> Result<f64> {
    drive.validate()?;
    let signal = match drive.lo_sideband {
        LoSideband::Lower => dc_signal(fp, params, drive)?,
        LoSideband::Upper => upper_sideband_dc_signal(fp, params, drive)?,
    };
    let noise = homodyne_dc_noise(fp, params, drive)?;
    Ok(signal * signal / (noise + 1.0))
}

/// Minimum detectable force of the empty resonator, `½√(γ²/4 + δ²)`.
pub fn min_force_empty(delta: f64, gamma: f64) -> f64 {
    0.5 * (gamma * gamma / 4.0 + delta * delta).sqrt()
}

/// Squared minimum detectable force from the nonlinear quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinForce {
    pub eps_s_min_sq: f64,
    pub unphysical: bool,
}

impl MinForce {
    /// `ε_s^min`, or `None` when the squared value is negative.
    pub fn eps_s_min(&self) -> Option<f64> {
        (self.eps_s_min_sq >= 0.0).then(|| self.eps_s_min_sq.sqrt())
    }
}

/// `(ε_s^min)² = γ²/4 [ (8χ²n0² + λ²)/(γ²/4 + λ² + 4χ²n0²) + 2χ Re(−iα0²/(γ/2 − iΔ̃)) ]`
///
/// Derived for operation on the gain ridge `δ = λ` close to the switching
/// point (`λ → 0`); evaluated as is elsewhere. Negative values are returned
/// with `unphysical` set, never clamped.
pub fn min_force_nonlinear(fp: &FixedPoint, params: &ModelParams) -> Result<MinForce> {
    if !fp.stable {
        return Err(Error::UnstableFixedPoint {
            n0: fp.n0,
            max_re_lambda: -fp.decay_margin(),
        });
    }
    let gamma = params.gamma;
    let quarter = gamma * gamma / 4.0;
    let cn = params.chi * fp.n0;
    let ratio = (8.0 * cn * cn + fp.lambda_sq) / (quarter + fp.lambda_sq + 4.0 * cn * cn);
    let dt = fp.effective_detuning(params);
    let cross = -Complex64::i() * fp.alpha0 * fp.alpha0 / Complex64::new(gamma / 2.0, -dt);
    let value = quarter * (ratio + 2.0 * params.chi * cross.re);
    Ok(MinForce {
        eps_s_min_sq: value,
        unphysical: value < 0.0,
    })
}
