//! Device constants and the rotating-frame model parameters.
//!
//! Everything downstream works in "rate units": frequencies, detunings and
//! drive amplitudes share one arbitrary reference rate. Laboratory constants
//! (SI) enter only through [`PhysicalParams`], which converts once.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Reduced Planck constant, CODATA 2018 (exact), in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Nonlinearity of a clamped beam from its critical amplitude and quality factor,
/// `α = 2√3 / (9 a_c² Q)`, in 1/m².
pub fn alpha_from_geometry(critical_amplitude: f64, quality_factor: f64) -> Result<f64> {
    ensure_finite("critical amplitude", critical_amplitude)?;
    ensure_finite("quality factor", quality_factor)?;
    if critical_amplitude <= 0.0 {
        return Err(Error::Domain(format!(
            "critical amplitude must be positive, got {critical_amplitude}"
        )));
    }
    if quality_factor <= 0.0 {
        return Err(Error::Domain(format!(
            "quality factor must be positive, got {quality_factor}"
        )));
    }
    Ok(2.0 * 3f64.sqrt() / (9.0 * critical_amplitude * critical_amplitude * quality_factor))
}

/// Kerr dispersion `χ = 3ħα / (8 m*)` in 1/s.
pub fn chi_from_alpha(alpha: f64, effective_mass: f64) -> Result<f64> {
    ensure_finite("nonlinearity", alpha)?;
    ensure_finite("effective mass", effective_mass)?;
    if effective_mass <= 0.0 {
        return Err(Error::Domain(format!(
            "effective mass must be positive, got {effective_mass}"
        )));
    }
    Ok(3.0 * HBAR * alpha / (8.0 * effective_mass))
}

/// Laboratory-frame constants of a nanomechanical beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// kg
    pub effective_mass: f64,
    /// rad/s
    pub linear_frequency: f64,
    pub quality_factor: f64,
    /// m
    pub critical_amplitude: f64,
    /// 1/m², derived from `critical_amplitude` and `quality_factor`.
    pub nonlinearity: f64,
    /// 1/s, derived from `nonlinearity` and `effective_mass`.
    pub dispersion: f64,
}

impl PhysicalParams {
    pub fn new(
        effective_mass: f64,
        linear_frequency: f64,
        quality_factor: f64,
        critical_amplitude: f64,
    ) -> Result<Self> {
        ensure_finite("linear frequency", linear_frequency)?;
        if linear_frequency <= 0.0 {
            return Err(Error::Domain(format!(
                "linear frequency must be positive, got {linear_frequency}"
            )));
        }
        let nonlinearity = alpha_from_geometry(critical_amplitude, quality_factor)?;
        let dispersion = chi_from_alpha(nonlinearity, effective_mass)?;
        Ok(Self {
            effective_mass,
            linear_frequency,
            quality_factor,
            critical_amplitude,
            nonlinearity,
            dispersion,
        })
    }

    /// Amplitude decay rate implied by the quality factor, `ω0 / Q`.
    pub fn decay_rate(&self) -> f64 {
        self.linear_frequency / self.quality_factor
    }

    /// Rotating-frame model for a pump detuned by `pump_detuning = ω0 − ωp`.
    pub fn to_model(&self, pump_detuning: f64) -> Result<ModelParams> {
        ModelParams::new(self.decay_rate(), pump_detuning, self.dispersion)
    }
}

/// Rotating-frame constants that every formula in the crate is written in.
///
/// `gamma` is the total damping rate and already includes the transducer
/// channel; `transducer_decay` is carried for bookkeeping only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub gamma: f64,
    /// `Δ = ω0 − ωp`
    pub pump_detuning: f64,
    pub chi: f64,
    #[serde(default)]
    pub bath_occupancy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transducer_decay: Option<f64>,
}

impl ModelParams {
    pub fn new(gamma: f64, pump_detuning: f64, chi: f64) -> Result<Self> {
        let params = Self {
            gamma,
            pump_detuning,
            chi,
            bath_occupancy: 0.0,
            transducer_decay: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_bath_occupancy(mut self, bath_occupancy: f64) -> Result<Self> {
        self.bath_occupancy = bath_occupancy;
        self.validate()?;
        Ok(self)
    }

    pub fn with_transducer_decay(mut self, transducer_decay: f64) -> Result<Self> {
        self.transducer_decay = Some(transducer_decay);
        self.validate()?;
        Ok(self)
    }

    /// Transducer damping rate; defaults to the total rate.
    pub fn transducer_decay(&self) -> f64 {
        self.transducer_decay.unwrap_or(self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("gamma", self.gamma)?;
        ensure_finite("pump detuning", self.pump_detuning)?;
        ensure_finite("chi", self.chi)?;
        if self.gamma <= 0.0 {
            return Err(Error::Domain(format!(
                "decay rate gamma must be positive, got {}",
                self.gamma
            )));
        }
        // Softening (negative) Kerr coefficients flip every sign convention
        // below and are not produced by the beam model.
        if self.chi < 0.0 {
            return Err(Error::Domain(format!(
                "dispersion chi must be non-negative, got {}",
                self.chi
            )));
        }
        if self.bath_occupancy != 0.0 {
            return Err(Error::ThermalBath(self.bath_occupancy));
        }
        if let Some(gt) = self.transducer_decay {
            ensure_finite("transducer decay", gt)?;
            if gt <= 0.0 || gt > self.gamma {
                return Err(Error::Domain(format!(
                    "transducer decay must lie in (0, gamma], got {gt}"
                )));
            }
        }
        Ok(())
    }
}

/// Which local-oscillator frequency the homodyne detector uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoSideband {
    /// `ω_LO = ωp − δ`
    #[default]
    Lower,
    /// `ω_LO = ωp + δ`
    Upper,
}

/// Pump, signal and detection settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub pump_amplitude: f64,
    pub signal_amplitude: f64,
    /// `δ = ωs − ωp`
    pub signal_detuning: f64,
    pub lo_phase: f64,
    #[serde(default)]
    pub lo_sideband: LoSideband,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            pump_amplitude: 0.0,
            signal_amplitude: 1.0,
            signal_detuning: 0.0,
            lo_phase: 0.0,
            lo_sideband: LoSideband::Lower,
        }
    }
}

impl DriveConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("pump amplitude", self.pump_amplitude)?;
        ensure_finite("signal amplitude", self.signal_amplitude)?;
        ensure_finite("signal detuning", self.signal_detuning)?;
        ensure_finite("lo phase", self.lo_phase)?;
        if self.pump_amplitude < 0.0 {
            return Err(Error::Domain(format!(
                "pump amplitude must be real and non-negative, got {}",
                self.pump_amplitude
            )));
        }
        if self.signal_amplitude < 0.0 {
            return Err(Error::Domain(format!(
                "signal amplitude must be real and non-negative, got {}",
                self.signal_amplitude
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_unit_inputs() {
        let a = alpha_from_geometry(1.0, 1.0).unwrap();
        assert_relative_eq!(a, 2.0 * 3f64.sqrt() / 9.0, max_relative = 1e-15);
        assert_relative_eq!(a, 0.384_900_179_459_750_5, max_relative = 1e-15);
        let quarter = alpha_from_geometry(2.0, 1.0).unwrap();
        assert_relative_eq!(quarter, a / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn alpha_nanobeam() {
        // 2√3/9 × 1e14, evaluated at 40 digits.
        let a = alpha_from_geometry(1e-9, 1e4).unwrap();
        assert_relative_eq!(a, 3.849_001_794_597_505e13, max_relative = 1e-14);
    }

    #[test]
    fn alpha_rejects_non_positive() {
        assert!(matches!(alpha_from_geometry(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(alpha_from_geometry(1.0, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn chi_identities() {
        assert_eq!(chi_from_alpha(0.0, 1.0).unwrap(), 0.0);
        let m = 3.0 * HBAR / 8.0;
        assert_relative_eq!(chi_from_alpha(1.0, m).unwrap(), 1.0, max_relative = 1e-15);
        assert!(chi_from_alpha(1.0, 0.0).is_err());
    }

    #[test]
    fn platinum_beam_order_of_magnitude() {
        // 10^-17 kg beam, Q = 1000, a_c ≈ 2.1 nm lands near 3.4e-4 1/s.
        let p = PhysicalParams::new(1e-17, 2.0 * std::f64::consts::PI * 20e6, 1e3, 2.1e-9).unwrap();
        assert!(p.dispersion > 1e-4 && p.dispersion < 1e-3, "chi = {}", p.dispersion);
    }

    #[test]
    fn doubling_q_halves_chi() {
        let a = PhysicalParams::new(1e-17, 1e8, 1e3, 2e-9).unwrap();
        let b = PhysicalParams::new(1e-17, 1e8, 2e3, 2e-9).unwrap();
        assert_relative_eq!(b.dispersion, a.dispersion / 2.0, max_relative = 1e-15);
        // χ ∝ 1/(a_c² Q m*)
        let c = PhysicalParams::new(2e-17, 1e8, 1e3, 4e-9).unwrap();
        assert_relative_eq!(c.dispersion, a.dispersion / 8.0, max_relative = 1e-12);
    }

    #[test]
    fn physical_to_model() {
        let p = PhysicalParams::new(1e-17, 1e8, 1e4, 2e-9).unwrap();
        let m = p.to_model(-1e4).unwrap();
        assert_relative_eq!(m.gamma, 1e4);
        assert_eq!(m.chi, p.dispersion);
        assert_eq!(m.transducer_decay(), m.gamma);
    }

    #[test]
    fn model_validation() {
        assert!(ModelParams::new(2.0, -2.0, 1.0).is_ok());
        assert!(matches!(ModelParams::new(0.0, -2.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(ModelParams::new(2.0, -2.0, -1.0), Err(Error::Domain(_))));
        assert!(ModelParams::new(f64::NAN, 0.0, 1.0).is_err());
        let p = ModelParams::new(2.0, -2.0, 1.0).unwrap();
        match p.with_bath_occupancy(0.1) {
            Err(Error::ThermalBath(n)) => assert_eq!(n, 0.1),
            other => panic!("expected thermal-bath rejection, got {other:?}"),
        }
        assert!(p.with_transducer_decay(1.0).is_ok());
        assert!(p.with_transducer_decay(3.0).is_err());
    }

    #[test]
    fn drive_validation() {
        let mut d = DriveConfig::default();
        assert!(d.validate().is_ok());
        d.pump_amplitude = -1.0;
        assert!(d.validate().is_err());
        d.pump_amplitude = 1.0;
        d.signal_amplitude = -0.1;
        assert!(d.validate().is_err());
    }
}
