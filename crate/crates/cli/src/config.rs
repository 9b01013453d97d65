//! TOML configuration and its merge with command-line flags.

use serde::Deserialize;
use std::path::{Path, PathBuf};

use duffamp_core::{
    BranchFilter, Grid, LoSideband, ModelParams, PhysicalParams, ThetaMode,
};

use crate::args::{DriveArgs, ModelArgs, SweepArgs, ThetaModeArg};
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub steady: SteadySection,
    #[serde(default)]
    pub gain: SurfaceSection,
    #[serde(default)]
    pub noise: SurfaceSection,
    #[serde(default)]
    pub minforce: SweepSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub chi: Option<f64>,
    pub effective_mass: Option<f64>,
    pub omega0: Option<f64>,
    pub quality_factor: Option<f64>,
    pub critical_amplitude: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub eps_p: Option<f64>,
    pub eps_s: Option<f64>,
    pub signal_detuning: Option<f64>,
    pub theta: Option<f64>,
    pub theta_mode: Option<ThetaModeArg>,
    pub lo_sideband: Option<LoSideband>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySection {
    pub curve: Option<String>,
    pub branch: Option<BranchFilter>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub branch: Option<BranchFilter>,
    pub mask_lambda_sq: Option<f64>,
    pub n0_range: Option<String>,
    pub include_unstable: Option<bool>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub branch: Option<BranchFilter>,
    pub mask_lambda_sq: Option<f64>,
    pub n0_range: Option<String>,
    pub include_unstable: Option<bool>,
    pub out: Option<PathBuf>,
    pub detuning_range: Option<String>,
}

impl SurfaceSection {
    pub fn sweep_section(&self) -> SweepSection {
        SweepSection {
            branch: self.branch,
            mask_lambda_sq: self.mask_lambda_sq,
            n0_range: self.n0_range.clone(),
            include_unstable: self.include_unstable,
            out: self.out.clone(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub report: Option<PathBuf>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Model parameters from flags over file values, in rate units or SI.
pub fn model_params(flags: &ModelArgs, file: &ModelSection) -> Result<ModelParams, CliError> {
    let mass = pick(flags.effective_mass, file.effective_mass);
    let omega0 = pick(flags.omega0, file.omega0);
    let q = pick(flags.quality_factor, file.quality_factor);
    let ac = pick(flags.critical_amplitude, file.critical_amplitude);
    let gamma = pick(flags.gamma, file.gamma);
    let chi = pick(flags.chi, file.chi);
    let delta = pick(flags.delta, file.delta)
        .ok_or_else(|| CliError::Config("missing pump detuning (--delta)".into()))?;
    let si = [mass, omega0, q, ac];
    if si.iter().any(Option::is_some) {
        let [Some(m), Some(w), Some(q), Some(a)] = si else {
            return Err(CliError::Config(
                "SI input needs all of --effective-mass, --omega0, --quality-factor, --critical-amplitude".into(),
            ));
        };
        if gamma.is_some() || chi.is_some() {
            return Err(CliError::Config("give either --gamma/--chi or the SI device parameters, not both".into()));
        }
        let phys = PhysicalParams::new(m, w, q, a).map_err(CliError::from_config)?;
        return phys.to_model(delta).map_err(CliError::from_config);
    }
    let gamma = gamma.ok_or_else(|| CliError::Config("missing damping rate (--gamma)".into()))?;
    let chi = chi.ok_or_else(|| CliError::Config("missing Kerr coefficient (--chi)".into()))?;
    ModelParams::new(gamma, delta, chi).map_err(CliError::from_config)
}

/// Drive settings after merging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSettings {
    pub eps_p: Option<f64>,
    pub eps_s: f64,
    pub signal_detuning: Option<f64>,
    pub theta: ThetaMode,
    pub lo_sideband: LoSideband,
}

pub fn drive(flags: &DriveArgs, file: &DriveSection) -> Result<DriveSettings, CliError> {
    let theta = pick(flags.theta, file.theta);
    let mode = pick(flags.theta_mode, file.theta_mode)
        .unwrap_or(if theta.is_some() { ThetaModeArg::Fixed } else { ThetaModeArg::Optimal });
    let theta = match (mode, theta) {
        (ThetaModeArg::Optimal, _) => ThetaMode::Optimal,
        (ThetaModeArg::Fixed, Some(t)) => ThetaMode::Fixed(t),
        (ThetaModeArg::Fixed, None) => {
            return Err(CliError::Config("--theta-mode fixed needs --theta".into()));
        }
    };
    let eps_s = pick(flags.eps_s, file.eps_s).unwrap_or(1.0);
    if !eps_s.is_finite() || eps_s < 0.0 {
        return Err(CliError::Config(format!("signal amplitude must be finite and >= 0, got {eps_s}")));
    }
    Ok(DriveSettings {
        eps_p: pick(flags.eps_p, file.eps_p),
        eps_s,
        signal_detuning: pick(flags.signal_detuning, file.signal_detuning),
        theta,
        lo_sideband: flags.lo_sideband.map(Into::into).or(file.lo_sideband).unwrap_or_default(),
    })
}

pub fn grid(text: Option<&str>, name: &str) -> Result<Option<Grid>, CliError> {
    text.map(|t| {
        t.parse::<Grid>()
            .map_err(|e| CliError::Config(format!("--{name}: {e}")))
    })
    .transpose()
}

/// Sweep settings after merging.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub branch: BranchFilter,
    pub mask_lambda_sq: Option<f64>,
    pub n0: Option<Grid>,
    pub include_unstable: bool,
    pub out: Option<PathBuf>,
}

pub fn sweep(flags: &SweepArgs, file: &SweepSection) -> Result<SweepSettings, CliError> {
    let n0 = grid(pick(flags.n0_range.as_deref(), file.n0_range.as_deref()), "n0-range")?;
    Ok(SweepSettings {
        branch: flags.branch.map(Into::into).or(file.branch).unwrap_or_default(),
        mask_lambda_sq: pick(flags.mask_lambda_sq, file.mask_lambda_sq),
        n0,
        include_unstable: flags.include_unstable || file.include_unstable.unwrap_or(false),
        out: pick(flags.out.clone(), file.out.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let err = toml::from_str::<FileConfig>("[model]\ngama = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("gama"));
        assert!(toml::from_str::<FileConfig>("[plot]\n").is_err());
        assert!(toml::from_str::<FileConfig>("[gain]\ndetuning_rang = \"0:1:3\"\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("[model]\ngamma = 2.0\ndelta = -2.0\nchi = 1.0\n").unwrap();
        let flags = ModelArgs { chi: Some(0.5), ..Default::default() };
        let p = model_params(&flags, &file.model).unwrap();
        assert_eq!((p.gamma, p.pump_detuning, p.chi), (2.0, -2.0, 0.5));
    }

    #[test]
    fn theta_implies_fixed() {
        let d = drive(&DriveArgs { theta: Some(0.3), ..Default::default() }, &DriveSection::default()).unwrap();
        assert_eq!(d.theta, ThetaMode::Fixed(0.3));
        let d = drive(&DriveArgs::default(), &DriveSection::default()).unwrap();
        assert_eq!(d.theta, ThetaMode::Optimal);
        let bad = DriveArgs { theta_mode: Some(ThetaModeArg::Fixed), ..Default::default() };
        assert!(drive(&bad, &DriveSection::default()).is_err());
    }

    #[test]
    fn si_input_converts() {
        let flags = ModelArgs {
            delta: Some(0.0),
            effective_mass: Some(1e-17),
            omega0: Some(1e8),
            quality_factor: Some(1e3),
            critical_amplitude: Some(2.1e-9),
            ..Default::default()
        };
        let p = model_params(&flags, &ModelSection::default()).unwrap();
        assert_eq!(p.gamma, 1e5);
        assert!(p.chi > 0.0);
        let partial = ModelArgs { effective_mass: Some(1e-17), ..flags.clone() };
        let partial = ModelArgs { omega0: None, ..partial };
        assert!(model_params(&partial, &ModelSection::default()).is_err());
    }
}
