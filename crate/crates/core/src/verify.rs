//! Numerical oracles for the closed-form results.
//!
//! Each check re-derives its quantity along a path that does not share code
//! with the formula it tests: a direct 2×2 cofactor inverse for the gain
//! matrix, a fixed-step RK4 integration of the driven linear equations for the
//! long-time response, centred finite differences for `dI_p/dn0`, and grid
//! searches for the optimal phase. Samples are drawn from a seeded ChaCha
//! stream, so a report is reproducible from `(seed, samples)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{DriveConfig, LoSideband, ModelParams};
use crate::noise::{dc_noise_at_gain_phase, dc_noise_closed_form, output_spectrum};
use crate::response::{dc_signal, gain_matrix, optimal_gain, optimal_phase, CriticalMask};
use crate::steady_state::{fixed_points, lambda_sq, FixedPoint};

pub const GAIN_MATRIX_TOL: f64 = 1e-12;
pub const SIGNAL_ODE_TOL: f64 = 1e-6;
pub const SLOPE_TOL: f64 = 1e-5;
pub const SPECTRUM_FORMS_TOL: f64 = 1e-9;
pub const PHASE_VALUE_TOL: f64 = 1e-8;
pub const PHASE_GRID_POINTS: usize = 4096;

/// Outcome of one oracle check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub check: String,
    pub seed: u64,
    pub samples: usize,
    pub max_abs_error: f64,
    /// Error scaled by `max(1, |reference|)`; this is what the tolerance bounds
    /// unless the check is absolute.
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<5} {:<24} samples={:<5} max_abs={:.3e} max_rel={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.check,
            self.samples,
            self.max_abs_error,
            self.max_rel_error,
            self.tolerance
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Running maxima of absolute and scaled errors.
#[derive(Debug, Clone, Copy, Default)]
struct ErrorStats {
    abs: f64,
    rel: f64,
    failures: usize,
}

impl ErrorStats {
    fn record(&mut self, diff: f64, scale: f64) {
        // NaN must not vanish under f64::max.
        if !diff.is_finite() {
            self.abs = f64::INFINITY;
            self.rel = f64::INFINITY;
            return;
        }
        self.abs = self.abs.max(diff);
        self.rel = self.rel.max(diff / scale.max(1.0));
    }

    fn fail(&mut self) {
        self.failures += 1;
    }

    fn merge(self, other: Self) -> Self {
        Self {
            abs: self.abs.max(other.abs),
            rel: self.rel.max(other.rel),
            failures: self.failures + other.failures,
        }
    }
}

/// One sampled operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub params: ModelParams,
    pub fixed_point: FixedPoint,
    /// A uniform draw in `[−1, 1)` the checks scale to their own ranges.
    pub unit: f64,
    /// A second uniform draw in `[−1, 1)`.
    pub unit2: f64,
}

/// Restriction on which stable fixed points a sampler may return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// Stable and outside the default near-critical mask.
    Stable,
    /// Stable with complex eigenvalues (`λ² ≥ γ²/4`), so every transient decays at `γ/2`.
    Oscillatory,
}

/// Draws stable fixed points: `γ ∈ [0.5, 4]`, `Δ ∈ [−4, 4]`, `χ ∈ [0.01, 2]`,
/// a pump chosen through an occupation scale of `(|Δ| + γ)/χ`, and one of the
/// stable solutions the steady-state solver returns for it.
pub fn sample_fixed_points(count: usize, seed: u64, regime: Regime) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let gamma = rng.random_range(0.5..4.0);
        let detuning: f64 = rng.random_range(-4.0..4.0);
        let chi = rng.random_range(0.01..2.0);
        let n_ref = rng.random_range(0.0..1.5) * (detuning.abs() + gamma) / chi;
        let pick: f64 = rng.random();
        let unit = rng.random_range(-1.0..1.0);
        let unit2 = rng.random_range(-1.0..1.0);
        let Ok(params) = ModelParams::new(gamma, detuning, chi) else {
            continue;
        };
        let eps_p = crate::steady_state::pump_intensity(n_ref, &params)
            .expect("non-negative occupation")
            .sqrt();
        let Ok(fps) = fixed_points(eps_p, &params) else {
            continue;
        };
        let mask = CriticalMask::for_params(&params);
        let ok: Vec<FixedPoint> = fps
            .into_iter()
            .filter(|fp| fp.stable && !fp.degenerate && !mask.is_near_critical(fp))
            .filter(|fp| match regime {
                Regime::Stable => true,
                Regime::Oscillatory => fp.lambda_sq >= gamma * gamma / 4.0,
            })
            .collect();
        if ok.is_empty() {
            continue;
        }
        let idx = ((pick * ok.len() as f64) as usize).min(ok.len() - 1);
        out.push(Sample {
            params,
            fixed_point: ok[idx],
            unit,
            unit2,
        });
    }
    out
}

/// `M + iω` from its definition, without going through the response module.
fn shifted_linearisation(fp: &FixedPoint, params: &ModelParams, omega: f64) -> [[Complex64; 2]; 2] {
    let i = Complex64::i();
    let g = fp.alpha0 * fp.alpha0 * (2.0 * params.chi);
    let dt = params.pump_detuning + 4.0 * params.chi * fp.n0;
    let half = params.gamma / 2.0;
    [
        [-half - i * dt + i * omega, -i * g],
        [i * g.conj(), -half + i * dt + i * omega],
    ]
}

/// Cofactor inverse of a 2×2 complex matrix.
fn invert2(m: &[[Complex64; 2]; 2]) -> Option<[[Complex64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() == 0.0 {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// Closed-form `𝒢(ω)` against the direct inverse of `M + iω`, `ω ∈ [−5γ, 5γ]`.
pub fn check_gain_matrix_inverse(samples: usize, seed: u64) -> OracleReport {
    let cases = sample_fixed_points(samples, seed, Regime::Stable);
    let stats = cases
        .par_iter()
        .map(|s| {
            let omega = 5.0 * s.params.gamma * s.unit;
            gain_matrix_error(&s.fixed_point, &s.params, omega)
        })
        .reduce(ErrorStats::default, ErrorStats::merge);
    report("gain_matrix_inverse", seed, samples, stats, GAIN_MATRIX_TOL, false)
}

fn gain_matrix_error(fp: &FixedPoint, params: &ModelParams, omega: f64) -> ErrorStats {
    let mut st = ErrorStats::default();
    let Some(reference) = invert2(&shifted_linearisation(fp, params, omega)) else {
        st.fail();
        return st;
    };
    let Ok(closed) = gain_matrix(omega, fp, params) else {
        st.fail();
        return st;
    };
    let scale = reference.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    for (got, want) in closed.entries.iter().flatten().zip(reference.iter().flatten()) {
        st.record((got - want).norm(), scale);
    }
    st
}

/// Near-critical variant of the gain-matrix check at a prescribed `ω`.
pub fn gain_matrix_discrepancy(fp: &FixedPoint, params: &ModelParams, omega: f64) -> Option<f64> {
    let st = gain_matrix_error(fp, params, omega);
    (st.failures == 0).then_some(st.rel)
}

/// Time series of `(δα, δα*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[Complex64; 2]>,
}

/// Integrates the driven linearised equations with classical RK4 from rest.
///
/// The drive is `(−iε_s e^{−iδt}, iε_s e^{iδt})`. Requires a stable fixed
/// point and `dt ≤ 0.01 / max(γ, |Δ̃|, |δ|)`.
pub fn integrate_signal_ode(
    fp: &FixedPoint,
    params: &ModelParams,
    drive: &DriveConfig,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    drive.validate()?;
    if !fp.stable {
        return Err(Error::UnstableFixedPoint {
            n0: fp.n0,
            max_re_lambda: -fp.decay_margin(),
        });
    }
    let delta = drive.signal_detuning;
    let dt_tilde = params.pump_detuning + 4.0 * params.chi * fp.n0;
    let bound = 0.01 / params.gamma.max(dt_tilde.abs()).max(delta.abs());
    if dt.is_nan() || dt <= 0.0 || dt > bound * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("step {dt} must lie in (0, {bound}]")));
    }
    if t_end.is_nan() || t_end < 0.0 {
        return Err(Error::Domain(format!("t_end must be non-negative, got {t_end}")));
    }
    let m = shifted_linearisation(fp, params, 0.0);
    let eps = drive.signal_amplitude;
    let i = Complex64::i();
    let rhs = |t: f64, y: [Complex64; 2]| -> [Complex64; 2] {
        let f = Complex64::from_polar(eps, -delta * t);
        [
            m[0][0] * y[0] + m[0][1] * y[1] - i * f,
            m[1][0] * y[0] + m[1][1] * y[1] + i * f.conj(),
        ]
    };
    let steps = (t_end / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut y = [Complex64::new(0.0, 0.0); 2];
    times.push(0.0);
    states.push(y);
    let axpy = |y: [Complex64; 2], k: [Complex64; 2], a: f64| [y[0] + k[0] * a, y[1] + k[1] * a];
    for n in 0..steps {
        let t = n as f64 * h;
        let k1 = rhs(t, y);
        let k2 = rhs(t + h / 2.0, axpy(y, k1, h / 2.0));
        let k3 = rhs(t + h / 2.0, axpy(y, k2, h / 2.0));
        let k4 = rhs(t + h, axpy(y, k3, h));
        for c in 0..2 {
            y[c] += (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) * (h / 6.0);
        }
        times.push((n + 1) as f64 * h);
        states.push(y);
    }
    Ok(Trajectory { times, states })
}

/// Long-time solution `δα(t) = iε_s 𝒢11(δ) e^{−iδt} − iε_s 𝒢21*(δ) e^{iδt}`.
pub fn long_time_signal(
    t: f64,
    fp: &FixedPoint,
    params: &ModelParams,
    drive: &DriveConfig,
) -> Result<Complex64> {
    let delta = drive.signal_detuning;
    let g = gain_matrix(delta, fp, params)?;
    let i = Complex64::i();
    let eps = drive.signal_amplitude;
    Ok(i * eps * g.element(1, 1) * Complex64::from_polar(1.0, -delta * t)
        - i * eps * g.element(2, 1).conj() * Complex64::from_polar(1.0, delta * t))
}

/// RK4 integration for `30/γ` against the analytic long-time solution, on
/// oscillatory stable points with `ε_s = γ/4` and `δ ∈ [−2γ, 2γ]`.
///
/// Also requires `δα*` to stay the conjugate of `δα` along the way.
pub fn check_signal_ode(samples: usize, seed: u64) -> OracleReport {
    let cases = sample_fixed_points(samples, seed, Regime::Oscillatory);
    let stats = cases
        .par_iter()
        .map(|s| {
            let mut st = ErrorStats::default();
            let p = &s.params;
            let fp = &s.fixed_point;
            let drive = DriveConfig {
                pump_amplitude: fp.pump_amplitude,
                signal_amplitude: p.gamma / 4.0,
                signal_detuning: 2.0 * p.gamma * s.unit,
                lo_phase: 0.0,
                lo_sideband: LoSideband::Lower,
            };
            let stiff = p
                .gamma
                .max(fp.effective_detuning(p).abs() + fp.coupling(p).norm())
                .max(drive.signal_detuning.abs());
            let t_end = 30.0 / p.gamma;
            match integrate_signal_ode(fp, p, &drive, t_end, 0.01 / stiff) {
                Ok(traj) => {
                    let last = *traj.states.last().expect("non-empty trajectory");
                    let t = *traj.times.last().expect("non-empty trajectory");
                    match long_time_signal(t, fp, p, &drive) {
                        Ok(want) => st.record((last[0] - want).norm(), 0.0),
                        Err(_) => st.fail(),
                    }
                    let asym = traj
                        .states
                        .iter()
                        .map(|y| (y[1] - y[0].conj()).norm())
                        .fold(0.0, f64::max);
                    if asym > 1e-12 {
                        st.fail();
                    }
                }
                Err(_) => st.fail(),
            }
            st
        })
        .reduce(ErrorStats::default, ErrorStats::merge);
    // Absolute tolerance: compare the unscaled error.
    let stats = ErrorStats { rel: stats.abs, ..stats };
    report("signal_ode", seed, samples, stats, SIGNAL_ODE_TOL, true)
}

/// `λ²` against a centred finite difference of `I_p(n0)` with `h = 10⁻⁶·max(1, n0)`.
pub fn check_dip_dn0(samples: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(ModelParams, f64)> = (0..samples)
        .map(|_| {
            let gamma = rng.random_range(0.5..4.0);
            let detuning: f64 = rng.random_range(-4.0..4.0);
            let chi = rng.random_range(0.01..2.0);
            let n0 = rng.random_range(0.0..2.0) * (detuning.abs() + gamma) / chi;
            (ModelParams::new(gamma, detuning, chi).expect("sampled in range"), n0)
        })
        .collect();
    let stats = cases
        .par_iter()
        .map(|(p, n0)| {
            let mut st = ErrorStats::default();
            // I_p as a plain polynomial, valid on both sides of n0 = 0.
            let ip = |n: f64| {
                let s = p.pump_detuning + 2.0 * p.chi * n;
                n * (p.gamma * p.gamma / 4.0 + s * s)
            };
            let h = 1e-6 * n0.max(1.0);
            let fd = (ip(n0 + h) - ip(n0 - h)) / (2.0 * h);
            let l2 = lambda_sq(*n0, p);
            st.record((fd - l2).abs(), l2.abs());
            st
        })
        .reduce(ErrorStats::default, ErrorStats::merge);
    report("dIp_dn0", seed, samples, stats, SLOPE_TOL, false)
}

/// Pairwise agreement of the four-term spectrum at `ω = 0`, its closed form,
/// and the optimal-phase form, `δ ∈ [−3γ, 3γ]`, random `θ`.
pub fn check_spectrum_forms(samples: usize, seed: u64) -> OracleReport {
    let cases = sample_fixed_points(samples, seed, Regime::Stable);
    let stats = cases
        .par_iter()
        .map(|s| {
            let mut st = ErrorStats::default();
            let (p, fp) = (&s.params, &s.fixed_point);
            let delta = 3.0 * p.gamma * s.unit;
            let theta = PI * s.unit2;
            let mut compare = |a: Result<f64>, b: Result<f64>| match (a, b) {
                (Ok(a), Ok(b)) => st.record((a - b).abs(), a.abs().max(b.abs())),
                _ => st.fail(),
            };
            compare(
                output_spectrum(0.0, delta, theta, fp, p),
                dc_noise_closed_form(delta, theta, fp, p),
            );
            let best = optimal_phase(delta, fp, p);
            let four = output_spectrum(0.0, delta, best, fp, p);
            let closed = dc_noise_closed_form(delta, best, fp, p);
            let opt = dc_noise_at_gain_phase(delta, fp, p);
            compare(four.clone(), closed.clone());
            compare(four, opt.clone());
            compare(closed, opt);
            st
        })
        .reduce(ErrorStats::default, ErrorStats::merge);
    report("spectrum_forms", seed, samples, stats, SPECTRUM_FORMS_TOL, false)
}

/// Maximises the signal over a 4096-point `θ` grid (refined by golden-section
/// search inside the best cell) and compares with `θ = ν − 2φ0` and `g(δ, n0)`.
pub fn check_phase_optimality(samples: usize, seed: u64) -> OracleReport {
    let cases = sample_fixed_points(samples, seed, Regime::Stable);
    let step = 2.0 * PI / PHASE_GRID_POINTS as f64;
    let results: Vec<(ErrorStats, f64)> = cases
        .par_iter()
        .map(|s| {
            let mut st = ErrorStats::default();
            let (p, fp) = (&s.params, &s.fixed_point);
            let delta = 3.0 * p.gamma * s.unit;
            let signal = |theta: f64| {
                let d = DriveConfig {
                    pump_amplitude: fp.pump_amplitude,
                    signal_amplitude: 1.0,
                    signal_detuning: delta,
                    lo_phase: theta,
                    lo_sideband: LoSideband::Lower,
                };
                dc_signal(fp, p, &d).unwrap_or(f64::NAN)
            };
            let (best_idx, _) = (0..PHASE_GRID_POINTS)
                .map(|k| (k, signal(-PI + k as f64 * step)))
                .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
            let centre = -PI + best_idx as f64 * step;
            let theta_max = golden_section_max(&signal, centre - step, centre + step, 1e-12);
            let value = signal(theta_max);
            match optimal_gain(delta, fp, 1.0, p) {
                Ok(g) => st.record((value - g).abs(), g.abs()),
                Err(_) => st.fail(),
            }
            let want = optimal_phase(delta, fp, p);
            let loc = crate::response::wrap_angle(theta_max - want).abs();
            (st, loc)
        })
        .collect();
    let stats = results
        .iter()
        .map(|r| r.0)
        .fold(ErrorStats::default(), ErrorStats::merge);
    let worst_loc = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut rep = report("phase_optimality", seed, samples, stats, PHASE_VALUE_TOL, false);
    rep.detail = format!("max |theta - (nu - 2 phi0)| = {worst_loc:.2e}, grid step {step:.2e}");
    if worst_loc.is_nan() || worst_loc > step {
        rep.passed = false;
    }
    rep
}

fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

fn report(
    check: &str,
    seed: u64,
    samples: usize,
    stats: ErrorStats,
    tolerance: f64,
    _absolute: bool,
) -> OracleReport {
    let passed = stats.failures == 0 && stats.rel <= tolerance;
    OracleReport {
        check: check.to_string(),
        seed,
        samples,
        max_abs_error: stats.abs,
        max_rel_error: stats.rel,
        tolerance,
        passed,
        detail: if stats.failures > 0 {
            format!("{} samples failed to evaluate", stats.failures)
        } else {
            String::new()
        },
    }
}

/// Every oracle; the ODE check uses a tenth of the samples (at least one).
pub fn run_all(samples: usize, seed: u64) -> Vec<OracleReport> {
    vec![
        check_gain_matrix_inverse(samples, seed),
        check_signal_ode((samples / 10).max(1), seed),
        check_dip_dn0(samples, seed),
        check_spectrum_forms(samples, seed),
        check_phase_optimality(samples, seed),
    ]
}
