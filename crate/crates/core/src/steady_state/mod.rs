//! Semiclassical fixed points of the driven Kerr resonator, their linear
//! stability, and the bistable window.
//!
//! A fixed point with occupation `n0` is reached by the pump intensity
//! `I_p = n0 [γ²/4 + (Δ + 2χ n0)²]`. Regarded as a function of `n0` this is a
//! cubic whose slope `dI_p/dn0 = γ²/4 + (Δ + 6χ n0)(Δ + 2χ n0)` is also the
//! squared modulus `λ²` of the stability eigenvalues. Fixed points with
//! `λ² < 0` (between the turning points) are unstable.

mod cubic;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::model::ModelParams;
use cubic::Cubic;

/// 2×2 complex matrix, row major.
pub type Mat2 = [[Complex64; 2]; 2];

/// Relative distance from a turning point inside which a fixed point is
/// flagged degenerate.
pub const DEGENERATE_TOL: f64 = 1e-7;

/// Which branch of the response curve a fixed point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Lower,
    Middle,
    Upper,
    /// Monostable parameters: the curve has one branch.
    Single,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::Middle => "middle",
            Branch::Upper => "upper",
            Branch::Single => "single",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One semiclassical steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    /// Real pump amplitude that holds the resonator here.
    pub pump_amplitude: f64,
    pub n0: f64,
    pub alpha0: Complex64,
    /// `arg α0`, in `(−π, 0)` for a real positive pump.
    pub phi0: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// `γ²/4 + (Δ+6χn0)(Δ+2χn0)`, equal to `dI_p/dn0`.
    pub lambda_sq: f64,
    pub stable: bool,
    pub branch: Branch,
    /// Within [`DEGENERATE_TOL`] of a turning point.
    pub degenerate: bool,
}

impl FixedPoint {
    /// The fixed point with occupation `n0`, pumped by `ε_p = √I_p(n0)`.
    pub fn at_occupation(n0: f64, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let intensity = pump_intensity(n0, params)?;
        let turning = turning_points(params);
        Ok(Self::build(n0, intensity.sqrt(), params, &turning))
    }

    fn build(n0: f64, pump_amplitude: f64, params: &ModelParams, turning: &[f64]) -> Self {
        let shift = params.pump_detuning + 2.0 * params.chi * n0;
        let denom = Complex64::new(params.gamma / 2.0, shift);
        let alpha0 = Complex64::new(0.0, -pump_amplitude) / denom;
        let (lambda_plus, lambda_minus) = stability_eigenvalues(n0, params);
        let (branch, degenerate) = classify(n0, turning);
        Self {
            pump_amplitude,
            n0,
            alpha0,
            phi0: steady_phase(n0, params),
            lambda_plus,
            lambda_minus,
            lambda_sq: lambda_sq(n0, params),
            stable: lambda_plus.re < 0.0 && lambda_minus.re < 0.0,
            branch,
            degenerate,
        }
    }

    /// `Δ̃ = Δ + 4χ n0`
    pub fn effective_detuning(&self, params: &ModelParams) -> f64 {
        params.pump_detuning + 4.0 * params.chi * self.n0
    }

    /// Parametric coupling `G = 2χ α0²`.
    pub fn coupling(&self, params: &ModelParams) -> Complex64 {
        self.alpha0 * self.alpha0 * (2.0 * params.chi)
    }

    /// Slowest decay rate `−max Re λ±` (negative when unstable).
    pub fn decay_margin(&self) -> f64 {
        -self.lambda_plus.re.max(self.lambda_minus.re)
    }
}

/// `I_p = n0 [γ²/4 + (Δ + 2χ n0)²]`
pub fn pump_intensity(n0: f64, params: &ModelParams) -> Result<f64> {
    ensure_finite("n0", n0)?;
    if n0 < 0.0 {
        return Err(Error::Domain(format!("occupation n0 must be non-negative, got {n0}")));
    }
    let shift = params.pump_detuning + 2.0 * params.chi * n0;
    Ok(n0 * (params.gamma * params.gamma / 4.0 + shift * shift))
}

/// `λ² = γ²/4 + (Δ + 6χ n0)(Δ + 2χ n0)`
pub fn lambda_sq(n0: f64, params: &ModelParams) -> f64 {
    let d = params.pump_detuning;
    let c = params.chi;
    params.gamma * params.gamma / 4.0 + (d + 6.0 * c * n0) * (d + 2.0 * c * n0)
}

/// `φ0 = arg α0`, from the full complex amplitude rather than its tangent.
pub fn steady_phase(n0: f64, params: &ModelParams) -> f64 {
    // α0 ∝ −i (γ/2 − i(Δ+2χn0)) = −(Δ+2χn0) − iγ/2
    let shift = params.pump_detuning + 2.0 * params.chi * n0;
    (-params.gamma / 2.0).atan2(-shift)
}

/// Eigenvalues `λ± = −γ/2 ± i√((Δ+6χn0)(Δ+2χn0))` of the linearised motion.
///
/// A negative product gives a real pair `−γ/2 ± √|·|`.
pub fn stability_eigenvalues(n0: f64, params: &ModelParams) -> (Complex64, Complex64) {
    let d = params.pump_detuning;
    let c = params.chi;
    let product = (d + 6.0 * c * n0) * (d + 2.0 * c * n0);
    let half = -params.gamma / 2.0;
    if product >= 0.0 {
        let w = product.sqrt();
        (Complex64::new(half, w), Complex64::new(half, -w))
    } else {
        let r = (-product).sqrt();
        (Complex64::new(half + r, 0.0), Complex64::new(half - r, 0.0))
    }
}

/// Linearisation matrix `M` of `(δα, δα*)` about a fixed point.
pub fn stability_matrix(fp: &FixedPoint, params: &ModelParams) -> Mat2 {
    let half = params.gamma / 2.0;
    let dt = fp.effective_detuning(params);
    let g = fp.coupling(params);
    let i = Complex64::i();
    [
        [Complex64::new(-half, -dt), -i * g],
        [i * g.conj(), Complex64::new(-half, dt)],
    ]
}

/// Discriminant `4Δ² − 3γ²` of the turning-point quadratic, clamped to zero
/// within rounding so that the exact threshold `Δ² = 3γ²/4` counts as bistable.
fn turning_discriminant(params: &ModelParams) -> Option<f64> {
    let dd = 4.0 * params.pump_detuning * params.pump_detuning;
    let gg = 3.0 * params.gamma * params.gamma;
    let disc = dd - gg;
    if disc < -1e-12 * (dd + gg) {
        None
    } else {
        Some(disc.max(0.0))
    }
}

/// Occupations where `dI_p/dn0 = 0`, ascending; empty when monostable.
pub fn turning_points(params: &ModelParams) -> Vec<f64> {
    if params.chi == 0.0 || params.pump_detuning >= 0.0 {
        return Vec::new();
    }
    let Some(disc) = turning_discriminant(params) else {
        return Vec::new();
    };
    // Roots of 12χ²n² + 8χΔn + Δ² + γ²/4 = 0.
    let root = disc.sqrt();
    let base = -4.0 * params.pump_detuning;
    let denom = 12.0 * params.chi;
    let lo = (base - root) / denom;
    let hi = (base + root) / denom;
    if lo > 0.0 {
        vec![lo, hi]
    } else {
        Vec::new()
    }
}

/// True when the response curve folds over (`Δ < 0`, `χ > 0`, `Δ² ≥ 3γ²/4`).
pub fn bistability_condition(params: &ModelParams) -> bool {
    params.chi > 0.0 && params.pump_detuning < 0.0 && turning_discriminant(params).is_some()
}

fn classify(n0: f64, turning: &[f64]) -> (Branch, bool) {
    match turning {
        [lo, hi] => {
            if (n0 - lo).abs() <= DEGENERATE_TOL * lo.max(1e-300) {
                (Branch::Lower, true)
            } else if (n0 - hi).abs() <= DEGENERATE_TOL * hi.max(1e-300) {
                (Branch::Upper, true)
            } else if n0 < *lo {
                (Branch::Lower, false)
            } else if n0 > *hi {
                (Branch::Upper, false)
            } else {
                (Branch::Middle, false)
            }
        }
        _ => (Branch::Single, false),
    }
}

/// Branch label of an occupation and whether it sits on a turning point.
pub fn classify_branch(n0: f64, params: &ModelParams) -> (Branch, bool) {
    classify(n0, &turning_points(params))
}

/// All physical fixed points for a real pump amplitude, ascending in `n0`.
pub fn fixed_points(pump_amplitude: f64, params: &ModelParams) -> Result<Vec<FixedPoint>> {
    params.validate()?;
    ensure_finite("pump amplitude", pump_amplitude)?;
    if pump_amplitude < 0.0 {
        return Err(Error::Domain(format!(
            "pump amplitude must be non-negative, got {pump_amplitude}"
        )));
    }
    let intensity = pump_amplitude * pump_amplitude;
    let turning = turning_points(params);
    let linear = params.gamma * params.gamma / 4.0 + params.pump_detuning * params.pump_detuning;

    let occupations = if intensity == 0.0 {
        // n0 = 0 and a quadratic factor with discriminant −4χ²γ² < 0.
        vec![0.0]
    } else if params.chi == 0.0 {
        vec![intensity / linear]
    } else {
        let c = params.chi;
        let cubic = Cubic {
            c3: 4.0 * c * c,
            c2: 4.0 * c * params.pump_detuning,
            c1: linear,
            c0: -intensity,
        };
        cubic::physical_real_roots(&cubic.roots()?, &turning)
    };

    let tol = 1e-9 * intensity.max(1.0);
    for &n0 in &occupations {
        let resid = (pump_intensity(n0, params)? - intensity).abs();
        if resid > tol {
            return Err(Error::Numerical(format!(
                "state-equation residual {resid:e} at n0 = {n0} exceeds {tol:e}"
            )));
        }
    }
    Ok(occupations
        .into_iter()
        .map(|n0| FixedPoint::build(n0, pump_amplitude, params, &turning))
        .collect())
}

/// Pump window of the bistable regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpWindow {
    /// `I_p` at the upper turning point (where the upper branch ends).
    pub lower_intensity: f64,
    /// `I_p` at the lower turning point (where the lower branch ends).
    pub upper_intensity: f64,
}

impl PumpWindow {
    pub fn contains(&self, intensity: f64) -> bool {
        intensity > self.lower_intensity && intensity < self.upper_intensity
    }
}

/// Pump intensities bracketing the three-solution window, if there is one.
pub fn pump_window(params: &ModelParams) -> Option<PumpWindow> {
    match turning_points(params)[..] {
        [lo, hi] => Some(PumpWindow {
            lower_intensity: pump_intensity(hi, params).ok()?,
            upper_intensity: pump_intensity(lo, params).ok()?,
        }),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseSample {
    pub pump_amplitude: f64,
    pub fixed_points: Vec<FixedPoint>,
}

/// Fixed points along a monotone pump grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseCurve {
    pub samples: Vec<ResponseSample>,
    pub window: Option<PumpWindow>,
}

impl ResponseCurve {
    /// CSV header for [`ResponseCurve::rows`].
    pub const COLUMNS: [&'static str; 9] = [
        "eps_p",
        "I_p",
        "n0",
        "branch",
        "stable",
        "re_lambda_plus",
        "im_lambda_plus",
        "lambda_sq",
        "phi0",
    ];

    /// Flattened `(pump amplitude, fixed point)` pairs in grid order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, &FixedPoint)> {
        self.samples
            .iter()
            .flat_map(|s| s.fixed_points.iter().map(move |fp| (s.pump_amplitude, fp)))
    }
}

pub(crate) fn check_monotone(name: &str, grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid(format!("{name} grid needs at least 2 points")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid(format!("{name} grid has non-finite values")));
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::InvalidGrid(format!("{name} grid is not strictly monotone")));
    }
    Ok(())
}

/// Fixed points at every pump amplitude of `grid`, evaluated in parallel.
pub fn response_curve(grid: &[f64], params: &ModelParams) -> Result<ResponseCurve> {
    params.validate()?;
    check_monotone("pump", grid)?;
    let samples = grid
        .par_iter()
        .map(|&eps| {
            Ok(ResponseSample {
                pump_amplitude: eps,
                fixed_points: fixed_points(eps, params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResponseCurve {
        samples,
        window: pump_window(params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn bistable() -> ModelParams {
        ModelParams::new(2.0, -2.0, 1.0).unwrap()
    }

    #[test]
    fn pump_intensity_examples() {
        let p = bistable();
        assert_eq!(pump_intensity(0.0, &p).unwrap(), 0.0);
        assert_relative_eq!(pump_intensity(1.0, &p).unwrap(), 1.0);
        assert_relative_eq!(pump_intensity(0.5, &p).unwrap(), 1.0);
        assert!(pump_intensity(-0.1, &p).is_err());
    }

    #[test]
    fn undriven_single_point() {
        let fps = fixed_points(0.0, &bistable()).unwrap();
        assert_eq!(fps.len(), 1);
        assert_eq!(fps[0].n0, 0.0);
        assert_eq!(fps[0].alpha0.norm(), 0.0);
        assert!(fps[0].stable);
    }

    #[test]
    fn triple_root() {
        let fps = fixed_points(0.95f64.sqrt(), &bistable()).unwrap();
        assert_eq!(fps.len(), 3);
        // 40-digit roots of 4n³ − 8n² + 5n − 0.95.
        let want = [0.360_221_555_074_666_1, 0.706_302_786_127_345_3, 0.933_475_658_797_988_6];
        for (fp, w) in fps.iter().zip(want) {
            assert!((fp.n0 - w).abs() < 1e-12, "{} vs {}", fp.n0, w);
        }
        assert!((fps.iter().map(|f| f.n0).sum::<f64>() - 2.0).abs() < 1e-12);
        assert_eq!(
            fps.iter().map(|f| (f.branch, f.stable)).collect::<Vec<_>>(),
            vec![(Branch::Lower, true), (Branch::Middle, false), (Branch::Upper, true)]
        );
    }

    #[test]
    fn double_real_eigenvalue() {
        // (Δ+6χn0)(Δ+2χn0) = 4·0 at n0 = 1, so λ± = −γ/2.
        let fps = fixed_points(1.0, &bistable()).unwrap();
        let fp = fps.iter().find(|f| (f.n0 - 1.0).abs() < 1e-9).expect("n0 = 1 root");
        assert!((fp.lambda_plus - Complex64::new(-1.0, 0.0)).norm() < 1e-8);
        assert!((fp.lambda_minus - Complex64::new(-1.0, 0.0)).norm() < 1e-8);
        assert!(fp.stable);
    }

    #[test]
    fn eigenvalue_examples() {
        let lin = ModelParams::new(2.0, 1.0, 0.0).unwrap();
        let (a, b) = stability_eigenvalues(0.3, &lin);
        assert_eq!(a, Complex64::new(-1.0, 1.0));
        assert_eq!(b, Complex64::new(-1.0, -1.0));

        let (a, b) = stability_eigenvalues(0.7, &bistable());
        assert_relative_eq!(a.re, -1.0 + 1.32f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(b.re, -1.0 - 1.32f64.sqrt(), max_relative = 1e-14);
        assert!(a.re > 0.0);

        let (a, b) = stability_eigenvalues(0.36, &bistable());
        assert_relative_eq!(a.re, -1.0 + 0.2048f64.sqrt(), max_relative = 1e-12);
        assert!(a.re < 0.0 && b.re < 0.0);
        assert_eq!(a.im, 0.0);
    }

    #[test]
    fn turning_point_examples() {
        let t = turning_points(&bistable());
        assert_eq!(t.len(), 2);
        assert_relative_eq!(t[0], 0.5, max_relative = 1e-15);
        assert_relative_eq!(t[1], 5.0 / 6.0, max_relative = 1e-15);
        assert!(turning_points(&ModelParams::new(2.0, -1.0, 1.0).unwrap()).is_empty());
        assert!(turning_points(&ModelParams::new(2.0, -2.0, 0.0).unwrap()).is_empty());
        assert!(turning_points(&ModelParams::new(2.0, 2.0, 1.0).unwrap()).is_empty());
    }

    #[test]
    fn bistability_examples() {
        assert!(bistability_condition(&bistable()));
        let edge = ModelParams::new(2.0, -3f64.sqrt(), 1.0).unwrap();
        assert!(bistability_condition(&edge));
        let t = turning_points(&edge);
        assert_eq!(t.len(), 2);
        assert!((t[0] - t[1]).abs() < 1e-6);
        assert!(!bistability_condition(&ModelParams::new(2.0, 2.0, 1.0).unwrap()));
        assert!(!bistability_condition(&ModelParams::new(2.0, -1.0, 1.0).unwrap()));
    }

    #[test]
    fn window_values() {
        let w = pump_window(&bistable()).unwrap();
        assert_relative_eq!(w.lower_intensity, 50.0 / 54.0, max_relative = 1e-14);
        assert_relative_eq!(w.upper_intensity, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn phase_quadrant() {
        // Δ + 2χn0 = 0 with ε_p = 1: α0 = −i.
        let fps = fixed_points(1.0, &bistable()).unwrap();
        let fp = fps.iter().find(|f| (f.n0 - 1.0).abs() < 1e-9).unwrap();
        assert!((fp.alpha0 - Complex64::new(0.0, -1.0)).norm() < 1e-8);
        assert_relative_eq!(fp.phi0, -std::f64::consts::FRAC_PI_2, max_relative = 1e-8);
    }

    #[test]
    fn degenerate_flag_at_turning_point() {
        let p = bistable();
        let fp = FixedPoint::at_occupation(0.5, &p).unwrap();
        assert!(fp.degenerate);
        assert_eq!(fp.branch, Branch::Lower);
        let fp = FixedPoint::at_occupation(5.0 / 6.0, &p).unwrap();
        assert!(fp.degenerate);
        assert_eq!(fp.branch, Branch::Upper);
        // Pumping exactly at the window edge returns the double root once.
        let fps = fixed_points(1.0, &p).unwrap();
        assert_eq!(fps.len(), 2);
        assert!(fps[0].degenerate);
        assert!((fps[0].n0 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn linear_response_curve() {
        let p = ModelParams::new(2.0, 0.5, 0.0).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.03).collect();
        let curve = response_curve(&grid, &p).unwrap();
        assert!(curve.window.is_none());
        for s in &curve.samples {
            assert_eq!(s.fixed_points.len(), 1);
            let fp = &s.fixed_points[0];
            assert_eq!(fp.branch, Branch::Single);
            assert_relative_eq!(fp.n0, s.pump_amplitude.powi(2) / 1.25, max_relative = 1e-14);
        }
    }

    #[test]
    fn bistable_curve_counts() {
        let p = bistable();
        let grid: Vec<f64> = (0..=300).map(|i| i as f64 * 0.005).collect();
        let curve = response_curve(&grid, &p).unwrap();
        let w = curve.window.unwrap();
        for s in &curve.samples {
            let ip = s.pump_amplitude.powi(2);
            let n = s.fixed_points.len();
            let middle = s.fixed_points.iter().any(|f| f.branch == Branch::Middle);
            let on_edge = (ip - w.lower_intensity).abs() < 1e-12 || (ip - w.upper_intensity).abs() < 1e-12;
            if on_edge {
                // Double root at a turning point plus the far branch.
                assert_eq!(n, 2, "eps_p = {}", s.pump_amplitude);
                assert!(s.fixed_points.iter().any(|f| f.degenerate));
            } else if w.contains(ip) {
                assert_eq!(n, 3, "eps_p = {}", s.pump_amplitude);
                assert!(middle);
            } else {
                assert_eq!(n, 1, "eps_p = {}", s.pump_amplitude);
                assert!(!middle);
            }
        }
    }

    #[test]
    fn monostable_curve_single_valued() {
        let p = ModelParams::new(2.0, -1.0, 1.0).unwrap();
        let grid: Vec<f64> = (0..201).map(|i| i as f64 * 1.5 / 200.0).collect();
        let curve = response_curve(&grid, &p).unwrap();
        assert!(curve.samples.iter().all(|s| s.fixed_points.len() == 1));
        assert!(curve.rows().all(|(_, f)| f.branch == Branch::Single && f.stable));
    }

    #[test]
    fn grid_must_be_monotone() {
        assert!(matches!(
            response_curve(&[0.0, 1.0, 0.5], &bistable()),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(response_curve(&[0.0], &bistable()), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn matrix_eigenvalues_match_closed_form() {
        let p = bistable();
        for n0 in [0.1, 0.36, 0.7, 0.9, 2.0] {
            let fp = FixedPoint::at_occupation(n0, &p).unwrap();
            let m = stability_matrix(&fp, &p);
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let disc = (tr * tr / 4.0 - det).sqrt();
            let mut eig = [tr / 2.0 + disc, tr / 2.0 - disc];
            let mut want = [fp.lambda_plus, fp.lambda_minus];
            let key = |z: &Complex64| (z.re * 1e6).round() as i64 * 1_000_000 + (z.im * 1e6).round() as i64;
            eig.sort_by_key(key);
            want.sort_by_key(key);
            for (a, b) in eig.iter().zip(want.iter()) {
                assert!((a - b).norm() < 1e-12, "n0={n0}: {a} vs {b}");
            }
        }
    }

    fn random_params() -> impl Strategy<Value = ModelParams> {
        (0.5f64..4.0, -4.0f64..4.0, 0.01f64..2.0)
            .prop_map(|(g, d, c)| ModelParams::new(g, d, c).unwrap())
    }

    fn random_bistable() -> impl Strategy<Value = ModelParams> {
        (0.5f64..4.0, 0.0f64..1.0, 0.01f64..2.0).prop_map(|(g, frac, c)| {
            let threshold = 3f64.sqrt() * g / 2.0;
            ModelParams::new(g, -threshold * (1.0 + 2.0 * frac) - 1e-6, c).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn root_sum_rule(p in random_params(), n_ref in 0.0f64..3.0) {
            // Roots of 4χ²n³+4χΔn²+(γ²/4+Δ²)n − I_p sum to −Δ/χ.
            let ip = pump_intensity(n_ref / p.chi, &p).unwrap();
            let linear = p.gamma * p.gamma / 4.0 + p.pump_detuning.powi(2);
            let roots = Cubic { c3: 4.0 * p.chi * p.chi, c2: 4.0 * p.chi * p.pump_detuning, c1: linear, c0: -ip }
                .roots().unwrap();
            let sum: Complex64 = roots.iter().sum();
            let want = -p.pump_detuning / p.chi;
            prop_assert!((sum.re - want).abs() <= 1e-9 * want.abs().max(1.0));
            prop_assert!(sum.im.abs() <= 1e-9 * want.abs().max(1.0));
        }

        #[test]
        fn fixed_point_invariants(p in random_params(), n_ref in 0.0f64..3.0) {
            let eps = pump_intensity(n_ref / p.chi, &p).unwrap().sqrt();
            let fps = fixed_points(eps, &p).unwrap();
            prop_assert!(!fps.is_empty() && fps.len() <= 3);
            for fp in &fps {
                prop_assert!((fp.alpha0.norm_sqr() - fp.n0).abs() <= 1e-12 * fp.n0.max(1e-300) + 1e-300);
                let lhs = fp.alpha0 * Complex64::new(p.gamma / 2.0, p.pump_detuning + 2.0 * p.chi * fp.n0);
                prop_assert!((lhs - Complex64::new(0.0, -eps)).norm() <= 1e-10 * eps.max(1e-300));
                prop_assert_eq!(fp.stable, fp.lambda_plus.re < 0.0 && fp.lambda_minus.re < 0.0);
                if fp.lambda_plus.im != 0.0 {
                    prop_assert!((fp.lambda_plus.norm_sqr() - fp.lambda_sq).abs() <= 1e-12 * fp.lambda_sq.abs().max(1.0));
                }
                let shift = 2.0 * p.pump_detuning + 4.0 * p.chi * fp.n0;
                if shift.abs() > 1e-12 {
                    prop_assert!((fp.phi0.tan() - p.gamma / shift).abs() <= 1e-9 * (p.gamma / shift).abs().max(1.0));
                }
            }
        }

        #[test]
        fn lambda_sq_is_slope(p in random_params(), n_ref in 0.0f64..3.0) {
            let n0 = n_ref / p.chi;
            let h = 1e-6 * n0.max(1.0);
            let lo = (n0 - h).max(0.0);
            let fd = (pump_intensity(n0 + h, &p).unwrap() - pump_intensity(lo, &p).unwrap()) / (n0 + h - lo);
            let l2 = lambda_sq(n0, &p);
            prop_assert!((fd - l2).abs() <= 1e-5 * l2.abs().max(1.0));
        }

        #[test]
        fn middle_branch_unstable(p in random_bistable(), u in 0.0f64..1.0) {
            let t = turning_points(&p);
            prop_assert_eq!(t.len(), 2);
            let n0 = 2.0 * t[1] * u;
            let fp = FixedPoint::at_occupation(n0, &p).unwrap();
            let between = n0 > t[0] && n0 < t[1];
            if !fp.degenerate {
                prop_assert_eq!(fp.stable, !between);
                prop_assert_eq!(fp.branch == Branch::Middle, between);
            }
        }

        #[test]
        fn bistability_agrees_with_turning_points(g in 0.1f64..4.0, d in -6.0f64..6.0, c in 0.0f64..2.0) {
            let p = ModelParams::new(g, d, c).unwrap();
            prop_assert_eq!(bistability_condition(&p), !turning_points(&p).is_empty());
        }
    }
}
