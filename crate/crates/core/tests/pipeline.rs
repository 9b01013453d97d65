use approx::assert_relative_eq;
use proptest::prelude::*;

use duffamp_core::sweep::DIVERGENCE_LIMIT;
use duffamp_core::verify::{self, Regime};
use duffamp_core::{
    branch_partition, fixed_points, gain_matrix, min_force_nonlinear, run_sweep, Branch, Dataset,
    Grid, ModelParams, PhysicalParams, Quantity, SweepSpec,
};

#[test]
fn si_device_round_trip() {
    // A platinum-beam scale device, pumped near the fold.
    let phys = PhysicalParams::new(1e-17, 2.0 * std::f64::consts::PI * 1e8, 1e3, 2.1e-9).unwrap();
    let gamma = phys.decay_rate();
    let params = phys.to_model(-2.0 * gamma).unwrap();
    assert!(params.chi > 0.0);
    let fps = fixed_points(gamma / params.chi.sqrt(), &params).unwrap();
    assert!(!fps.is_empty());
    for fp in &fps {
        assert!(fp.n0 >= 0.0);
    }
}

#[test]
fn response_dataset_matches_curve() {
    let p = ModelParams::new(2.0, -2.0, 1.0).unwrap();
    let mut spec = SweepSpec::new(Quantity::Response);
    spec.eps_p = Some(Grid::new(0.9, 1.1, 41).unwrap());
    let ds = run_sweep(&spec, &p).unwrap();
    let direct: usize = Grid::new(0.9, 1.1, 41)
        .unwrap()
        .values()
        .iter()
        .map(|&e| fixed_points(e, &p).unwrap().len())
        .sum();
    assert_eq!(ds.len(), direct);
}

#[test]
fn min_force_linear_limit_in_sweep() {
    // χ = 0: (ε_s^min)² = (γ²/4) λ²/(γ²/4 + λ²) with λ² = γ²/4 + Δ².
    let p = ModelParams::new(2.0, 0.7, 0.0).unwrap();
    let Dataset::MinForce(rows) = run_sweep(&SweepSpec::new(Quantity::MinForce), &p).unwrap() else {
        panic!("wrong dataset kind")
    };
    let l2: f64 = 1.0 + 0.49;
    let want = (1.0 * l2 / (1.0 + l2)).sqrt();
    for r in rows {
        assert_relative_eq!(r.eps_s_min, want, max_relative = 1e-14);
    }
}

#[test]
fn unstable_min_force_rejected() {
    let p = ModelParams::new(2.0, -2.0, 1.0).unwrap();
    let fps = fixed_points(0.95f64.sqrt(), &p).unwrap();
    assert!(min_force_nonlinear(&fps[1], &p).is_err());
    assert!(min_force_nonlinear(&fps[0], &p).is_ok());
}

#[test]
fn oracle_reports_reproducible() {
    assert_eq!(verify::run_all(30, 9), verify::run_all(30, 9));
    let a = verify::sample_fixed_points(20, 1, Regime::Stable);
    let b = verify::sample_fixed_points(20, 2, Regime::Stable);
    assert_ne!(a, b);
}

#[test]
fn partition_counts_add_up() {
    let p = ModelParams::new(2.0, -2.0, 1.0).unwrap();
    let mut spec = SweepSpec::new(Quantity::Gain);
    spec.n0 = Some(Grid::new(0.0, 1.6, 81).unwrap());
    spec.delta = Some(Grid::new(-3.0, 3.0, 7).unwrap());
    spec.include_unstable = true;
    let ds = run_sweep(&spec, &p).unwrap();
    let part = branch_partition(&ds);
    let kept: usize = part.parts.iter().map(|(_, d)| d.len()).sum();
    assert_eq!(kept + part.dropped_middle, ds.len());
    assert!(part.dropped_middle > 0);
    assert!(part.get(Branch::Middle).is_none());
}

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (0.5f64..4.0, -4.0f64..4.0, 0.01f64..2.0).prop_map(|(g, d, c)| ModelParams::new(g, d, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn surfaces_respect_mask(p in params_strategy()) {
        let mut spec = SweepSpec::new(Quantity::Noise);
        spec.delta = Some(Grid::new(-2.0, 2.0, 9).unwrap());
        let ds = run_sweep(&spec, &p);
        prop_assume!(ds.is_ok());
        let mask = spec.mask(&p);
        let Dataset::Noise(rows) = ds.unwrap() else { unreachable!() };
        for r in rows {
            prop_assert!(r.branch != Branch::Middle);
            if r.lambda_sq < mask.lambda_sq_min {
                prop_assert!(r.near_critical);
            }
            if !r.near_critical {
                prop_assert!(r.s.is_finite() && r.s.abs() <= DIVERGENCE_LIMIT);
                // Total noise stays non-negative away from the mask.
                prop_assert!(r.s_total >= -1e-9, "S+1 = {}", r.s_total);
            }
        }
    }

    #[test]
    fn gain_matrix_conjugate_structure(p in params_strategy(), n_scale in 0.0f64..1.5, omega in -5.0f64..5.0) {
        let n0 = n_scale * (p.pump_detuning.abs() + p.gamma) / p.chi;
        let fp = duffamp_core::FixedPoint::at_occupation(n0, &p).unwrap();
        prop_assume!(fp.lambda_sq.abs() > 1e-6);
        let plus = gain_matrix(omega, &fp, &p);
        let minus = gain_matrix(-omega, &fp, &p);
        prop_assume!(plus.is_ok() && minus.is_ok());
        let (plus, minus) = (plus.unwrap(), minus.unwrap());
        // 𝒢22(ω) = 𝒢11(−ω)* and 𝒢21(ω) = 𝒢12(−ω)*.
        let scale = plus.entries.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!((plus.element(2, 2) - minus.element(1, 1).conj()).norm() <= 1e-12 * scale);
        prop_assert!((plus.element(2, 1) - minus.element(1, 2).conj()).norm() <= 1e-12 * scale);
    }

    #[test]
    fn csv_rows_match_dataset(p in params_strategy()) {
        let mut spec = SweepSpec::new(Quantity::MinForce);
        spec.n0 = Some(Grid::new(0.0, 1.0, 5).unwrap());
        let ds = run_sweep(&spec, &p);
        prop_assume!(ds.is_ok());
        let ds = ds.unwrap();
        let csv = ds.to_csv_string();
        prop_assert_eq!(csv.lines().count(), ds.len() + 1);
        for line in csv.lines().skip(1) {
            prop_assert_eq!(line.split(',').count(), ds.columns().len());
        }
    }
}
