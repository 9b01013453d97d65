use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use duffamp_core::sweep::ResponseRow;
use duffamp_core::{
    branch_partition, fixed_points, run_sweep, verify, Dataset, ModelParams, OracleReport,
    Quantity, SweepMetadata, SweepSpec,
};

use crate::args::{Cli, Command, MinForceArgs, SteadyArgs, SurfaceArgs, VerifyArgs};
use crate::config::{self, FileConfig};
use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 1000;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let file = config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Steady(a) => steady(a, &file),
        Command::Gain(a) => surface(Quantity::Gain, a, &file),
        Command::Noise(a) => surface(Quantity::Noise, a, &file),
        Command::Minforce(a) => min_force(a, &file),
        Command::Verify(a) => run_verify(a, &file),
    }
}

/// Six-digit console number.
fn c6(x: f64) -> String {
    format!("{x:.6}")
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.toml");
    PathBuf::from(s)
}

/// Writes the CSV (to `out` or stdout) and, for files, its metadata sidecar.
fn emit(dataset: &Dataset, meta: &SweepMetadata, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(|e| io_at(path, e))?);
            dataset.write_csv(&mut w)?;
            w.flush()?;
            let side = sidecar_path(path);
            std::fs::write(&side, meta.to_toml()?).map_err(|e| io_at(&side, e))?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            dataset.write_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn io_at(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn summarise(dataset: &Dataset, out: Option<&Path>) {
    let part = branch_partition(dataset);
    let per_branch: Vec<String> = part
        .parts
        .iter()
        .map(|(b, d)| format!("{b}={}", d.len()))
        .collect();
    eprintln!(
        "{} rows ({}), middle rows dropped from partitions: {}{}",
        dataset.len(),
        per_branch.join(", "),
        part.dropped_middle,
        out.map(|p| format!(", written to {}", p.display())).unwrap_or_default()
    );
}

fn steady(a: &SteadyArgs, file: &FileConfig) -> Result<(), CliError> {
    let params = config::model_params(&a.model, &file.model)?;
    let drive = config::drive(&a.drive, &file.drive)?;
    let curve = config::grid(a.curve.as_deref().or(file.steady.curve.as_deref()), "curve")?;
    let out = a.out.clone().or(file.steady.out.clone());
    let branch = a.branch.map(Into::into).or(file.steady.branch).unwrap_or_default();
    let mut spec = SweepSpec::new(Quantity::Response);
    spec.branch = branch;
    if let Some(grid) = curve {
        spec.eps_p = Some(grid);
        let dataset = run_sweep(&spec, &params)?;
        let meta = SweepMetadata::new(&spec, &params, &dataset);
        emit(&dataset, &meta, out.as_deref())?;
        summarise(&dataset, out.as_deref());
        return Ok(());
    }
    let eps_p = drive
        .eps_p
        .ok_or_else(|| CliError::Config("steady needs --eps-p or --curve".into()))?;
    let fps = fixed_points(eps_p, &params)?;
    if fps.is_empty() {
        return Err(CliError::NoSolution(format!("no physical fixed point at eps_p = {eps_p}")));
    }
    print_fixed_points(&params, eps_p, &fps);
    if let Some(path) = out {
        let rows: Vec<ResponseRow> = fps.iter().map(|fp| ResponseRow::new(eps_p, fp)).collect();
        let dataset = Dataset::Response(rows);
        let meta = SweepMetadata::new(&spec, &params, &dataset).with_pump_amplitude(eps_p);
        emit(&dataset, &meta, Some(&path))?;
    }
    Ok(())
}

fn print_fixed_points(params: &ModelParams, eps_p: f64, fps: &[duffamp_core::FixedPoint]) {
    println!(
        "gamma={} delta={} chi={} eps_p={} I_p={}",
        c6(params.gamma),
        c6(params.pump_detuning),
        c6(params.chi),
        c6(eps_p),
        c6(eps_p * eps_p)
    );
    println!(
        "{:<8} {:>12} {:>7} {:>12} {:>12} {:>12} {:>12}",
        "branch", "n0", "stable", "re_lambda+", "im_lambda+", "lambda_sq", "phi0"
    );
    for fp in fps {
        println!(
            "{:<8} {:>12} {:>7} {:>12} {:>12} {:>12} {:>12}",
            fp.branch.as_str(),
            c6(fp.n0),
            fp.stable,
            c6(fp.lambda_plus.re),
            c6(fp.lambda_plus.im),
            c6(fp.lambda_sq),
            c6(fp.phi0)
        );
    }
}

fn surface(quantity: Quantity, a: &SurfaceArgs, file: &FileConfig) -> Result<(), CliError> {
    let params = config::model_params(&a.model, &file.model)?;
    let drive = config::drive(&a.drive, &file.drive)?;
    let section = match quantity {
        Quantity::Gain => &file.gain,
        _ => &file.noise,
    };
    let sweep = config::sweep(&a.sweep, &section.sweep_section())?;
    let delta = config::grid(
        a.detuning_range.as_deref().or(section.detuning_range.as_deref()),
        "detuning-range",
    )?;
    let mut spec = SweepSpec::new(quantity);
    spec.delta = delta;
    apply(&mut spec, &sweep, &drive);
    let dataset = run_sweep(&spec, &params)?;
    let meta = SweepMetadata::new(&spec, &params, &dataset);
    emit(&dataset, &meta, sweep.out.as_deref())?;
    summarise(&dataset, sweep.out.as_deref());
    report_extremes(&dataset);
    Ok(())
}

fn apply(spec: &mut SweepSpec, sweep: &config::SweepSettings, drive: &config::DriveSettings) {
    spec.n0 = sweep.n0;
    spec.branch = sweep.branch;
    spec.mask_lambda_sq = sweep.mask_lambda_sq;
    spec.include_unstable = sweep.include_unstable;
    spec.signal_amplitude = drive.eps_s;
    spec.theta = drive.theta;
    spec.lo_sideband = drive.lo_sideband;
}

fn report_extremes(dataset: &Dataset) {
    let (label, best) = match dataset {
        Dataset::Gain(rows) => (
            "max g",
            rows.iter().filter(|r| !r.near_critical).max_by(|a, b| a.g.total_cmp(&b.g)).map(|r| (r.g, r.delta, r.n0, r.branch)),
        ),
        Dataset::Noise(rows) => (
            "min S",
            rows.iter().filter(|r| !r.near_critical).min_by(|a, b| a.s.total_cmp(&b.s)).map(|r| (r.s, r.delta, r.n0, r.branch)),
        ),
        _ => return,
    };
    let flagged = match dataset {
        Dataset::Gain(rows) => rows.iter().filter(|r| r.near_critical).count(),
        Dataset::Noise(rows) => rows.iter().filter(|r| r.near_critical).count(),
        _ => 0,
    };
    if let Some((v, d, n, b)) = best {
        eprintln!("{label} (unflagged) = {} at delta={} n0={} branch={b}; near-critical rows: {flagged}", c6(v), c6(d), c6(n));
    }
}

fn min_force(a: &MinForceArgs, file: &FileConfig) -> Result<(), CliError> {
    let params = config::model_params(&a.model, &file.model)?;
    let drive = config::drive(&a.drive, &file.drive)?;
    let sweep = config::sweep(&a.sweep, &file.minforce)?;
    let mut spec = SweepSpec::new(Quantity::MinForce);
    apply(&mut spec, &sweep, &drive);
    let dataset = run_sweep(&spec, &params)?;
    let meta = SweepMetadata::new(&spec, &params, &dataset);
    emit(&dataset, &meta, sweep.out.as_deref())?;
    summarise(&dataset, sweep.out.as_deref());
    if let Dataset::MinForce(rows) = &dataset {
        let best = rows
            .iter()
            .filter(|r| r.eps_s_min.is_finite())
            .min_by(|a, b| a.eps_s_min.total_cmp(&b.eps_s_min));
        if let Some(r) = best {
            let below = rows.iter().filter(|x| x.eps_s_min < x.empty_cavity_ref).count();
            eprintln!(
                "min eps_s_min = {} at n0={} ({}); empty resonator {}; rows below it: {below}",
                c6(r.eps_s_min),
                c6(r.n0),
                r.branch,
                c6(r.empty_cavity_ref)
            );
        }
        let unphysical = rows.iter().filter(|r| r.unphysical).count();
        if unphysical > 0 {
            eprintln!("{unphysical} rows have a negative squared minimum force (eps_s_min = NaN)");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    seed: u64,
    samples: usize,
    passed: bool,
    checks: &'a [OracleReport],
}

fn run_verify(a: &VerifyArgs, file: &FileConfig) -> Result<(), CliError> {
    let seed = a.seed.or(file.verify.seed).unwrap_or(DEFAULT_SEED);
    let samples = a.samples.or(file.verify.samples).unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(CliError::Config("--samples must be positive".into()));
    }
    let reports = verify::run_all(samples, seed);
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if let Some(path) = a.report.clone().or(file.verify.report.clone()) {
        let doc = VerifyReport { seed, samples, passed: failed == 0, checks: &reports };
        let text = toml::to_string(&doc).map_err(|e| CliError::Other(e.to_string()))?;
        std::fs::write(&path, text).map_err(|e| io_at(&path, e))?;
    }
    if failed > 0 {
        return Err(CliError::OracleFailure(failed));
    }
    Ok(())
}
