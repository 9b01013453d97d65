//! Tabular datasets over pump, detuning and occupation grids.
//!
//! Response curves are parametrised by the pump amplitude. Gain, noise and
//! minimum-force datasets are parametrised by `n0`, with the pump derived per
//! point from the state equation, and are emitted branch by branch. Rows are
//! produced in grid order whatever the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::model::{DriveConfig, LoSideband, ModelParams};
use crate::noise::{homodyne_dc_noise, min_force_empty, min_force_nonlinear, UNPHYSICAL_TOL};
use crate::response::{
    gain_angle, homodyne_signal, optimal_phase, upper_sideband_optimal_phase, CriticalMask,
};
use crate::steady_state::{
    check_monotone, classify_branch, pump_intensity, response_curve, turning_points, Branch,
    FixedPoint,
};

pub const DEFAULT_POINTS: usize = 201;
/// Values larger than this are treated as divergent and always flagged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
/// Relative gap between a default branch range and the mask edge.
const EDGE_INSET: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Response,
    Gain,
    Noise,
    MinForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchFilter {
    Lower,
    Upper,
    #[default]
    All,
}

impl BranchFilter {
    fn admits(self, branch: Branch) -> bool {
        match self {
            BranchFilter::All => true,
            BranchFilter::Lower => branch == Branch::Lower,
            BranchFilter::Upper => branch == Branch::Upper,
        }
    }
}

/// Local-oscillator phase used for surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "theta")]
pub enum ThetaMode {
    /// The gain-maximising phase at each `(δ, n0)`.
    #[default]
    Optimal,
    Fixed(f64),
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        let g = Self { start, stop, points };
        g.validate("grid")?;
        Ok(g)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidGrid(format!("{name}: needs at least 2 points")));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidGrid(format!("{name}: bounds must be finite")));
        }
        if self.start == self.stop {
            return Err(Error::InvalidGrid(format!("{name}: start equals stop")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * (k as f64 / last)
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    /// Parses `start:stop:points`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(Error::InvalidGrid(format!("expected start:stop:points, got {s:?}")));
        };
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidGrid(format!("{x:?}: {e}")))
        };
        let points = n
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::InvalidGrid(format!("{n:?}: {e}")))?;
        Grid::new(parse(a)?, parse(b)?, points)
    }
}

/// What to compute and over which grids. Unset grids take defaults derived
/// from the model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub quantity: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_p: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<Grid>,
    #[serde(default)]
    pub branch: BranchFilter,
    /// `λ²_min`; defaults to `10⁻³ γ²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_lambda_sq: Option<f64>,
    pub signal_amplitude: f64,
    #[serde(default)]
    pub theta: ThetaMode,
    #[serde(default)]
    pub lo_sideband: LoSideband,
    /// Emit middle-branch rows on surfaces as well.
    #[serde(default)]
    pub include_unstable: bool,
}

impl SweepSpec {
    pub fn new(quantity: Quantity) -> Self {
        Self {
            quantity,
            eps_p: None,
            delta: None,
            n0: None,
            branch: BranchFilter::All,
            mask_lambda_sq: None,
            signal_amplitude: 1.0,
            theta: ThetaMode::Optimal,
            lo_sideband: LoSideband::Lower,
            include_unstable: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("eps_p", self.eps_p), ("delta", self.delta), ("n0", self.n0)] {
            if let Some(g) = g {
                g.validate(name)?;
            }
        }
        if let Some(g) = self.eps_p {
            if g.start.min(g.stop) < 0.0 {
                return Err(Error::Domain("pump amplitudes must be non-negative".into()));
            }
        }
        if let Some(g) = self.n0 {
            if g.start.min(g.stop) < 0.0 {
                return Err(Error::Domain("occupations must be non-negative".into()));
            }
        }
        if let Some(m) = self.mask_lambda_sq {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::Domain(format!("mask threshold must be finite and >= 0, got {m}")));
            }
        }
        if !self.signal_amplitude.is_finite() || self.signal_amplitude < 0.0 {
            return Err(Error::Domain("signal amplitude must be finite and >= 0".into()));
        }
        if let ThetaMode::Fixed(t) = self.theta {
            if !t.is_finite() {
                return Err(Error::Domain("fixed phase must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn mask(&self, params: &ModelParams) -> CriticalMask {
        self.mask_lambda_sq
            .map(CriticalMask::new)
            .unwrap_or_else(|| CriticalMask::for_params(params))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseRow {
    pub eps_p: f64,
    pub intensity: f64,
    pub n0: f64,
    pub branch: Branch,
    pub stable: bool,
    pub re_lambda_plus: f64,
    pub im_lambda_plus: f64,
    pub lambda_sq: f64,
    pub phi0: f64,
}

impl ResponseRow {
    pub fn new(eps_p: f64, fp: &FixedPoint) -> Self {
        Self {
            eps_p,
            intensity: eps_p * eps_p,
            n0: fp.n0,
            branch: fp.branch,
            stable: fp.stable,
            re_lambda_plus: fp.lambda_plus.re,
            im_lambda_plus: fp.lambda_plus.im,
            lambda_sq: fp.lambda_sq,
            phi0: fp.phi0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainRow {
    pub delta: f64,
    pub n0: f64,
    pub eps_p: f64,
    pub branch: Branch,
    pub lambda_sq: f64,
    pub phi0: f64,
    pub nu: f64,
    pub theta: f64,
    pub g: f64,
    pub near_critical: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseRow {
    pub delta: f64,
    pub n0: f64,
    pub eps_p: f64,
    pub branch: Branch,
    pub lambda_sq: f64,
    pub theta: f64,
    pub s: f64,
    pub s_total: f64,
    pub near_critical: bool,
    pub unphysical: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinForceRow {
    pub n0: f64,
    pub eps_p: f64,
    pub branch: Branch,
    pub lambda_sq: f64,
    /// NaN when the squared value is negative.
    pub eps_s_min: f64,
    pub eps_s_min_sq: f64,
    pub empty_cavity_ref: f64,
    pub near_critical: bool,
    pub unphysical: bool,
}

/// CSV cell for a float: 17 significant digits, round-trip exact.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

trait CsvRow {
    const COLUMNS: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
    fn branch(&self) -> Branch;
}

impl CsvRow for ResponseRow {
    const COLUMNS: &'static [&'static str] = &[
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
    fn cells(&self) -> Vec<String> {
        vec![
            num(self.eps_p),
            num(self.intensity),
            num(self.n0),
            self.branch.to_string(),
            self.stable.to_string(),
            num(self.re_lambda_plus),
            num(self.im_lambda_plus),
            num(self.lambda_sq),
            num(self.phi0),
        ]
    }
    fn branch(&self) -> Branch {
        self.branch
    }
}

impl CsvRow for GainRow {
    const COLUMNS: &'static [&'static str] =
        &["delta", "n0", "branch", "lambda_sq", "nu", "g", "near_critical"];
    fn cells(&self) -> Vec<String> {
        vec![
            num(self.delta),
            num(self.n0),
            self.branch.to_string(),
            num(self.lambda_sq),
            num(self.nu),
            num(self.g),
            self.near_critical.to_string(),
        ]
    }
    fn branch(&self) -> Branch {
        self.branch
    }
}

impl CsvRow for NoiseRow {
    const COLUMNS: &'static [&'static str] = &[
        "delta",
        "n0",
        "branch",
        "theta",
        "S",
        "S_total",
        "near_critical",
        "unphysical",
    ];
    fn cells(&self) -> Vec<String> {
        vec![
            num(self.delta),
            num(self.n0),
            self.branch.to_string(),
            num(self.theta),
            num(self.s),
            num(self.s_total),
            self.near_critical.to_string(),
            self.unphysical.to_string(),
        ]
    }
    fn branch(&self) -> Branch {
        self.branch
    }
}

impl CsvRow for MinForceRow {
    const COLUMNS: &'static [&'static str] =
        &["n0", "eps_p", "lambda_sq", "eps_s_min", "empty_cavity_ref"];
    fn cells(&self) -> Vec<String> {
        vec![
            num(self.n0),
            num(self.eps_p),
            num(self.lambda_sq),
            num(self.eps_s_min),
            num(self.empty_cavity_ref),
        ]
    }
    fn branch(&self) -> Branch {
        self.branch
    }
}

fn write_rows<R: CsvRow, W: Write>(rows: &[R], mut w: W) -> io::Result<()> {
    writeln!(w, "{}", R::COLUMNS.join(","))?;
    for r in rows {
        writeln!(w, "{}", r.cells().join(","))?;
    }
    Ok(())
}

/// Rows of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "quantity", content = "rows", rename_all = "lowercase")]
pub enum Dataset {
    Response(Vec<ResponseRow>),
    Gain(Vec<GainRow>),
    Noise(Vec<NoiseRow>),
    MinForce(Vec<MinForceRow>),
}

macro_rules! each_rows {
    ($ds:expr, $rows:ident => $body:expr) => {
        match $ds {
            Dataset::Response($rows) => $body,
            Dataset::Gain($rows) => $body,
            Dataset::Noise($rows) => $body,
            Dataset::MinForce($rows) => $body,
        }
    };
}

impl Dataset {
    pub fn quantity(&self) -> Quantity {
        match self {
            Dataset::Response(_) => Quantity::Response,
            Dataset::Gain(_) => Quantity::Gain,
            Dataset::Noise(_) => Quantity::Noise,
            Dataset::MinForce(_) => Quantity::MinForce,
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Dataset::Response(_) => ResponseRow::COLUMNS,
            Dataset::Gain(_) => GainRow::COLUMNS,
            Dataset::Noise(_) => NoiseRow::COLUMNS,
            Dataset::MinForce(_) => MinForceRow::COLUMNS,
        }
    }

    pub fn len(&self) -> usize {
        each_rows!(self, rows => rows.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Branch label of every row, in order.
    pub fn branches(&self) -> Vec<Branch> {
        each_rows!(self, rows => rows.iter().map(CsvRow::branch).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        each_rows!(self, rows => write_rows(rows, w))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    fn filtered(&self, keep: impl Fn(Branch) -> bool) -> Dataset {
        match self {
            Dataset::Response(r) => Dataset::Response(r.iter().filter(|x| keep(x.branch)).copied().collect()),
            Dataset::Gain(r) => Dataset::Gain(r.iter().filter(|x| keep(x.branch)).copied().collect()),
            Dataset::Noise(r) => Dataset::Noise(r.iter().filter(|x| keep(x.branch)).copied().collect()),
            Dataset::MinForce(r) => Dataset::MinForce(r.iter().filter(|x| keep(x.branch)).copied().collect()),
        }
    }
}

/// A dataset split by branch label.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPartition {
    /// Ordered Lower, Upper, Single; only labels that occur.
    pub parts: Vec<(Branch, Dataset)>,
    pub dropped_middle: usize,
}

impl BranchPartition {
    pub fn get(&self, branch: Branch) -> Option<&Dataset> {
        self.parts.iter().find(|(b, _)| *b == branch).map(|(_, d)| d)
    }
}

/// Splits rows by branch, dropping middle-branch rows (counted).
pub fn branch_partition(dataset: &Dataset) -> BranchPartition {
    let labels = dataset.branches();
    let dropped_middle = labels.iter().filter(|b| **b == Branch::Middle).count();
    let parts = [Branch::Lower, Branch::Upper, Branch::Single]
        .into_iter()
        .filter(|b| labels.contains(b))
        .map(|b| (b, dataset.filtered(|x| x == b)))
        .collect();
    BranchPartition {
        parts,
        dropped_middle,
    }
}

/// Occupation range `[lo, hi]` of one branch used by default on surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchRange {
    pub branch: Branch,
    pub n0_min: f64,
    pub n0_max: f64,
}

/// Occupations where `λ²(n0) = λ²_min`, ascending, if any.
fn mask_edges(params: &ModelParams, lambda_sq_min: f64) -> Option<(f64, f64)> {
    // λ² = 12χ²n² + 8χΔn + Δ² + γ²/4
    let (g, d, c) = (params.gamma, params.pump_detuning, params.chi);
    let a = 12.0 * c * c;
    let b = 8.0 * c * d;
    let k = d * d + g * g / 4.0 - lambda_sq_min;
    let disc = b * b - 4.0 * a * k;
    if a == 0.0 || disc < 0.0 {
        return None;
    }
    let r = disc.sqrt();
    // Stable quadratic roots.
    let q = -0.5 * (b + b.signum() * r);
    let (x1, x2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, k / q) };
    Some((x1.min(x2), x1.max(x2)))
}

/// Default `n0` ranges for each stable branch, inset by the mask.
///
/// Bistable: lower `[0, edge]`, upper `[edge, 2·n_upper]`, where the edges are
/// the mask crossings around the fold. Monostable: `[0, 2·max(−Δ/3χ, γ/2χ)]`.
/// Linear resonator: `[0, 1]`.
pub fn default_branch_ranges(params: &ModelParams, mask: &CriticalMask) -> Vec<BranchRange> {
    let (g, d, c) = (params.gamma, params.pump_detuning, params.chi);
    if c == 0.0 {
        return vec![BranchRange { branch: Branch::Single, n0_min: 0.0, n0_max: 1.0 }];
    }
    match turning_points(params).as_slice() {
        [lo, hi] => {
            let (a, b) = mask_edges(params, mask.lambda_sq_min).unwrap_or((*lo, *hi));
            // Keep the end rows strictly outside the mask despite rounding.
            let inset = EDGE_INSET * hi;
            vec![
                BranchRange { branch: Branch::Lower, n0_min: 0.0, n0_max: (a.min(*lo) - inset).max(0.0) },
                BranchRange { branch: Branch::Upper, n0_min: b.max(*hi) + inset, n0_max: 2.0 * hi },
            ]
        }
        _ => {
            let scale = (-d / (3.0 * c)).max(g / (2.0 * c));
            vec![BranchRange { branch: Branch::Single, n0_min: 0.0, n0_max: 2.0 * scale }]
        }
    }
}

fn default_delta(params: &ModelParams) -> Grid {
    let w = 3.0 * params.gamma;
    Grid { start: -w, stop: w, points: DEFAULT_POINTS }
}

fn default_eps_p(params: &ModelParams) -> Result<Grid> {
    let mask = CriticalMask::for_params(params);
    let n_max = default_branch_ranges(params, &mask)
        .iter()
        .map(|r| r.n0_max)
        .fold(0.0, f64::max);
    let stop = pump_intensity(n_max, params)?.sqrt();
    Ok(Grid { start: 0.0, stop, points: DEFAULT_POINTS })
}

/// `(n0, fixed point)` pairs to evaluate surfaces on, in branch then grid order.
fn surface_points(spec: &SweepSpec, params: &ModelParams) -> Result<Vec<FixedPoint>> {
    let mask = spec.mask(params);
    let occupations: Vec<f64> = match spec.n0 {
        Some(g) => g.values(),
        None => default_branch_ranges(params, &mask)
            .into_iter()
            .filter(|r| spec.branch.admits(r.branch) && r.n0_max > r.n0_min)
            .flat_map(|r| Grid { start: r.n0_min, stop: r.n0_max, points: DEFAULT_POINTS }.values())
            .collect(),
    };
    let mut out = Vec::with_capacity(occupations.len());
    for n0 in occupations {
        let fp = FixedPoint::at_occupation(n0, params)?;
        let (branch, _) = classify_branch(n0, params);
        if branch == Branch::Middle && !spec.include_unstable {
            continue;
        }
        if !spec.branch.admits(branch) {
            continue;
        }
        out.push(fp);
    }
    Ok(out)
}

/// Runs one sweep.
///
/// Critical points never abort a surface: the affected values are NaN and the
/// row is flagged `near_critical`. An empty result is an error.
pub fn run_sweep(spec: &SweepSpec, params: &ModelParams) -> Result<Dataset> {
    params.validate()?;
    spec.validate()?;
    let dataset = match spec.quantity {
        Quantity::Response => Dataset::Response(response_rows(spec, params)?),
        Quantity::Gain => Dataset::Gain(gain_rows(spec, params)?),
        Quantity::Noise => Dataset::Noise(noise_rows(spec, params)?),
        Quantity::MinForce => Dataset::MinForce(min_force_rows(spec, params)?),
    };
    if dataset.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{:?} sweep produced no rows for branch filter {:?} (gamma={}, delta={}, chi={})",
            spec.quantity, spec.branch, params.gamma, params.pump_detuning, params.chi
        )));
    }
    check_branch_monotone(&dataset)?;
    Ok(dataset)
}

fn response_rows(spec: &SweepSpec, params: &ModelParams) -> Result<Vec<ResponseRow>> {
    let grid = match spec.eps_p {
        Some(g) => g.values(),
        None => default_eps_p(params)?.values(),
    };
    check_monotone("eps_p", &grid)?;
    let curve = response_curve(&grid, params)?;
    Ok(curve
        .rows()
        .filter(|(_, fp)| spec.branch.admits(fp.branch))
        .map(|(eps, fp)| ResponseRow::new(eps, fp))
        .collect())
}

fn surface_grid(spec: &SweepSpec, params: &ModelParams) -> Result<(Vec<FixedPoint>, Vec<f64>)> {
    let points = surface_points(spec, params)?;
    let deltas = spec.delta.unwrap_or_else(|| default_delta(params)).values();
    Ok((points, deltas))
}

fn drive_for(spec: &SweepSpec, fp: &FixedPoint, delta: f64, theta: f64) -> DriveConfig {
    DriveConfig {
        pump_amplitude: fp.pump_amplitude,
        signal_amplitude: spec.signal_amplitude,
        signal_detuning: delta,
        lo_phase: theta,
        lo_sideband: spec.lo_sideband,
    }
}

/// The phase a surface row is evaluated at; NaN at a critical point.
fn row_theta(spec: &SweepSpec, fp: &FixedPoint, params: &ModelParams, delta: f64) -> f64 {
    match (spec.theta, spec.lo_sideband) {
        (ThetaMode::Fixed(t), _) => t,
        (ThetaMode::Optimal, LoSideband::Lower) => optimal_phase(delta, fp, params),
        (ThetaMode::Optimal, LoSideband::Upper) => {
            upper_sideband_optimal_phase(delta, fp, params).unwrap_or(f64::NAN)
        }
    }
}

fn divergent(x: f64) -> bool {
    !x.is_finite() || x.abs() > DIVERGENCE_LIMIT
}

fn gain_rows(spec: &SweepSpec, params: &ModelParams) -> Result<Vec<GainRow>> {
    let mask = spec.mask(params);
    let (points, deltas) = surface_grid(spec, params)?;
    let cells: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|i| (0..deltas.len()).map(move |j| (i, j)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(i, j)| {
            let fp = &points[i];
            let delta = deltas[j];
            let theta = row_theta(spec, fp, params, delta);
            let g = if theta.is_nan() {
                f64::NAN
            } else {
                homodyne_signal(fp, params, &drive_for(spec, fp, delta, theta)).unwrap_or(f64::NAN)
            };
            GainRow {
                delta,
                n0: fp.n0,
                eps_p: fp.pump_amplitude,
                branch: fp.branch,
                lambda_sq: fp.lambda_sq,
                phi0: fp.phi0,
                nu: gain_angle(delta, fp, params),
                theta,
                g,
                near_critical: mask.is_near_critical(fp) || divergent(g),
            }
        })
        .collect())
}

fn noise_rows(spec: &SweepSpec, params: &ModelParams) -> Result<Vec<NoiseRow>> {
    let mask = spec.mask(params);
    let (points, deltas) = surface_grid(spec, params)?;
    let cells: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|i| (0..deltas.len()).map(move |j| (i, j)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(i, j)| {
            let fp = &points[i];
            let delta = deltas[j];
            let theta = row_theta(spec, fp, params, delta);
            let s = if theta.is_nan() {
                f64::NAN
            } else {
                homodyne_dc_noise(fp, params, &drive_for(spec, fp, delta, theta)).unwrap_or(f64::NAN)
            };
            let total = s + 1.0;
            NoiseRow {
                delta,
                n0: fp.n0,
                eps_p: fp.pump_amplitude,
                branch: fp.branch,
                lambda_sq: fp.lambda_sq,
                theta,
                s,
                s_total: total,
                near_critical: mask.is_near_critical(fp) || divergent(s),
                unphysical: total < UNPHYSICAL_TOL,
            }
        })
        .collect())
}

fn min_force_rows(spec: &SweepSpec, params: &ModelParams) -> Result<Vec<MinForceRow>> {
    let mask = spec.mask(params);
    let points = surface_points(spec, params)?;
    let reference = min_force_empty(0.0, params.gamma);
    Ok(points
        .into_par_iter()
        .map(|fp| {
            let (sq, unphysical) = match min_force_nonlinear(&fp, params) {
                Ok(m) => (m.eps_s_min_sq, m.unphysical),
                Err(_) => (f64::NAN, false),
            };
            MinForceRow {
                n0: fp.n0,
                eps_p: fp.pump_amplitude,
                branch: fp.branch,
                lambda_sq: fp.lambda_sq,
                eps_s_min: if sq >= 0.0 { sq.sqrt() } else { f64::NAN },
                eps_s_min_sq: sq,
                empty_cavity_ref: reference,
                near_critical: mask.is_near_critical(&fp) || divergent(sq),
                unphysical,
            }
        })
        .collect())
}

/// On every stable branch `n0` must increase with the pump.
fn check_branch_monotone(dataset: &Dataset) -> Result<()> {
    let pairs: Vec<(Branch, f64, f64)> = match dataset {
        Dataset::Response(r) => r.iter().filter(|x| x.stable).map(|x| (x.branch, x.eps_p, x.n0)).collect(),
        Dataset::Gain(r) => r.iter().map(|x| (x.branch, x.eps_p, x.n0)).collect(),
        Dataset::Noise(r) => r.iter().map(|x| (x.branch, x.eps_p, x.n0)).collect(),
        Dataset::MinForce(r) => r.iter().map(|x| (x.branch, x.eps_p, x.n0)).collect(),
    };
    for branch in [Branch::Lower, Branch::Upper, Branch::Single] {
        let mut pts: Vec<(f64, f64)> = pairs
            .iter()
            .filter(|p| p.0 == branch)
            .map(|p| (p.1, p.2))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup();
        for w in pts.windows(2) {
            if w[1].0 > w[0].0 && w[1].1 < w[0].1 {
                return Err(Error::Numerical(format!(
                    "{branch} branch: n0 decreases from {} to {} as eps_p rises from {} to {}",
                    w[0].1, w[1].1, w[0].0, w[1].0
                )));
            }
        }
    }
    Ok(())
}

/// Provenance written next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub generator: String,
    pub quantity: Quantity,
    pub columns: Vec<String>,
    pub rows: usize,
    pub dropped_middle: usize,
    pub branch_rows: Vec<BranchCount>,
    pub lambda_sq_min: f64,
    /// Set when the dataset is the fixed points of a single pump amplitude.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_amplitude: Option<f64>,
    pub params: ModelParams,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchCount {
    pub branch: Branch,
    pub rows: usize,
}

impl SweepMetadata {
    pub fn new(spec: &SweepSpec, params: &ModelParams, dataset: &Dataset) -> Self {
        let part = branch_partition(dataset);
        Self {
            generator: concat!("duffamp ", env!("CARGO_PKG_VERSION")).to_string(),
            quantity: dataset.quantity(),
            columns: dataset.columns().iter().map(|c| c.to_string()).collect(),
            rows: dataset.len(),
            dropped_middle: part.dropped_middle,
            branch_rows: part
                .parts
                .iter()
                .map(|(b, d)| BranchCount { branch: *b, rows: d.len() })
                .collect(),
            lambda_sq_min: spec.mask(params).lambda_sq_min,
            pump_amplitude: None,
            params: *params,
            spec: *spec,
        }
    }

    pub fn with_pump_amplitude(mut self, eps_p: f64) -> Self {
        self.pump_amplitude = Some(eps_p);
        self
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Numerical(format!("metadata serialisation: {e}")))
    }
}
