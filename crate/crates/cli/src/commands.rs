use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use gensync_core::analysis::{bounds_report, estimate_theta_bounds, sync_error_bound, BoundsReport, ThetaBounds};
use gensync_core::config::{load_high_order, load_scenario, validate_scenario};
use gensync_core::high_order::{
    probe_context, ratio_tests_at, reduce_to_damped_with, validate_reduction, AgreementSetup, HighOrderParams,
    RatioTest, ReductionReport, SlowContext,
};
use gensync_core::model::GeneratorParams;
use gensync_core::sim::{run, sweep, ModelKind, Scenario, SweepResult, Trajectory};

use crate::{io_err, svg, CliError, Result};

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

pub fn load(path: &Path, ov: Overrides) -> Result<Scenario> {
    let mut sc = load_scenario(path).map_err(|e| match e {
        gensync_core::Error::Io(source) => CliError::Io { context: format!("reading {}", path.display()), source },
        e => e.into(),
    })?;
    if let Some(dt) = ov.dt {
        sc.sim.dt = Some(dt);
    }
    if let Some(h) = ov.horizon {
        sc.sim.horizon = h;
    }
    validate_scenario(&sc)?;
    Ok(sc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdicts {
    /// `|omega3 - omega0| <= freq_band` at every recorded sample.
    pub freq_within_band: bool,
    /// Steady `|e|` does not exceed the synchronization-error bound.
    pub steady_error_within_bound: Option<bool>,
    /// The offset stays below the assumed undetectable-spoof size.
    pub disturbance_within_spoof_cap: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub model_kind: ModelKind,
    pub connected: bool,
    pub connection_time: Option<f64>,
    /// Wrapped true phase error at connection.
    pub phase_error_at_connection: Option<f64>,
    /// `sup |e|` over the last fifth of the horizon; `None` when the run
    /// ended before it.
    pub steady_speed_error: Option<f64>,
    pub max_freq_deviation: f64,
    pub omega0: f64,
    pub bounds: Option<BoundsReport>,
    pub verdicts: Verdicts,
}

impl RunSummary {
    pub fn from_run(sc: &Scenario, traj: &Trajectory) -> Self {
        let omega0 = sc.params.omega0;
        let steady = traj.tail_sup_abs_e();
        let max_dev = traj.max_freq_deviation(omega0);
        let bounds = bounds_for(sc);
        RunSummary {
            model_kind: sc.sim.model_kind,
            connected: traj.connection().is_some(),
            connection_time: traj.connection_time(),
            phase_error_at_connection: traj.connection().and_then(|e| e.true_phase_error),
            steady_speed_error: steady,
            max_freq_deviation: max_dev,
            omega0,
            verdicts: Verdicts {
                freq_within_band: max_dev <= sc.thresholds.freq_band,
                steady_error_within_bound: bounds.as_ref().zip(steady).map(|(b, e)| e <= b.sync_error_bound),
                disturbance_within_spoof_cap: !sc.disturbance.exceeds_spoof_cap(),
            },
            bounds,
        }
    }

    /// `key = value` lines; absent values print as `none`.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        let optb = |v: Option<bool>| v.map_or("none".to_string(), |x| x.to_string());
        let kind = match self.model_kind {
            ModelKind::Damped => "damped",
            ModelKind::HighOrder => "high-order",
            ModelKind::PhaseDamping => "phase-damping",
        };
        let mut out = String::new();
        let _ = writeln!(out, "model_kind = {kind}");
        let _ = writeln!(out, "connected = {}", self.connected);
        let _ = writeln!(out, "connection_time = {}", opt(self.connection_time));
        let _ = writeln!(out, "phase_error_at_connection = {}", opt(self.phase_error_at_connection));
        let _ = writeln!(out, "steady_speed_error = {}", opt(self.steady_speed_error));
        let _ = writeln!(out, "max_freq_deviation = {}", self.max_freq_deviation);
        let _ = writeln!(out, "omega0 = {}", self.omega0);
        match &self.bounds {
            Some(b) => {
                for line in b.to_text().lines() {
                    let _ = writeln!(out, "bounds.{line}");
                }
            }
            None => out.push_str("bounds = none\n"),
        }
        let v = &self.verdicts;
        let _ = writeln!(out, "verdict.freq_within_band = {}", v.freq_within_band);
        let _ = writeln!(out, "verdict.steady_error_within_bound = {}", optb(v.steady_error_within_bound));
        let _ = writeln!(out, "verdict.disturbance_within_spoof_cap = {}", v.disturbance_within_spoof_cap);
        out
    }
}

/// Bounds of the damped model the run is compared with; the detailed model
/// uses its reduction. They do not apply to phase-dependent damping.
fn bounds_for(sc: &Scenario) -> Option<BoundsReport> {
    let params = match sc.sim.model_kind {
        ModelKind::Damped => sc.params,
        ModelKind::HighOrder => {
            let ho = sc.high_order.clone().unwrap_or_else(HighOrderParams::default_set);
            reduce_to_damped_with(&ho, &sc.params).ok()?
        }
        ModelKind::PhaseDamping => return None,
    };
    bounds_report(&params, &sc.load, sc.disturbance.amplitude(), sc.sim.horizon).ok()
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(format!("writing {}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(format!("creating {}", dir.display())))
}

/// Files written by [`run_scenario`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub trajectory: Trajectory,
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
}

/// Run, then write `trajectory.csv`, `summary.txt` and optionally
/// `trajectory.svg` into `out_dir`.
pub fn run_scenario(sc: &Scenario, out_dir: &Path, with_svg: bool) -> Result<RunOutput> {
    let traj = run(sc)?;
    let summary = RunSummary::from_run(sc, &traj);
    ensure_dir(out_dir)?;
    let csv = out_dir.join("trajectory.csv");
    write(&csv, &traj.to_csv_string())?;
    write(&out_dir.join("summary.txt"), &summary.to_text())?;
    let svg = if with_svg {
        let path = out_dir.join("trajectory.svg");
        write(&path, &svg::render(&traj, &sc.thresholds, sc.params.omega0))?;
        Some(path)
    } else {
        None
    };
    Ok(RunOutput { summary, trajectory: traj, csv, svg })
}

pub fn cmd_run(config: &Path, out_dir: &Path, ov: Overrides, with_svg: bool) -> Result<RunOutput> {
    run_scenario(&load(config, ov)?, out_dir, with_svg)
}

/// The three offsets of the published comparison table.
pub const TABLE_OFFSETS: [f64; 3] = [0.125 * PI, 0.25 * PI, 0.5 * PI];

#[derive(Debug, Clone)]
pub struct TableRow {
    pub d: f64,
    pub bound: f64,
    /// Relative deviation of the slope to the previous row from `k / D1_0`.
    pub slope_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BoundsOutput {
    pub report: BoundsReport,
    pub theta: ThetaBounds,
    pub table: Vec<TableRow>,
}

impl BoundsOutput {
    pub fn to_text(&self) -> String {
        let mut out = self.report.to_text();
        for r in &self.table {
            let _ = writeln!(
                out,
                "table d = {:.4}pi bound = {:.6}pi slope_rel_error = {}",
                r.d / PI,
                r.bound / PI,
                r.slope_error.map_or("-".to_string(), |e| format!("{e:.3e}"))
            );
        }
        out
    }

    /// One report row per table offset.
    pub fn to_csv(&self, params: &GeneratorParams) -> String {
        let mut out = BoundsReport::csv_header();
        out.push('\n');
        for r in &self.table {
            if let Ok(row) = BoundsReport::from_parts(params, self.report.delta_ell_dot, r.d, &self.theta) {
                out += &row.csv_row();
                out.push('\n');
            }
        }
        out
    }
}

pub fn bounds_table(params: &GeneratorParams, delta_theta: f64, delta_theta_dot: f64) -> Vec<TableRow> {
    let slope = params.k / params.d1_0;
    let mut rows: Vec<TableRow> = Vec::new();
    for d in TABLE_OFFSETS {
        let bound = sync_error_bound(params, d, delta_theta, delta_theta_dot);
        let slope_error = rows.last().map(|prev| ((bound - prev.bound) / (d - prev.d) - slope).abs() / slope);
        rows.push(TableRow { d, bound, slope_error });
    }
    rows
}

pub fn cmd_bounds(config: &Path, out_dir: Option<&Path>, ov: Overrides) -> Result<BoundsOutput> {
    let sc = load(config, ov)?;
    let theta = estimate_theta_bounds(&sc.params, &sc.load, sc.sim.horizon)?;
    let report = BoundsReport::from_parts(&sc.params, sc.load.delta_ell_dot, sc.disturbance.amplitude(), &theta)?;
    let table = bounds_table(&sc.params, theta.delta_theta, theta.delta_theta_dot);
    let out = BoundsOutput { report, theta, table };
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write(&dir.join("bounds.csv"), &out.to_csv(&sc.params))?;
        write(&dir.join("bounds.txt"), &out.to_text())?;
    }
    Ok(out)
}

/// Comma-separated list of numbers; an empty string is an empty list.
pub fn parse_list(what: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            parse_number(x).ok_or_else(|| {
                CliError::Config(gensync_core::Error::Config { path: what.into(), reason: format!("not a number: {x}") })
            })
        })
        .collect()
}

/// Plain numbers, or multiples of pi written as `0.25pi`.
fn parse_number(x: &str) -> Option<f64> {
    match x.strip_suffix("pi") {
        Some("") => Some(PI),
        Some(m) => m.parse::<f64>().ok().map(|v| v * PI),
        None => x.parse().ok(),
    }
}

pub fn cmd_sweep(config: &Path, ks: &[f64], ds: &[f64], out_dir: Option<&Path>, ov: Overrides) -> Result<SweepResult> {
    let sc = load(config, ov)?;
    let result = sweep(&sc, ks, ds)?;
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write(&dir.join("sweep.csv"), &result.to_csv_string())?;
    }
    Ok(result)
}

/// Ratio tests at one randomly drawn slow operating point.
#[derive(Debug, Clone)]
pub struct RandomProbe {
    pub context: SlowContext,
    pub tests: Vec<RatioTest>,
}

#[derive(Debug, Clone)]
pub struct ReductionOutcome {
    pub report: ReductionReport,
    pub probes: Vec<RandomProbe>,
}

impl ReductionOutcome {
    pub fn pass(&self) -> bool {
        self.report.pass() && self.probes.iter().all(|p| p.tests.iter().all(|t| t.pass))
    }

    pub fn to_text(&self) -> String {
        let mut out = self.report.to_text();
        for (i, p) in self.probes.iter().enumerate() {
            let c = &p.context;
            let worst = p
                .tests
                .iter()
                .filter(|t| t.order.is_some())
                .map(|t| (t.ratio - t.expected).abs())
                .fold(0.0, f64::max);
            let _ = writeln!(
                out,
                "probe {i} s={:.4} s_dot={:.4} s_ddot={:.4} omega1={:.4} omega1_dot={:.4} worst_ratio_deviation={worst:.4} pass={}",
                c.s,
                c.s_dot,
                c.s_ddot,
                c.omega1,
                c.omega1_dot,
                p.tests.iter().all(|t| t.pass)
            );
        }
        let _ = writeln!(out, "overall_pass={}", self.pass());
        out
    }
}

/// Ratio tests, round trip and trajectory agreement; with a seed, the ratio
/// tests are repeated at `probes` random slow operating points as well.
pub fn cmd_validate_reduction(config: &Path, seed: Option<u64>, probes: usize) -> Result<ReductionOutcome> {
    let p = load_high_order(config).map_err(|e| match e {
        gensync_core::Error::Io(source) => CliError::Io { context: format!("reading {}", config.display()), source },
        e => e.into(),
    })?;
    let report = validate_reduction(&p, &AgreementSetup::default())?;
    let mut out = ReductionOutcome { report, probes: Vec::new() };
    if let Some(seed) = seed {
        let base = probe_context(&p)?;
        let mut rng = StdRng::seed_from_u64(seed);
        for _ in 0..probes {
            let context = SlowContext {
                v3: 1.0,
                s: rng.gen_range(0.2..1.2),
                s_dot: rng.gen_range(-1.0..1.0),
                s_ddot: rng.gen_range(-1.0..1.0),
                omega1: base.omega1 + rng.gen_range(-1.0..1.0),
                omega1_dot: rng.gen_range(-0.5..0.5),
            };
            out.probes.push(RandomProbe { context, tests: ratio_tests_at(&p, &context)? });
        }
    }
    Ok(out)
}
