//! Command dispatch for the `inls-lab` binary. Every command writes its
//! outputs (snapshots, CSV time series, a JSON summary with pass/fail flags)
//! under the output directory and reports via the exit code: 0 pass,
//! 1 contract failure, 2 configuration error.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{parse_config, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::StudyConfig;
use crate::integrator::{integrate, RunStatus};
use crate::invariants;
use crate::io::{self, DiagRow};
use crate::model::hardy_leak;
use crate::spectral::norms::{mass, sobolev_norm};
use crate::spectral::Grid;

#[derive(Parser)]
#[command(
    name = "inls-lab",
    about = "Pseudospectral lab for the intermediate NLS equation and its deep-water limit",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Integrate the configured initial state and store snapshots
    Simulate,
    /// Simulate and track mass, momentum, polynomial energies, Hardy leak
    Invariants,
    /// Simulate and track the Lax spectrum and a fractional energy
    Lax,
    /// Recovery-formula and gauged-equation residuals along a run
    GaugeCheck,
    /// Operator invariant battery on the smooth decaying corpus
    OperatorCheck,
    /// Deep-water limit study over h in {4, 8, 16, 32}
    LimitStudy,
    /// Bilinear space-time bound diagnostic over N in {8, 16, 32, 64}
    Strichartz,
    /// Long-horizon small-data bound
    Longtime,
    /// Integrator self-convergence order
    OrderCheck,
}

pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    configure_threads();
    match dispatch(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("INLS_LAB_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --config <path>".into()))?;
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(out) = &cli.out {
        cfg.output.directory = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output.directory)?;
    Ok(cfg.output.directory.clone())
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate => cmd_simulate(&load_config(cli)?),
        Command::Invariants => cmd_invariants(&load_config(cli)?),
        Command::Lax => cmd_lax(&load_config(cli)?),
        Command::GaugeCheck => cmd_gauge_check(&load_config(cli)?),
        Command::OperatorCheck => cmd_operator_check(cli),
        Command::LimitStudy => cmd_limit_study(&load_config(cli)?),
        Command::Strichartz => cmd_strichartz(cli),
        Command::Longtime => cmd_longtime(&load_config(cli)?),
        Command::OrderCheck => cmd_order_check(&load_config(cli)?),
    }
}

fn status_json(status: &RunStatus) -> serde_json::Value {
    match status {
        RunStatus::Completed => json!({"kind": "completed"}),
        RunStatus::Aborted { t } => json!({"kind": "aborted", "t": t}),
    }
}

fn cmd_simulate(cfg: &RunConfig) -> Result<bool> {
    let dir = out_dir(cfg)?;
    let grid = cfg.grid_spec()?;
    let u0 = cfg.initial_state(&grid)?;
    let traj = integrate(&u0, &cfg.params()?, &cfg.stepper()?)?;
    for (i, (u, &t)) in traj.snapshots.iter().zip(&traj.times).enumerate() {
        io::write_snapshot(u, t, &dir.join(format!("snapshot_{i:05}.bin")))?;
    }
    let pass = traj.completed();
    io::write_json(
        &json!({
            "command": "simulate",
            "status": status_json(&traj.status),
            "snapshots": traj.times.len(),
            "times": traj.times,
            "pass": pass,
        }),
        &dir.join("summary.json"),
    )?;
    Ok(pass)
}

fn cmd_invariants(cfg: &RunConfig) -> Result<bool> {
    let dir = out_dir(cfg)?;
    let grid = cfg.grid_spec()?;
    let u0 = cfg.initial_state(&grid)?;
    let params = cfg.params()?;
    let traj = integrate(&u0, &params, &cfg.stepper()?)?;

    let mut rows = Vec::new();
    for (u, &t) in traj.snapshots.iter().zip(&traj.times) {
        let e = invariants::energies_up_to(u, &params, 4)?;
        rows.push(DiagRow {
            time: t,
            mass: mass(u),
            momentum: invariants::momentum(u, params.beta),
            e2: e[2],
            e3: e[3],
            e4: e[4],
            sobolev_quarter: sobolev_norm(u, 0.25)?,
            hardy_leak: hardy_leak(u),
        });
    }
    io::write_diagnostics_csv(&rows, &dir.join("diagnostics.csv"))?;

    let first = rows.first().expect("at least the initial snapshot");
    let scale = first.mass.max(1e-300);
    let drift = |f: fn(&DiagRow) -> f64, floor: f64| -> f64 {
        let v0 = f(first);
        rows.iter().map(|r| (f(r) - v0).abs()).fold(0.0, f64::max) / v0.abs().max(floor)
    };
    let mass_drift = drift(|r| r.mass, 1e-300);
    let momentum_drift = drift(|r| r.momentum, scale);
    let e2_drift = drift(|r| r.e2, scale);
    let e3_drift = drift(|r| r.e3, scale);
    let e4_drift = drift(|r| r.e4, scale);
    let completed = traj.completed();
    let pass = completed
        && mass_drift <= 1e-9
        && momentum_drift <= 1e-9
        && e2_drift <= 1e-6
        && e3_drift <= 1e-6
        && e4_drift <= 1e-6;
    io::write_json(
        &json!({
            "command": "invariants",
            "status": status_json(&traj.status),
            "mass_drift": mass_drift,
            "momentum_drift": momentum_drift,
            "energy_drifts": [e2_drift, e3_drift, e4_drift],
            "thresholds": {"mass": 1e-9, "momentum": 1e-9, "energy": 1e-6},
            "pass": pass,
        }),
        &dir.join("summary.json"),
    )?;
    Ok(pass)
}

fn cmd_lax(cfg: &RunConfig) -> Result<bool> {
    let dir = out_dir(cfg)?;
    let grid = cfg.grid_spec()?;
    let u0 = cfg.initial_state(&grid)?;
    let params = cfg.params()?;
    if params.gamma != 0.0 {
        return Err(Error::Config("the Lax pair needs model.gamma = 0".into()));
    }
    let traj = integrate(&u0, &params, &cfg.stepper()?)?;
    if !traj.completed() {
        io::write_json(
            &json!({"command": "lax", "status": status_json(&traj.status), "pass": false}),
            &dir.join("summary.json"),
        )?;
        return Ok(false);
    }
    let m = 256.min(grid.n() / 4).max(4);
    let count = 8;
    let report = invariants::isospectral_drift(&traj, &params, m, count)?;
    let kappa = invariants::kappa_threshold(&u0)?;
    let mut rows = Vec::new();
    for (i, &t) in traj.times.iter().enumerate() {
        let frac =
            invariants::fractional_energy(&traj.snapshots[i], &params, 0.25, kappa, m)?;
        let mut row = vec![t];
        row.extend_from_slice(&report.tracked_values[i]);
        row.push(frac);
        rows.push(row);
    }
    let mut header: Vec<String> = vec!["time".into()];
    for i in 0..count {
        header.push(format!("eig_{i}"));
    }
    header.push("fractional_energy".into());
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    io::write_csv(&header_refs, &rows, &dir.join("lax.csv"))?;

    let frac0 = rows[0].last().copied().unwrap();
    let frac_drift = rows
        .iter()
        .map(|r| (r.last().unwrap() - frac0).abs())
        .fold(0.0, f64::max)
        / frac0.abs().max(1e-300);
    let residual = invariants::lax_pair_residual(&traj, &params, m)?;
    let pass = report.max_drift() <= 1e-3 && frac_drift <= 1e-3 && report.mismatches == 0;
    io::write_json(
        &json!({
            "command": "lax",
            "matrix_dimension": m,
            "tracked": count,
            "max_eigenvalue_drift": report.max_drift(),
            "tracking_mismatches": report.mismatches,
            "fractional_energy_drift": frac_drift,
            "kappa": kappa,
            "lax_pair_residual": residual,
            "pass": pass,
        }),
        &dir.join("summary.json"),
    )?;
    Ok(pass)
}

fn cmd_gauge_check(cfg: &RunConfig) -> Result<bool> {
    let dir = out_dir(cfg)?;
    let grid = cfg.grid_spec()?;
    let u0 = cfg.initial_state(&grid)?;
    let params = cfg.params()?;
    let traj = integrate(&u0, &params, &cfg.stepper()?)?;
    if !traj.completed() {
        io::write_json(
            &json!({"command": "gauge-check", "status": status_json(&traj.status), "pass": false}),
            &dir.join("summary.json"),
        )?;
        return Ok(false);
    }
    let mut rows = Vec::new();
    let mut recovery_max = 0.0_f64;
    for (u, &t) in traj.snapshots.iter().zip(&traj.times) {
        let r = crate::gauge::recovery_residual(u, params.beta);
        recovery_max = recovery_max.max(r);
        rows.push(vec![t, r]);
    }
    io::write_csv(&["time", "recovery_residual"], &rows, &dir.join("gauge.csv"))?;

    let (v1, w1) = crate::gauge::gauged_equation_residual_at_stride(&traj, &params, 1)?;
    let (v2, w2) = crate::gauge::gauged_equation_residual_at_stride(&traj, &params, 2)?;
    let ratio_v = v2 / v1.max(1e-300);
    let ratio_w = w2 / w1.max(1e-300);
    // w is identically zero on Hardy data; its ratio is meaningless there
    let w_active = w1 > 1e-12;
    let pass = recovery_max <= 1e-8
        && (3.0..=5.0).contains(&ratio_v)
        && (!w_active || (3.0..=5.0).contains(&ratio_w));
    io::write_json(
        &json!({
            "command": "gauge-check",
            "recovery_max": recovery_max,
            "residual_v": {"stride1": v1, "stride2": v2, "ratio": ratio_v},
            "residual_w": {"stride1": w1, "stride2": w2, "ratio": ratio_w, "active": w_active},
            "pass": pass,
        }),
        &dir.join("summary.json"),
    )?;
    Ok(pass)
}

fn cmd_operator_check(cli: &Cli) -> Result<bool> {
    let (grid, dir) = match &cli.config {
        Some(_) => {
            let cfg = load_config(cli)?;
            (cfg.grid_spec()?, out_dir(&cfg)?)
        }
        None => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            std::fs::create_dir_all(&dir)?;
            (Grid::new(2048, 40.0)?, dir)
        }
    };
    let rows = crate::operators::operator_check(&grid);
    io::write_check_csv(&rows, &dir.join("operator_check.csv"))?;
    let failures: Vec<&str> =
        rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    let pass = failures.is_empty();
    io::write_json(
        &json!({
            "command": "operator-check",
            "rows": rows.len(),
            "failures": failures,
            "pass": pass,
        }),
        &dir.join("summary.json"),
    )?;
    Ok(pass)
}

fn cmd_limit_study(cfg: &RunConfig) -> Result<bool> {
    let dir = out_dir(cfg)?;
    let (amplitude, width, velocity) = match &cfg.init {
        crate::config::InitConfig::Gaussian { amplitude, width, velocity } => {
            (*amplitude, *width, *velocity)
        }
        _ => (0.3, 4.0, 0.0),
    };
    let study_cfg = StudyConfig {
        scenario: "deep-water".into(),
        n: cfg.grid.n,
        half_width: cfg.grid.half_width,
        beta: cfg.model.beta,
        gamma: 0.0,
        amplitude,
        width,
        velocity,
        h_list: vec![4.0, 8.0, 16.0, 32.0],
        t_end: cfg.time.t_end,
        dt: cfg.time.dt,
        record_every: cfg.time.record_every,
        seed: cfg.seed,
    };
    let study = crate::experiments::deep_water_study(&study_cfg)?;
    let rows: Vec<Vec<f64>> = study
        .hs
        .iter()
        .zip(&study.errors)
        .map(|(&h, &e)| vec![h, e])
        .collect();
    io::write_csv(&["h", "error_hquarter"], &rows, &dir.join("limit_study.csv"))?;
    let monotone = study.errors.windows(2).all(|w| w[1] <= w[0]);
    let pass = (0.8..=1.2).contains(&study.decay_exponent) && monotone;
    io::write_json(
        &json!({
            "command": "limit-study",
            "h_list": study.hs,
            "errors": study.errors,
            "decay_exponent": study.decay_exponent,
            "monotone": monotone,
            "pass": pass,
        }),
        &dir.join("summary.json"),
    )?;
    Ok(pass)
}

fn cmd_strichartz(cli: &Cli) -> Result<bool> {
    let (dir, seed) = match &cli.config {
        Some(_) => {
            let cfg = load_config(cli)?;
            (out_dir(&cfg)?, cfg.seed)
        }
        None => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            std::fs::create_dir_all(&dir)?;
            (dir, cli.seed.unwrap_or(0))
        }
    };
    let grid = Grid::new(1024, 8.0)?;
    let bands = [8.0, 16.0, 32.0, 64.0];
    let stats = crate::experiments::strichartz_sweep(&grid, &bands, 64, seed)?;
    let rows: Vec<Vec<f64>> = stats
        .iter()
        .map(|s| vec![s.band, s.max_ratio, s.mean_ratio])
        .collect();
    io::write_csv(&["band", "max_ratio", "mean_ratio"], &rows, &dir.join("strichartz.csv"))?;
    let maxes: Vec<f64> = stats.iter().map(|s| s.max_ratio).collect();
    let slope = crate::integrator::fit_log_slope(&bands, &maxes);
    let pass = (-0.2..=0.2).contains(&slope);
    io::write_json(
        &json!({
            "command": "strichartz",
            "bands": bands,
            "max_ratios": maxes,
            "slope": slope,
            "trials": 64,
            "seed": seed,
            "pass": pass,
        }),
        &dir.join("summary.json"),
    )?;
    Ok(pass)
}

fn cmd_longtime(cfg: &RunConfig) -> Result<bool> {
    let dir = out_dir(cfg)?;
    let grid = cfg.grid_spec()?;
    let u0 = cfg.initial_state(&grid)?;
    let params = cfg.params()?;
    let stepper = cfg.stepper()?;
    let report = crate::experiments::small_data_longtime(&u0, &params, &stepper)?;
    // rerun recording the norm history for the CSV
    let traj = integrate(&u0, &params, &stepper)?;
    let mut rows = Vec::new();
    for (u, &t) in traj.snapshots.iter().zip(&traj.times) {
        rows.push(vec![t, sobolev_norm(u, 0.25)?]);
    }
    io::write_csv(&["time", "hquarter"], &rows, &dir.join("longtime.csv"))?;
    io::write_json(
        &json!({
            "command": "longtime",
            "initial_hquarter": report.initial_hquarter,
            "sup_hquarter": report.sup_hquarter,
            "bound_factor": report.bound_factor,
            "completed": report.completed,
            "pass": report.pass,
        }),
        &dir.join("summary.json"),
    )?;
    Ok(report.pass)
}

fn cmd_order_check(cfg: &RunConfig) -> Result<bool> {
    let dir = out_dir(cfg)?;
    let grid = cfg.grid_spec()?;
    let u0 = cfg.initial_state(&grid)?;
    let params = cfg.params()?;
    let dt = cfg.time.dt;
    let dt_list = [4.0 * dt, 2.0 * dt, dt];
    let report = crate::integrator::order_check(&u0, &params, cfg.time.t_end, &dt_list)?;
    let rows: Vec<Vec<f64>> = report
        .dts
        .iter()
        .zip(&report.errors)
        .map(|(&d, &e)| vec![d, e])
        .collect();
    io::write_csv(&["dt", "error"], &rows, &dir.join("order_check.csv"))?;
    let pass = (3.7..=4.3).contains(&report.slope);
    io::write_json(
        &json!({
            "command": "order-check",
            "dts": report.dts,
            "errors": report.errors,
            "slope": report.slope,
            "pass": pass,
        }),
        &dir.join("summary.json"),
    )?;
    Ok(pass)
}

/// Expose the command surface for integration tests.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => {
            configure_threads();
            match dispatch(&cli) {
                Ok(true) => 0,
                Ok(false) => 1,
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("{e}");
            2
        }
    }
}
