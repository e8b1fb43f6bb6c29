//! The five subcommands: shared session setup, then one function per
//! command writing its tables into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use breadwinner_core::calibration::{calibrate, smm_objective, CalibrationResult};
use breadwinner_core::counterfactual::{scenario_sweeps, Scenario, ScenarioMode};
use breadwinner_core::population::{draw_couples, simulate};
use breadwinner_core::regional::{
    compare_curve_to_fit, level_adjustment, ols_bridge, prediction_curve, read_prefecture_csv,
};
use breadwinner_core::report;
use breadwinner_core::stats::{
    compute_moments, gender_gaps, hours_table, occupation_matrix, relative_earnings_density,
};
use breadwinner_core::{ModelParams, PopulationConfig, SolverConfig};

use crate::config::{self, LoadedConfig, DEFAULT_NATIONAL_GAPS};
use crate::Opts;

/// Histogram resolution of the relative-earnings table.
const DENSITY_BIN_WIDTH: f64 = 0.05;

/// Everything resolved from the config file and command-line overrides.
pub struct Session {
    pub cfg: LoadedConfig,
    pub params: ModelParams,
    pub pop: PopulationConfig,
    pub solver: SolverConfig,
    pub out_dir: PathBuf,
    /// Present when the config asked to calibrate before running.
    pub calibrated: Option<CalibrationResult>,
}

/// Loads the config, applies flag overrides, and (outside the calibrate
/// command) runs the pre-run calibration when the config asks for one.
pub fn setup(opts: &Opts, auto_calibrate: bool) -> Result<Session> {
    if let Some(t) = opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("setting up the worker pool")?;
    }
    let cfg = config::load(&opts.config)?;
    let mut params = cfg.raw.parameters.resolve(&cfg.dir)?;
    let pop = cfg.raw.population.resolve(opts.n, opts.seed);
    let solver = cfg.raw.solver.resolve()?;
    let out_dir = opts
        .out
        .clone()
        .unwrap_or_else(|| cfg.raw.output.dir.clone().unwrap_or_else(|| "out".into()));

    let mut calibrated = None;
    if auto_calibrate && cfg.raw.parameters.calibrate {
        let calib_cfg = cfg.raw.calibration.resolve(&cfg.dir, &pop, solver)?;
        println!(
            "calibrating first: {} start(s), {} couples per evaluation",
            calib_cfg.starts, calib_cfg.n_sim
        );
        let result = calibrate(&params, &calib_cfg);
        params = round_to_output(&result.params);
        calibrated = Some(result);
    }

    Ok(Session {
        cfg,
        params,
        pop,
        solver,
        out_dir,
        calibrated,
    })
}

/// Rounds every parameter through the report formatter, so that the
/// values used for simulation are exactly the values written to disk.
fn round_to_output(p: &ModelParams) -> ModelParams {
    let r = |x: f64| report::fmt_sig(x).parse().unwrap_or(x);
    ModelParams {
        theta: r(p.theta),
        psi: r(p.psi),
        eta: r(p.eta),
        phi: r(p.phi),
        gamma: r(p.gamma),
        xi: r(p.xi),
        sigma: r(p.sigma),
        rho: r(p.rho),
        alpha: r(p.alpha),
        beta: r(p.beta),
        delta: r(p.delta),
        hbar: r(p.hbar),
        hmin_regular: r(p.hmin_regular),
        hmin_nonregular: r(p.hmin_nonregular),
    }
}

fn write_table(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory `{}`", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write `{}`", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Writes the calibration artifacts and returns the objective at the
/// written (rounded) parameter values.
fn write_calibration(session: &Session, result: &CalibrationResult) -> Result<f64> {
    let rounded = round_to_output(&result.params);
    let calib_cfg = session
        .cfg
        .raw
        .calibration
        .resolve(&session.cfg.dir, &session.pop, session.solver)?;
    let objective = smm_objective(&rounded, &calib_cfg);
    write_table(&session.out_dir, "params.csv", &report::params_csv(&rounded))?;
    write_table(&session.out_dir, "trace.csv", &report::trace_csv(result))?;
    let summary = format!(
        "objective,evals\n{},{}\n",
        report::fmt_sig(objective),
        result.evals
    );
    write_table(&session.out_dir, "summary.csv", &summary)?;
    Ok(objective)
}

pub fn cmd_simulate(opts: &Opts) -> Result<()> {
    let session = setup(opts, true)?;
    if let Some(result) = &session.calibrated {
        write_calibration(&session, result)?;
    }
    let scenario = Scenario::from_mode(opts.scenario.unwrap_or(ScenarioMode::Baseline));
    println!(
        "simulating {} couples (seed {}) under the {} scenario",
        session.pop.n, session.pop.seed, scenario.mode
    );
    let couples = draw_couples(&session.params, &session.pop);
    let pop = simulate(&session.params, &couples, &scenario, &session.solver);

    let moments = compute_moments(&pop);
    let gaps = gender_gaps(&pop);
    write_table(&session.out_dir, "moments.csv", &report::moments_csv(&moments))?;
    write_table(
        &session.out_dir,
        "occupation_matrix.csv",
        &report::matrix_csv(&occupation_matrix(&pop)),
    )?;
    write_table(&session.out_dir, "hours.csv", &report::hours_csv(&hours_table(&pop)))?;
    write_table(&session.out_dir, "gaps.csv", &report::gaps_csv(&gaps))?;
    write_table(
        &session.out_dir,
        "relative_earnings.csv",
        &report::density_csv(&relative_earnings_density(&pop, DENSITY_BIN_WIDTH)),
    )?;

    let shown = |v: Option<f64>| report::fmt_sig(v.unwrap_or(f64::NAN));
    println!(
        "gaps: participation {}, occupation {}, hours {}, wage {}",
        shown(gaps.participation),
        shown(gaps.occupation),
        shown(gaps.hours),
        shown(gaps.wage)
    );
    Ok(())
}

pub fn cmd_calibrate(opts: &Opts) -> Result<()> {
    let session = setup(opts, false)?;
    let calib_cfg = session
        .cfg
        .raw
        .calibration
        .resolve(&session.cfg.dir, &session.pop, session.solver)?;
    println!(
        "calibrating: {} start(s), up to {} evaluations each, {} couples per evaluation",
        calib_cfg.starts, calib_cfg.max_evals_per_start, calib_cfg.n_sim
    );
    let result = calibrate(&session.params, &calib_cfg);
    let objective = write_calibration(&session, &result)?;
    println!(
        "objective at the written parameters: {} after {} evaluations",
        report::fmt_sig(objective),
        result.evals
    );
    Ok(())
}

pub fn cmd_counterfactual(opts: &Opts) -> Result<()> {
    let session = setup(opts, true)?;
    if let Some(result) = &session.calibrated {
        write_calibration(&session, result)?;
    }
    let scenarios = session.cfg.raw.scenarios.resolve(opts.scenario)?;
    println!(
        "simulating {} couples (seed {}) under {} scenario(s)",
        session.pop.n,
        session.pop.seed,
        scenarios.len()
    );
    let couples = draw_couples(&session.params, &session.pop);
    let mut panels = Vec::new();
    for scenario in &scenarios {
        let pop = simulate(&session.params, &couples, scenario, &session.solver);
        let name = scenario.mode.to_string();
        let matrix = occupation_matrix(&pop);
        write_table(
            &session.out_dir,
            &format!("occupation_matrix_{name}.csv"),
            &report::matrix_csv(&matrix),
        )?;
        write_table(
            &session.out_dir,
            &format!("hours_{name}.csv"),
            &report::hours_csv(&hours_table(&pop)),
        )?;
        write_table(
            &session.out_dir,
            &format!("gaps_{name}.csv"),
            &report::gaps_csv(&gender_gaps(&pop)),
        )?;
        panels.push((name, matrix));
    }
    write_table(
        &session.out_dir,
        "occupation_panels.csv",
        &report::occupation_panels_csv(&panels),
    )?;
    Ok(())
}

pub fn cmd_sweep(opts: &Opts) -> Result<()> {
    let session = setup(opts, true)?;
    if let Some(result) = &session.calibrated {
        write_calibration(&session, result)?;
    }
    let scenarios = session.cfg.raw.scenarios.resolve(opts.scenario)?;
    let delta_hat = session.params.delta;
    let grid = session
        .cfg
        .raw
        .sweep
        .resolve(opts.delta_grid.as_deref(), || {
            config::default_sweep_grid(delta_hat)
        })?;
    println!(
        "sweeping {} penalty level(s) across {} scenario(s), {} couples each",
        grid.len(),
        scenarios.len(),
        session.pop.n
    );
    let couples = draw_couples(&session.params, &session.pop);
    let sweeps = scenario_sweeps(&session.params, &couples, &scenarios, &grid, &session.solver);
    write_table(&session.out_dir, "sweep.csv", &report::sweep_csv(&sweeps))?;
    Ok(())
}

pub fn cmd_regional(opts: &Opts) -> Result<()> {
    let session = setup(opts, true)?;
    if let Some(result) = &session.calibrated {
        write_calibration(&session, result)?;
    }
    let data_path = match (&opts.prefecture_data, &session.cfg.raw.regional.prefecture_data) {
        (Some(flag), _) => flag.clone(),
        (None, Some(path)) => config::resolve_path(&session.cfg.dir, path),
        (None, None) => bail!(
            "no prefecture data: pass --prefecture-data or set regional.prefecture_data in the config"
        ),
    };
    let records = read_prefecture_csv(&data_path)?;
    println!("read {} prefectures from {}", records.len(), data_path.display());
    let bridge = ols_bridge(&records)?;

    let national = session
        .cfg
        .raw
        .regional
        .national_gaps
        .unwrap_or(DEFAULT_NATIONAL_GAPS);
    let delta_hat = session.params.delta;
    let grid = session
        .cfg
        .raw
        .regional
        .grid
        .resolve(opts.delta_grid.as_deref(), || {
            config::regional_default_grid(delta_hat)
        })?;

    let couples = draw_couples(&session.params, &session.pop);
    let at_delta_hat = simulate(
        &session.params,
        &couples,
        &Scenario::baseline(),
        &session.solver,
    );
    let g0 = level_adjustment(&national, &gender_gaps(&at_delta_hat))?;
    let curve = prediction_curve(
        &session.params,
        &couples,
        &grid,
        &bridge,
        &g0,
        &session.solver,
    )?;
    let comparison = compare_curve_to_fit(&curve, &records)?;

    write_table(&session.out_dir, "bridge.csv", &report::bridge_csv(&bridge))?;
    write_table(&session.out_dir, "level_offsets.csv", &report::offsets_csv(&g0))?;
    write_table(&session.out_dir, "regional_curve.csv", &report::curve_csv(&curve))?;
    write_table(
        &session.out_dir,
        "regional_comparison.csv",
        &report::comparison_csv(&comparison),
    )?;
    write_table(
        &session.out_dir,
        "regional_rms.csv",
        &report::comparison_rms_csv(&comparison),
    )?;

    let shown = |v: Option<f64>| report::fmt_sig(v.unwrap_or(f64::NAN));
    println!(
        "curve vs prefecture fits, RMS: participation {}, occupation {}, hours {}, wage {}",
        shown(comparison.rms[0]),
        shown(comparison.rms[1]),
        shown(comparison.rms[2]),
        shown(comparison.rms[3])
    );
    Ok(())
}
