//! Run configuration.
//!
//! A TOML file with nested sections; every key is optional and falls
//! back to the benchmark defaults, unknown keys are rejected with the
//! offending key named. Paths inside the config file resolve relative
//! to the config file's directory; paths given on the command line
//! resolve relative to the working directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use breadwinner_core::calibration::{CalibConfig, CalibrationTargets};
use breadwinner_core::counterfactual::{delta_grid, Scenario, ScenarioMode};
use breadwinner_core::regional::default_regional_grid;
use breadwinner_core::{ModelParams, PopulationConfig, SolverConfig};
use serde::Deserialize;

/// National gender gaps (participation, occupation, hours, wage) used
/// for the regional level adjustment when the config gives none.
pub const DEFAULT_NATIONAL_GAPS: [f64; 4] = [0.16, 0.53, 0.49, 0.76];

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub parameters: ParamsSection,
    #[serde(default)]
    pub population: PopulationSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub scenarios: ScenariosSection,
    #[serde(default)]
    pub sweep: GridSection,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub regional: RegionalSection,
}

/// Model parameters; unset values fall back to the benchmark
/// calibration. `file` loads a previously written `params.csv` first,
/// and explicit keys override it.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    /// Calibrate before running instead of using the values as given.
    #[serde(default)]
    pub calibrate: bool,
    pub file: Option<PathBuf>,
    pub theta: Option<f64>,
    pub psi: Option<f64>,
    pub eta: Option<f64>,
    pub phi: Option<f64>,
    pub sigma: Option<f64>,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub xi: Option<f64>,
    pub hbar: Option<f64>,
    pub hmin_regular: Option<f64>,
    pub hmin_nonregular: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSection {
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Market-hours menu spacing; `0` switches to continuous hours.
    pub hour_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenariosSection {
    pub list: Option<Vec<String>>,
}

/// An evenly spaced penalty grid; unset ends default to `[0, 1.2·δ]`
/// with 11 points for sweeps and `[0, 2·δ]` with 21 points for the
/// regional curve.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    /// Targets file (`name = value` lines); defaults to the benchmark
    /// data moments.
    pub targets: Option<PathBuf>,
    pub n_sim: Option<usize>,
    pub starts: Option<usize>,
    pub max_evals_per_start: Option<usize>,
    pub jitter: Option<f64>,
    pub stop_objective: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionalSection {
    pub prefecture_data: Option<PathBuf>,
    /// Participation, occupation, hours, and wage gaps in the national
    /// data, for the level adjustment.
    pub national_gaps: Option<[f64; 4]>,
    #[serde(default)]
    pub grid: GridSection,
}

/// A parsed config plus where it came from, for path resolution.
#[derive(Debug)]
pub struct LoadedConfig {
    pub raw: RunConfig,
    pub dir: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file `{}`", path.display()))?;
    let raw: RunConfig =
        toml::from_str(&text).with_context(|| format!("config file `{}`", path.display()))?;
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok(LoadedConfig { raw, dir })
}

/// Joins relative paths onto `base`; absolute paths pass through.
pub fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ParamsSection {
    pub fn resolve(&self, config_dir: &Path) -> Result<ModelParams> {
        let mut p = ModelParams::calibrated();
        if let Some(file) = &self.file {
            let path = resolve_path(config_dir, file);
            apply_params_file(&mut p, &path)?;
        }
        let overrides = [
            (&mut p.theta, self.theta),
            (&mut p.psi, self.psi),
            (&mut p.eta, self.eta),
            (&mut p.phi, self.phi),
            (&mut p.sigma, self.sigma),
            (&mut p.rho, self.rho),
            (&mut p.alpha, self.alpha),
            (&mut p.beta, self.beta),
            (&mut p.delta, self.delta),
            (&mut p.gamma, self.gamma),
            (&mut p.xi, self.xi),
            (&mut p.hbar, self.hbar),
            (&mut p.hmin_regular, self.hmin_regular),
            (&mut p.hmin_nonregular, self.hmin_nonregular),
        ];
        for (slot, value) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        p.validate().context("invalid model parameters")?;
        Ok(p)
    }
}

/// Reads a `parameter,value` CSV as written by the calibrate command.
fn apply_params_file(p: &mut ModelParams, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read parameter file `{}`", path.display()))?;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || (idx == 0 && line == "parameter,value") {
            continue;
        }
        let at = || format!("parameter file `{}` line {}", path.display(), idx + 1);
        let Some((name, value)) = line.split_once(',') else {
            bail!("{}: expected `name,value`, got `{line}`", at());
        };
        let v: f64 = value
            .trim()
            .parse()
            .with_context(|| format!("{}: bad value `{}` for `{}`", at(), value.trim(), name))?;
        let slot = match name.trim() {
            "theta" => &mut p.theta,
            "psi" => &mut p.psi,
            "eta" => &mut p.eta,
            "phi" => &mut p.phi,
            "sigma" => &mut p.sigma,
            "rho" => &mut p.rho,
            "alpha" => &mut p.alpha,
            "beta" => &mut p.beta,
            "delta" => &mut p.delta,
            "gamma" => &mut p.gamma,
            "xi" => &mut p.xi,
            "hbar" => &mut p.hbar,
            "hmin_regular" => &mut p.hmin_regular,
            "hmin_nonregular" => &mut p.hmin_nonregular,
            other => bail!("{}: unknown parameter `{other}`", at()),
        };
        *slot = v;
    }
    Ok(())
}

impl PopulationSection {
    pub fn resolve(&self, n_flag: Option<usize>, seed_flag: Option<u64>) -> PopulationConfig {
        PopulationConfig {
            n: n_flag.or(self.n).unwrap_or(100_000),
            seed: seed_flag.or(self.seed).unwrap_or(12345),
        }
    }
}

impl SolverSection {
    pub fn resolve(&self) -> Result<SolverConfig> {
        match self.hour_step {
            None => Ok(SolverConfig::default()),
            Some(step) if step == 0.0 => Ok(SolverConfig::continuous()),
            Some(step) if step > 0.0 && step <= 1.0 => Ok(SolverConfig {
                hour_step: Some(step),
            }),
            Some(step) => bail!("solver.hour_step must be in (0, 1] or 0, got {step}"),
        }
    }
}

impl ScenariosSection {
    pub fn resolve(&self, flag: Option<ScenarioMode>) -> Result<Vec<Scenario>> {
        if let Some(mode) = flag {
            return Ok(vec![Scenario::from_mode(mode)]);
        }
        match &self.list {
            None => Ok(vec![
                Scenario::baseline(),
                Scenario::flexible_regular(),
                Scenario::outsourcing(),
            ]),
            Some(names) => names
                .iter()
                .map(|name| {
                    let mode: ScenarioMode = name
                        .parse()
                        .map_err(|e: String| anyhow::anyhow!("scenarios.list: {e}"))?;
                    Ok(Scenario::from_mode(mode))
                })
                .collect(),
        }
    }
}

impl GridSection {
    pub fn resolve(
        &self,
        flag: Option<&str>,
        default_for: impl FnOnce() -> Vec<f64>,
    ) -> Result<Vec<f64>> {
        if let Some(spec) = flag {
            return parse_grid_flag(spec);
        }
        if self.start.is_none() && self.stop.is_none() && self.points.is_none() {
            return Ok(default_for());
        }
        let default = default_for();
        let start = self.start.unwrap_or(0.0);
        let stop = self.stop.unwrap_or_else(|| *default.last().unwrap());
        let points = self.points.unwrap_or(default.len());
        build_grid(start, stop, points)
    }
}

/// Parses the `start:stop:points` penalty-grid flag.
pub fn parse_grid_flag(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, points] = parts.as_slice() else {
        bail!("delta grid `{spec}`: expected start:stop:points");
    };
    let start: f64 = start
        .parse()
        .with_context(|| format!("delta grid `{spec}`: bad start"))?;
    let stop: f64 = stop
        .parse()
        .with_context(|| format!("delta grid `{spec}`: bad stop"))?;
    let points: usize = points
        .parse()
        .with_context(|| format!("delta grid `{spec}`: bad point count"))?;
    build_grid(start, stop, points)
}

fn build_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        bail!("delta grid needs at least two points, got {points}");
    }
    if start < 0.0 || stop < 0.0 {
        bail!("delta grid must be non-negative, got {start}:{stop}");
    }
    Ok((0..points)
        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
        .collect())
}

/// Default sweep grid: 11 points over `[0, 1.2·δ]`.
pub fn default_sweep_grid(delta_hat: f64) -> Vec<f64> {
    delta_grid(delta_hat, 11, 1.2)
}

pub fn regional_default_grid(delta_hat: f64) -> Vec<f64> {
    default_regional_grid(delta_hat)
}

impl CalibrationSection {
    pub fn resolve(
        &self,
        config_dir: &Path,
        pop: &PopulationConfig,
        solver: SolverConfig,
    ) -> Result<CalibConfig> {
        let targets = match &self.targets {
            Some(path) => CalibrationTargets::from_file(&resolve_path(config_dir, path))
                .context("calibration targets")?,
            None => CalibrationTargets::benchmark(),
        };
        let defaults = CalibConfig::default();
        Ok(CalibConfig {
            targets,
            n_sim: self.n_sim.unwrap_or(defaults.n_sim),
            seed: pop.seed,
            solver,
            starts: self.starts.unwrap_or(defaults.starts),
            max_evals_per_start: self.max_evals_per_start.unwrap_or(defaults.max_evals_per_start),
            jitter: self.jitter.unwrap_or(defaults.jitter),
            stop_objective: self.stop_objective.unwrap_or(defaults.stop_objective),
        })
    }
}
