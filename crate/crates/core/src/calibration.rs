//! Moment-matching calibration.
//!
//! The objective simulates a population at candidate parameters with a
//! fixed seed (common random numbers, so the same couples come back as
//! the candidate moves), computes the nine target statistics, and sums
//! squared proportional deviations. Minimization runs Nelder–Mead in a
//! transformed space — logs for positive parameters, Fisher z for the
//! ability correlation — from several jittered starts.

use std::fs;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::counterfactual::Scenario;
use crate::model::ModelParams;
use crate::nelder_mead::{minimize, NmOptions};
use crate::population::{draw_couples, simulate, PopulationConfig};
use crate::solver::SolverConfig;
use crate::stats::{compute_moments, MomentSet};

/// Penalty added per statistic that the simulation leaves undefined
/// (for example an empty conditioning cell at extreme parameters).
pub const UNDEFINED_MOMENT_PENALTY: f64 = 1e6;

/// The nine data targets, in [`MomentSet::NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTargets {
    pub values: [f64; 9],
}

/// Problems reading a targets file.
#[derive(Debug, Error)]
pub enum TargetsError {
    #[error("cannot read targets file `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected `name = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown statistic `{name}`")]
    UnknownName { line: usize, name: String },
    #[error("line {line}: bad numeric value `{value}` for `{name}`")]
    BadValue {
        line: usize,
        name: String,
        value: String,
    },
    #[error("statistic `{name}` missing from targets file")]
    Missing { name: &'static str },
}

impl CalibrationTargets {
    /// The benchmark data targets.
    pub fn benchmark() -> Self {
        CalibrationTargets {
            values: [0.90, 0.09, 0.64, 0.40, 0.62, 0.21, 0.22, 0.14, 0.07],
        }
    }

    /// Targets computed from a simulated moment set; panics on undefined
    /// entries (used to build synthetic recovery problems).
    pub fn from_moments(m: &MomentSet) -> Self {
        let mut values = [0.0; 9];
        for (v, m) in values.iter_mut().zip(m.as_array()) {
            *v = m.expect("synthetic targets require defined moments");
        }
        CalibrationTargets { values }
    }

    /// Reads `name = value` lines; `#` starts a comment and blank lines
    /// are skipped. All nine statistics must be present.
    pub fn from_file(path: &Path) -> Result<Self, TargetsError> {
        let text = fs::read_to_string(path).map_err(|source| TargetsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut values = [None; 9];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((name, value)) = content.split_once('=') else {
                return Err(TargetsError::Syntax {
                    line,
                    text: content.to_string(),
                });
            };
            let name = name.trim();
            let value = value.trim();
            let Some(slot) = MomentSet::NAMES.iter().position(|&n| n == name) else {
                return Err(TargetsError::UnknownName {
                    line,
                    name: name.to_string(),
                });
            };
            let parsed: f64 = value.parse().map_err(|_| TargetsError::BadValue {
                line,
                name: name.to_string(),
                value: value.to_string(),
            })?;
            values[slot] = Some(parsed);
        }
        let mut out = [0.0; 9];
        for (i, v) in values.iter().enumerate() {
            out[i] = v.ok_or(TargetsError::Missing {
                name: MomentSet::NAMES[i],
            })?;
        }
        Ok(CalibrationTargets { values: out })
    }
}

/// Everything the objective needs besides the candidate parameters.
#[derive(Debug, Clone)]
pub struct CalibConfig {
    pub targets: CalibrationTargets,
    /// Couples per objective evaluation.
    pub n_sim: usize,
    /// Seed shared by every evaluation (common random numbers).
    pub seed: u64,
    pub solver: SolverConfig,
    /// Number of simplex starts: the initial point plus jittered copies.
    pub starts: usize,
    pub max_evals_per_start: usize,
    /// Half-width of the uniform jitter in transformed space.
    pub jitter: f64,
    /// Stop all remaining starts once the objective falls below this.
    pub stop_objective: f64,
}

impl Default for CalibConfig {
    fn default() -> Self {
        CalibConfig {
            targets: CalibrationTargets::benchmark(),
            n_sim: 4000,
            seed: 12345,
            solver: SolverConfig::default(),
            starts: 8,
            max_evals_per_start: 5000,
            jitter: 0.15,
            stop_objective: 1e-11,
        }
    }
}

/// Names of the searched parameters, in transform order.
pub const SEARCH_NAMES: [&str; 9] = [
    "theta", "psi", "eta", "phi", "sigma", "rho", "alpha", "beta", "delta",
];

/// Maps parameters into the unconstrained search space.
pub fn to_search_space(p: &ModelParams) -> [f64; 9] {
    [
        p.theta.ln(),
        p.psi.ln(),
        p.eta.ln(),
        p.phi.ln(),
        p.sigma.ln(),
        p.rho.atanh(),
        p.alpha.ln(),
        p.beta.ln(),
        p.delta.max(1e-12).ln(),
    ]
}

/// Inverse of [`to_search_space`]; fixed parameters (γ, ξ, hour limits)
/// come from the template.
pub fn from_search_space(x: &[f64; 9], template: &ModelParams) -> ModelParams {
    let e = |v: f64| v.clamp(-30.0, 30.0).exp();
    ModelParams {
        theta: e(x[0]),
        psi: e(x[1]),
        eta: e(x[2]),
        phi: e(x[3]),
        sigma: e(x[4]),
        rho: x[5].tanh(),
        alpha: e(x[6]),
        beta: e(x[7]),
        delta: e(x[8]),
        ..template.clone()
    }
}

/// Simulated moments at a candidate parameter point.
pub fn simulated_moments(p: &ModelParams, cfg: &CalibConfig) -> MomentSet {
    let pop_cfg = PopulationConfig {
        n: cfg.n_sim,
        seed: cfg.seed,
    };
    let couples = draw_couples(p, &pop_cfg);
    let pop = simulate(p, &couples, &Scenario::baseline(), &cfg.solver);
    compute_moments(&pop)
}

/// Sum of squared proportional deviations from the targets, with a
/// fixed penalty per undefined statistic.
pub fn objective_value(targets: &CalibrationTargets, moments: &MomentSet) -> f64 {
    let mut total = 0.0;
    for (target, sim) in targets.values.iter().zip(moments.as_array()) {
        match sim {
            Some(m) => {
                let dev = (target - m) / target;
                total += dev * dev;
            }
            None => total += UNDEFINED_MOMENT_PENALTY,
        }
    }
    total
}

/// Objective at a candidate parameter point: simulate, compare moments.
pub fn smm_objective(p: &ModelParams, cfg: &CalibConfig) -> f64 {
    if p.validate().is_err() {
        return UNDEFINED_MOMENT_PENALTY * 9.0;
    }
    objective_value(&cfg.targets, &simulated_moments(p, cfg))
}

/// One point of the best-so-far trace; the objective column is
/// monotonically non-increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub eval: usize,
    pub objective: f64,
}

/// Calibration output.
#[derive(Debug, Clone)]
pub struct CalibrationResult {
    pub params: ModelParams,
    pub objective: f64,
    pub evals: usize,
    pub trace: Vec<TracePoint>,
}

/// Minimizes the moment-matching objective from `init`.
pub fn calibrate(init: &ModelParams, cfg: &CalibConfig) -> CalibrationResult {
    let x0 = to_search_space(init);
    let mut best_x = x0;
    let mut best_f = f64::INFINITY;
    let mut evals_total = 0usize;
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut jitter_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5ca1_ab1e);

    for start in 0..cfg.starts.max(1) {
        let mut start_x = x0;
        if start > 0 {
            for v in start_x.iter_mut() {
                let u = (jitter_rng.next_u64() >> 11) as f64 / 9_007_199_254_740_992.0;
                *v += cfg.jitter * (2.0 * u - 1.0);
            }
        }

        let objective = |x: &[f64]| {
            let arr: [f64; 9] = x.try_into().expect("nine coordinates");
            let p = from_search_space(&arr, init);
            smm_objective(&p, cfg)
        };
        // Wrap to maintain the global best-so-far trace across starts.
        let mut local_evals = 0usize;
        let mut tracked = |x: &[f64]| {
            let f = objective(x);
            local_evals += 1;
            if f < best_f {
                best_f = f;
                best_x = x.try_into().expect("nine coordinates");
                trace.push(TracePoint {
                    eval: evals_total + local_evals,
                    objective: f,
                });
            }
            f
        };
        let steps = [0.08; 9];
        let r = minimize(
            &mut tracked,
            &start_x,
            &steps,
            None,
            &NmOptions {
                max_evals: cfg.max_evals_per_start,
                x_tol: 1e-8,
                f_tol: 1e-12,
            },
        );
        evals_total += r.evals;
        if best_f < cfg.stop_objective {
            break;
        }
    }

    CalibrationResult {
        params: from_search_space(&best_x, init),
        objective: best_f,
        evals: evals_total,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn transform_round_trips_to_machine_precision() {
        let p = ModelParams::calibrated();
        let x = to_search_space(&p);
        let back = from_search_space(&x, &p);
        for (a, b) in [
            (p.theta, back.theta),
            (p.psi, back.psi),
            (p.eta, back.eta),
            (p.phi, back.phi),
            (p.sigma, back.sigma),
            (p.rho, back.rho),
            (p.alpha, back.alpha),
            (p.beta, back.beta),
            (p.delta, back.delta),
        ] {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        assert_eq!(p.gamma, back.gamma);
        assert_eq!(p.hbar, back.hbar);
    }

    #[test]
    fn objective_is_zero_on_self_generated_targets() {
        let p = ModelParams::calibrated();
        let mut cfg = CalibConfig {
            n_sim: 300,
            ..CalibConfig::default()
        };
        cfg.targets = CalibrationTargets::from_moments(&simulated_moments(&p, &cfg));
        assert!(smm_objective(&p, &cfg) < 1e-20);
    }

    #[test]
    fn objective_is_deterministic() {
        let p = ModelParams::calibrated();
        let cfg = CalibConfig {
            n_sim: 200,
            ..CalibConfig::default()
        };
        assert_eq!(smm_objective(&p, &cfg), smm_objective(&p, &cfg));
    }

    #[test]
    fn objective_grows_away_from_the_optimum() {
        let base = ModelParams::calibrated();
        let mut cfg = CalibConfig {
            n_sim: 300,
            ..CalibConfig::default()
        };
        cfg.targets = CalibrationTargets::from_moments(&simulated_moments(&base, &cfg));
        let mut moved = base.clone();
        moved.sigma *= 1.3;
        moved.delta *= 0.5;
        assert!(smm_objective(&moved, &cfg) > smm_objective(&base, &cfg) + 1e-6);
    }

    #[test]
    fn targets_file_parses_and_validates() {
        let dir = std::env::temp_dir().join("bw_targets_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("targets.txt");
        let mut text = String::from("# benchmark targets\n");
        for (name, v) in MomentSet::NAMES
            .iter()
            .zip(CalibrationTargets::benchmark().values)
        {
            text.push_str(&format!("{name} = {v}\n"));
        }
        std::fs::write(&path, &text).unwrap();
        let t = CalibrationTargets::from_file(&path).unwrap();
        assert_eq!(t, CalibrationTargets::benchmark());

        std::fs::write(&path, "share_r_male = 0.9\nnot_a_moment = 1\n").unwrap();
        assert!(matches!(
            CalibrationTargets::from_file(&path),
            Err(TargetsError::UnknownName { .. })
        ));

        std::fs::write(&path, "share_r_male = 0.9\n").unwrap();
        assert!(matches!(
            CalibrationTargets::from_file(&path),
            Err(TargetsError::Missing { .. })
        ));
    }

    #[test]
    fn trace_is_monotone_nonincreasing() {
        let p = ModelParams::calibrated();
        let mut cfg = CalibConfig {
            n_sim: 120,
            starts: 1,
            max_evals_per_start: 60,
            ..CalibConfig::default()
        };
        cfg.targets = CalibrationTargets::from_moments(&simulated_moments(&p, &cfg));
        let mut init = p.clone();
        init.sigma *= 1.1;
        let r = calibrate(&init, &cfg);
        assert!(!r.trace.is_empty());
        for w in r.trace.windows(2) {
            assert!(w[1].objective <= w[0].objective);
            assert!(w[1].eval > w[0].eval);
        }
    }
}
