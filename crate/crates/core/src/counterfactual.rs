//! Policy scenarios and penalty sweeps.
//!
//! Three scenarios share one solver: the baseline, flexible regular jobs
//! (the kinked schedule replaced by its linear kink-rate extension), and
//! purchasable domestic services at the non-regular unit-ability wage.
//! The penalty δ can be overridden in any scenario, which is also how
//! the sweep traces gender gaps over a penalty grid.

use std::fmt;
use std::str::FromStr;

use crate::model::{ModelParams, WageSchedule};
use crate::population::{simulate, Couple, SimulatedPopulation};
use crate::solver::SolverConfig;
use crate::stats::{gender_gaps, GapSet};

/// Which counterfactual environment the solver faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioMode {
    Baseline,
    /// Regular jobs pay the kink hourly rate at any hours.
    FlexibleRegular,
    /// Domestic services can be bought at a market price.
    Outsourcing,
}

impl fmt::Display for ScenarioMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioMode::Baseline => "baseline",
            ScenarioMode::FlexibleRegular => "flexible",
            ScenarioMode::Outsourcing => "outsourcing",
        })
    }
}

impl FromStr for ScenarioMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(ScenarioMode::Baseline),
            "flexible" => Ok(ScenarioMode::FlexibleRegular),
            "outsourcing" => Ok(ScenarioMode::Outsourcing),
            other => Err(format!(
                "unknown scenario `{other}` (expected baseline, flexible, or outsourcing)"
            )),
        }
    }
}

/// A fully specified counterfactual.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode: ScenarioMode,
    /// Price of outsourced services; `None` uses the non-regular wage at
    /// unit ability, `ψ·h̄^θ`. Ignored outside the outsourcing mode.
    pub price: Option<f64>,
    /// Penalty used instead of the calibrated δ when set.
    pub delta_override: Option<f64>,
}

impl Scenario {
    pub fn baseline() -> Self {
        Scenario {
            mode: ScenarioMode::Baseline,
            price: None,
            delta_override: None,
        }
    }

    pub fn flexible_regular() -> Self {
        Scenario {
            mode: ScenarioMode::FlexibleRegular,
            price: None,
            delta_override: None,
        }
    }

    pub fn outsourcing() -> Self {
        Scenario {
            mode: ScenarioMode::Outsourcing,
            price: None,
            delta_override: None,
        }
    }

    pub fn from_mode(mode: ScenarioMode) -> Self {
        Scenario {
            mode,
            price: None,
            delta_override: None,
        }
    }

    pub fn with_price(mut self, price: f64) -> Self {
        self.price = Some(price);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta_override = Some(delta);
        self
    }

    /// Regular-job schedule implied by the mode.
    pub fn wage_schedule(&self) -> WageSchedule {
        match self.mode {
            ScenarioMode::FlexibleRegular => WageSchedule::Linear,
            _ => WageSchedule::Kinked,
        }
    }

    /// Service price faced by the household, `None` when services cannot
    /// be bought.
    pub fn resolved_price(&self, p: &ModelParams) -> Option<f64> {
        match self.mode {
            ScenarioMode::Outsourcing => {
                Some(self.price.unwrap_or_else(|| p.default_outsourcing_price()))
            }
            _ => None,
        }
    }

    /// Penalty faced by the household.
    pub fn resolved_delta(&self, p: &ModelParams) -> f64 {
        self.delta_override.unwrap_or(p.delta)
    }
}

/// Simulates the given couples under a scenario.
pub fn run_scenario(
    p: &ModelParams,
    couples: &[Couple],
    scenario: &Scenario,
    cfg: &SolverConfig,
) -> SimulatedPopulation {
    simulate(p, couples, scenario, cfg)
}

/// Gender gaps at one penalty level of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub delta: f64,
    pub gaps: GapSet,
}

/// Evenly spaced penalty grid from 0 to `factor·delta_hat`.
pub fn delta_grid(delta_hat: f64, points: usize, factor: f64) -> Vec<f64> {
    assert!(points >= 2, "a sweep needs at least two points");
    let top = factor * delta_hat;
    (0..points)
        .map(|i| top * i as f64 / (points - 1) as f64)
        .collect()
}

/// Default sweep grid: 11 points from 0 to 1.2·δ̂.
pub fn default_delta_grid(delta_hat: f64) -> Vec<f64> {
    delta_grid(delta_hat, 11, 1.2)
}

/// Re-solves the population at every penalty in `grid` and records the
/// gender gaps, holding couples and everything else fixed.
pub fn delta_sweep(
    p: &ModelParams,
    couples: &[Couple],
    scenario: &Scenario,
    grid: &[f64],
    cfg: &SolverConfig,
) -> Vec<SweepPoint> {
    grid.iter()
        .map(|&delta| {
            let s = scenario.clone().with_delta(delta);
            let pop = simulate(p, couples, &s, cfg);
            SweepPoint {
                delta,
                gaps: gender_gaps(&pop),
            }
        })
        .collect()
}

/// One scenario's full penalty sweep.
#[derive(Debug, Clone)]
pub struct ScenarioSweep {
    pub mode: ScenarioMode,
    pub points: Vec<SweepPoint>,
}

/// Runs the penalty sweep for several scenarios over one couple draw.
pub fn scenario_sweeps(
    p: &ModelParams,
    couples: &[Couple],
    scenarios: &[Scenario],
    grid: &[f64],
    cfg: &SolverConfig,
) -> Vec<ScenarioSweep> {
    scenarios
        .iter()
        .map(|s| ScenarioSweep {
            mode: s.mode,
            points: delta_sweep(p, couples, s, grid, cfg),
        })
        .collect()
}
