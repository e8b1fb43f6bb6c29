//! Couple heterogeneity and population simulation.
//!
//! A couple is a pair of abilities with correlated log-normal draws plus
//! a Beta-distributed domestic requirement. Every couple gets its own
//! counter-based RNG stream keyed by (seed, couple index), and all draws
//! go through inverse CDFs of fixed uniforms. That keeps the population
//! bit-reproducible, order-independent, and smooth in the distribution
//! parameters — the same uniforms are reused when the calibrator moves
//! (σ, ρ, α, β), so the simulated objective has no sampling chatter.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::counterfactual::Scenario;
use crate::model::ModelParams;
use crate::solver::{solve_couple, CoupleSolution, SolverConfig};

/// One couple's exogenous heterogeneity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couple {
    /// Husband's earnings ability (log-normal).
    pub ability_m: f64,
    /// Wife's earnings ability (log-normal).
    pub ability_f: f64,
    /// Domestic production requirement in (0, 1).
    pub domestic_req: f64,
}

/// Size and seed of a simulated population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationConfig {
    pub n: usize,
    pub seed: u64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            n: 100_000,
            seed: 12345,
        }
    }
}

/// Dedicated RNG stream for one couple: the key mixes the global seed
/// with the couple index, so streams are independent and drawing order
/// across couples is irrelevant.
fn couple_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw strictly inside (0, 1), safe for inverse CDFs.
fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Draws the exogenous population for the given parameters.
///
/// Spouse log abilities are `σ·z_m` and `σ·(ρ·z_m + √(1−ρ²)·z_f)` with
/// standard-normal z's — the Cholesky factor of the correlation — and the
/// requirement is Beta(α, β).
pub fn draw_couples(p: &ModelParams, cfg: &PopulationConfig) -> Vec<Couple> {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let beta = Beta::new(p.alpha, p.beta).expect("validated Beta shapes");
    let cross = (1.0 - p.rho * p.rho).sqrt();
    (0..cfg.n)
        .map(|i| {
            let mut rng = couple_rng(cfg.seed, i as u64);
            let z_m = normal.inverse_cdf(uniform_open(&mut rng));
            let z_f = normal.inverse_cdf(uniform_open(&mut rng));
            let u_req = uniform_open(&mut rng);
            Couple {
                ability_m: (p.sigma * z_m).exp(),
                ability_f: (p.sigma * (p.rho * z_m + cross * z_f)).exp(),
                domestic_req: beta.inverse_cdf(u_req),
            }
        })
        .collect()
}

/// A solved population: couples plus their pair solutions, with choice
/// probabilities used as weights (no occupation sampling).
#[derive(Debug, Clone)]
pub struct SimulatedPopulation {
    pub params: ModelParams,
    pub scenario: Scenario,
    pub couples: Vec<Couple>,
    pub solutions: Vec<CoupleSolution>,
}

impl SimulatedPopulation {
    pub fn len(&self) -> usize {
        self.couples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.couples.is_empty()
    }
}

/// Solves every couple under the scenario; the couple order is preserved
/// and the result does not depend on the number of threads.
pub fn simulate(
    p: &ModelParams,
    couples: &[Couple],
    scenario: &Scenario,
    cfg: &SolverConfig,
) -> SimulatedPopulation {
    let solutions: Vec<CoupleSolution> = couples
        .par_iter()
        .map(|c| solve_couple(p, c, scenario, cfg))
        .collect();
    SimulatedPopulation {
        params: p.clone(),
        scenario: scenario.clone(),
        couples: couples.to_vec(),
        solutions,
    }
}

/// Draws and solves a population in one step.
pub fn simulate_fresh(
    p: &ModelParams,
    pop_cfg: &PopulationConfig,
    scenario: &Scenario,
    cfg: &SolverConfig,
) -> SimulatedPopulation {
    let couples = draw_couples(p, pop_cfg);
    simulate(p, &couples, scenario, cfg)
}
