//! Exchangeability at δ = 0 and the consistency of probability
//! weighting with explicit occupation sampling.

use breadwinner_core::counterfactual::Scenario;
use breadwinner_core::population::{draw_couples, simulate, PopulationConfig};
use breadwinner_core::solver::solve_couple;
use breadwinner_core::stats::{bootstrap_gap_se, gender_gaps, occupation_matrix};
use breadwinner_core::{Couple, ModelParams, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Swapping spouse labels transposes the solution when δ = 0.
#[test]
fn label_swap_transposes_the_solution_at_zero_penalty() {
    let p = ModelParams::calibrated();
    let scenario = Scenario::baseline().with_delta(0.0);
    let couples = [
        Couple {
            ability_m: 0.7,
            ability_f: 1.9,
            domestic_req: 0.62,
        },
        Couple {
            ability_m: 2.2,
            ability_f: 0.9,
            domestic_req: 0.35,
        },
        Couple {
            ability_m: 1.0,
            ability_f: 1.0,
            domestic_req: 0.85,
        },
    ];
    for cfg in [SolverConfig::default(), SolverConfig::continuous()] {
        for couple in couples {
            let swapped = Couple {
                ability_m: couple.ability_f,
                ability_f: couple.ability_m,
                domestic_req: couple.domestic_req,
            };
            let a = solve_couple(&p, &couple, &scenario, &cfg);
            let b = solve_couple(&p, &swapped, &scenario, &cfg);
            for i in 0..3 {
                for j in 0..3 {
                    let (ua, ub) = (a.utility[i][j], b.utility[j][i]);
                    if ua.is_finite() || ub.is_finite() {
                        assert!(
                            (ua - ub).abs() <= 1e-7 * ua.abs().max(1.0),
                            "utility not transposed at ({i},{j}): {ua} vs {ub}"
                        );
                    }
                    assert!(
                        (a.probs[i][j] - b.probs[j][i]).abs() <= 1e-7,
                        "probability not transposed at ({i},{j})"
                    );
                }
            }
        }
    }
}

/// With δ = 0 the model treats spouses symmetrically, so every gender
/// gap should vanish up to Monte Carlo noise, and the male/female
/// marginal occupation distributions should agree.
#[test]
fn zero_penalty_population_is_gender_symmetric() {
    let p = ModelParams {
        delta: 0.0,
        ..ModelParams::calibrated()
    };
    let cfg = SolverConfig::default();
    let couples = draw_couples(
        &p,
        &PopulationConfig {
            n: 100_000,
            seed: 2024,
        },
    );
    let pop = simulate(&p, &couples, &Scenario::baseline(), &cfg);

    let se = bootstrap_gap_se(&pop, 200, 7).as_array();
    let gaps = gender_gaps(&pop).as_array();
    let names = breadwinner_core::stats::GapSet::NAMES;
    for ((gap, se), name) in gaps.iter().zip(se).zip(names) {
        let (gap, se) = (gap.unwrap(), se.unwrap());
        assert!(
            gap.abs() < 3.0 * se,
            "{name} = {gap} exceeds 3×SE = {}",
            3.0 * se
        );
    }

    let m = occupation_matrix(&pop);
    for k in 0..3 {
        let male: f64 = m[k].iter().sum();
        let female: f64 = (0..3).map(|i| m[i][k]).sum();
        assert!(
            (male - female).abs() < 0.01,
            "marginal {k} differs: {male} vs {female}"
        );
    }
}

/// Drawing explicit occupation outcomes from the choice probabilities
/// converges to the probability-weighted shares.
#[test]
fn sampling_occupations_recovers_weighted_shares() {
    let p = ModelParams::calibrated();
    let cfg = SolverConfig::default();
    let n = 1_000usize;
    let draws_per_couple = 1_000usize;
    let couples = draw_couples(&p, &PopulationConfig { n, seed: 88 });
    let pop = simulate(&p, &couples, &Scenario::baseline(), &cfg);

    let weighted = occupation_matrix(&pop);

    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut counts = [[0u64; 3]; 3];
    for sol in &pop.solutions {
        for _ in 0..draws_per_couple {
            let mut u: f64 = rng.gen();
            let mut picked = (2, 2);
            'outer: for i in 0..3 {
                for j in 0..3 {
                    u -= sol.probs[i][j];
                    if u <= 0.0 {
                        picked = (i, j);
                        break 'outer;
                    }
                }
            }
            counts[picked.0][picked.1] += 1;
        }
    }
    let total = (n * draws_per_couple) as f64;
    for i in 0..3 {
        for j in 0..3 {
            let empirical = counts[i][j] as f64 / total;
            assert!(
                (empirical - weighted[i][j]).abs() < 0.005,
                "cell ({i},{j}): sampled {empirical} vs weighted {}",
                weighted[i][j]
            );
        }
    }
}
