//! Property tests for the per-couple solver: feasibility, budget
//! identity, domestic-requirement satisfaction, probability structure,
//! and the norm-penalty flag, across random couples and parameters.

use breadwinner_core::counterfactual::Scenario;
use breadwinner_core::population::Couple;
use breadwinner_core::solver::{solve_couple, wife_outearns};
use breadwinner_core::{ModelParams, Occupation, SolverConfig};
use proptest::prelude::*;

fn couple_strategy() -> impl Strategy<Value = Couple> {
    (0.2f64..5.0, 0.2f64..5.0, 0.05f64..0.98).prop_map(|(a_m, a_f, d)| Couple {
        ability_m: a_m,
        ability_f: a_f,
        domestic_req: d,
    })
}

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (
        0.5f64..4.0,  // theta
        0.3f64..0.9,  // psi
        0.05f64..0.5, // eta
        4.0f64..20.0, // phi
        0.0f64..1.5,  // delta
    )
        .prop_map(|(theta, psi, eta, phi, delta)| ModelParams {
            theta,
            psi,
            eta,
            phi,
            delta,
            ..ModelParams::calibrated()
        })
}

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    prop_oneof![
        Just(Scenario::baseline()),
        Just(Scenario::flexible_regular()),
        Just(Scenario::outsourcing()),
        (0.01f64..0.2).prop_map(|price| Scenario::outsourcing().with_price(price)),
    ]
}

fn check_solution(p: &ModelParams, couple: &Couple, scenario: &Scenario, cfg: &SolverConfig) {
    let sol = solve_couple(p, couple, scenario, cfg);
    let outsourcing = scenario.resolved_price(p).is_some();
    let mut prob_total = 0.0;
    for (i, j_m) in Occupation::ALL.iter().enumerate() {
        for (j, j_f) in Occupation::ALL.iter().enumerate() {
            let a = &sol.alloc[i][j];
            let prob = sol.probs[i][j];
            prob_total += prob;
            assert!(prob >= 0.0, "negative probability");
            if !a.u.is_finite() {
                assert_eq!(prob, 0.0, "impossible pair got probability mass");
                continue;
            }

            // Time budgets and minimum-hours rules.
            for (h, d, occ) in [(a.h_m, a.d_m, *j_m), (a.h_f, a.d_f, *j_f)] {
                assert!(h >= -1e-12 && d >= -1e-12, "negative hours");
                assert!(h + d <= 1.0 + 1e-9, "time budget violated: {}", h + d);
                let hmin = match occ {
                    Occupation::Regular => p.hmin_regular,
                    Occupation::NonRegular => p.hmin_nonregular,
                    Occupation::NotWorking => 0.0,
                };
                assert!(
                    h <= 1e-12 || h >= hmin - 1e-9,
                    "hours {h} below the occupation minimum {hmin}"
                );
                if occ == Occupation::NotWorking {
                    assert!(h.abs() <= 1e-12, "non-working spouse has market hours");
                }
            }

            // Budget identity: 2c + p·d_buy = e_m + e_f exactly.
            let spent = scenario.resolved_price(p).unwrap_or(0.0) * a.d_buy;
            assert!(
                (2.0 * a.c + spent - (a.e_m + a.e_f)).abs() <= 1e-9 * (a.e_m + a.e_f).max(1.0),
                "budget identity violated"
            );
            if !outsourcing {
                assert_eq!(a.d_buy, 0.0, "purchased hours outside outsourcing mode");
            }

            // The domestic requirement is met by the CES aggregate.
            let inputs = [a.d_m, a.d_f, a.d_buy];
            let agg = p.ces_aggregate(&inputs);
            assert!(
                (agg - couple.domestic_req).abs() <= 1e-7,
                "domestic requirement missed: {agg} vs {}",
                couple.domestic_req
            );

            // The penalty flag mirrors the earnings comparison.
            assert_eq!(
                a.norm_binding,
                wife_outearns(a.e_m, a.e_f),
                "norm flag inconsistent with earnings"
            );
        }
    }
    assert!((prob_total - 1.0).abs() <= 1e-10, "probabilities sum to {prob_total}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn menu_solutions_satisfy_all_invariants(
        couple in couple_strategy(),
        p in params_strategy(),
        scenario in scenario_strategy(),
    ) {
        check_solution(&p, &couple, &scenario, &SolverConfig::default());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]
    #[test]
    fn continuous_solutions_satisfy_all_invariants(
        couple in couple_strategy(),
        p in params_strategy(),
        scenario in scenario_strategy(),
    ) {
        check_solution(&p, &couple, &scenario, &SolverConfig::continuous());
    }
}

#[test]
fn probability_vectors_sum_to_one_across_a_fuzz_population() {
    use breadwinner_core::population::{draw_couples, PopulationConfig};
    let p = ModelParams::calibrated();
    let cfg = SolverConfig::default();
    let couples = draw_couples(
        &p,
        &PopulationConfig {
            n: 10_000,
            seed: 777,
        },
    );
    for couple in &couples {
        let sol = solve_couple(&p, couple, &Scenario::baseline(), &cfg);
        let total: f64 = sol.probs.iter().flatten().sum();
        assert!((total - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn symmetric_couple_without_penalty_splits_symmetrically() {
    let p = ModelParams::calibrated();
    let couple = Couple {
        ability_m: 1.3,
        ability_f: 1.3,
        domestic_req: 0.6,
    };
    let scenario = Scenario::baseline().with_delta(0.0);
    for cfg in [SolverConfig::default(), SolverConfig::continuous()] {
        let sol = solve_couple(&p, &couple, &scenario, &cfg);
        let a = sol.allocation(Occupation::Regular, Occupation::Regular);
        assert!((a.h_m - a.h_f).abs() <= 1e-7, "market hours asymmetric");
        assert!((a.d_m - a.d_f).abs() <= 1e-7, "domestic hours asymmetric");
    }
}

#[test]
fn huge_penalty_forces_compliance_in_every_cell() {
    let p = ModelParams::calibrated();
    let couple = Couple {
        ability_m: 0.6,
        ability_f: 3.5,
        domestic_req: 0.5,
    };
    let scenario = Scenario::baseline().with_delta(100.0);
    for cfg in [SolverConfig::default(), SolverConfig::continuous()] {
        let sol = solve_couple(&p, &couple, &scenario, &cfg);
        for i in 0..3 {
            for j in 0..3 {
                let a = &sol.alloc[i][j];
                if a.u.is_finite() && a.e_m > 0.0 {
                    assert!(
                        a.e_f <= a.e_m + 1e-9 * a.e_m,
                        "cell ({i},{j}) still violates: e_f={} e_m={}",
                        a.e_f,
                        a.e_m
                    );
                }
            }
        }
    }
}
