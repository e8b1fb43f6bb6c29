//! Continuous-hours search for one occupation pair.
//!
//! The earnings schedules are smooth inside a small number of hour
//! intervals (below/above the regular full-time kink, the whole range
//! for non-regular and flexible-regular work). Within every product of
//! such pieces the unrestricted problem is solved by a fine grid plus a
//! simplex polish. Because the penalty makes household utility
//! discontinuous across the equal-earnings manifold, the restricted
//! branch (wife not out-earning) additionally searches allocations where
//! the wife's earnings exactly match the husband's; the pair value is
//! the better of the restricted branch and the unrestricted branch net
//! of the penalty.

use super::{combo_to_allocation, Allocation, ComboValue, PairProblem};
use crate::model::{ModelParams, Occupation, WageSchedule};
use crate::nelder_mead::{minimize, NmOptions};

/// Grid spacing of the within-piece scan.
const GRID: f64 = 0.01;

/// Smooth hour intervals of an occupation's earnings schedule.
fn pieces(p: &ModelParams, occ: Occupation, schedule: WageSchedule) -> Vec<(f64, f64)> {
    match occ {
        Occupation::NotWorking => vec![],
        Occupation::NonRegular => vec![(p.hmin_nonregular, 1.0)],
        Occupation::Regular => match schedule {
            WageSchedule::Kinked => vec![(p.hmin_regular, p.hbar), (p.hbar, 1.0)],
            WageSchedule::Linear => vec![(p.hmin_regular, 1.0)],
        },
    }
}

/// Inclusive grid over one piece, always containing both endpoints.
fn grid_points(lo: f64, hi: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut k = 0u32;
    loop {
        let h = lo + f64::from(k) * GRID;
        if h >= hi - 1e-12 {
            break;
        }
        v.push(h);
        k += 1;
    }
    v.push(hi);
    v
}

/// Hours in one piece that earn exactly `target` for ability `a`, if any.
fn invert_earnings(
    p: &ModelParams,
    occ: Occupation,
    schedule: WageSchedule,
    a: f64,
    target: f64,
) -> Option<f64> {
    if target <= 0.0 {
        return None;
    }
    let rate = a * p.kink_rate();
    let h = match occ {
        Occupation::NotWorking => return None,
        Occupation::NonRegular => target / (p.psi * rate),
        Occupation::Regular => match schedule {
            WageSchedule::Linear => target / rate,
            WageSchedule::Kinked => {
                let kink_earnings = a * p.hbar.powf(1.0 + p.theta);
                if target <= kink_earnings {
                    (target / a).powf(1.0 / (1.0 + p.theta))
                } else {
                    target / rate
                }
            }
        },
    };
    let hmin = match occ {
        Occupation::Regular => p.hmin_regular,
        _ => p.hmin_nonregular,
    };
    (h >= hmin - 1e-12 && h <= 1.0 + 1e-12).then(|| h.clamp(hmin, 1.0))
}

/// Running best combinations of the search.
#[derive(Default)]
struct Best {
    /// Best unrestricted value (the penalty ignored).
    raw: Option<ComboValue>,
    /// Best among combinations where the wife does not out-earn.
    restricted: Option<ComboValue>,
}

impl Best {
    fn consider(&mut self, v: ComboValue) {
        if self.raw.as_ref().is_none_or(|b| v.u_raw > b.u_raw) {
            self.raw = Some(v);
        }
        if !v.outearns && self.restricted.as_ref().is_none_or(|b| v.u_raw > b.u_raw) {
            self.restricted = Some(v);
        }
    }
}

pub(super) fn solve_pair_continuous(problem: &PairProblem) -> Allocation {
    let m_working = problem.j_m.is_working();
    let f_working = problem.j_f.is_working();

    let mut best = Best::default();
    if !m_working && !f_working {
        let mut warm = None;
        if let Some(v) = problem.eval(0.0, 0.0, &mut warm) {
            best.consider(v);
        }
        return finish(problem, best);
    }

    if m_working && f_working {
        search_two_free(problem, &mut best);
    } else {
        search_one_free(problem, m_working, &mut best);
    }
    finish(problem, best)
}

/// Combines the two branches into the pair's allocation.
fn finish(problem: &PairProblem, best: Best) -> Allocation {
    let Some(raw) = best.raw else {
        return Allocation::EMPTY;
    };
    let v2 = raw.u_raw;
    let v1 = best.restricted.as_ref().map_or(f64::NEG_INFINITY, |v| v.u_raw);
    if v1 >= v2 - problem.delta {
        let chosen = best.restricted.unwrap();
        combo_to_allocation(&chosen, v1, chosen.outearns)
    } else {
        combo_to_allocation(&raw, v2 - problem.delta, raw.outearns)
    }
}

fn search_one_free(problem: &PairProblem, husband_works: bool, best: &mut Best) {
    let occ = if husband_works {
        problem.j_m
    } else {
        problem.j_f
    };
    for (lo, hi) in pieces(problem.p, occ, problem.schedule) {
        let mut warm = None;
        let mut piece_best: Option<ComboValue> = None;
        for h in grid_points(lo, hi) {
            let v = if husband_works {
                problem.eval(h, 0.0, &mut warm)
            } else {
                problem.eval(0.0, h, &mut warm)
            };
            if let Some(v) = v {
                if piece_best.as_ref().is_none_or(|b| v.u_raw > b.u_raw) {
                    piece_best = Some(v);
                }
                best.consider(v);
            }
        }
        let Some(pb) = piece_best else { continue };
        let start = if husband_works { pb.h_m } else { pb.h_f };
        let mut warm_polish = None;
        let objective = |x: &[f64]| {
            let v = if husband_works {
                problem.eval(x[0], 0.0, &mut warm_polish)
            } else {
                problem.eval(0.0, x[0], &mut warm_polish)
            };
            v.map_or(f64::INFINITY, |v| -v.u_raw)
        };
        let r = minimize(
            objective,
            &[start],
            &[GRID * 0.5],
            Some((&[lo], &[hi])),
            &polish_options(),
        );
        let mut warm = None;
        let v = if husband_works {
            problem.eval(r.x[0], 0.0, &mut warm)
        } else {
            problem.eval(0.0, r.x[0], &mut warm)
        };
        if let Some(v) = v {
            best.consider(v);
        }
    }
}

fn search_two_free(problem: &PairProblem, best: &mut Best) {
    let pieces_m = pieces(problem.p, problem.j_m, problem.schedule);
    let pieces_f = pieces(problem.p, problem.j_f, problem.schedule);

    for &(lo_m, hi_m) in &pieces_m {
        for &(lo_f, hi_f) in &pieces_f {
            let mut warm = None;
            let mut region_best: Option<ComboValue> = None;
            let mut region_best_restricted: Option<ComboValue> = None;
            for h_m in grid_points(lo_m, hi_m) {
                for h_f in grid_points(lo_f, hi_f) {
                    if let Some(v) = problem.eval(h_m, h_f, &mut warm) {
                        if region_best.as_ref().is_none_or(|b| v.u_raw > b.u_raw) {
                            region_best = Some(v);
                        }
                        if !v.outearns
                            && region_best_restricted
                                .as_ref()
                                .is_none_or(|b| v.u_raw > b.u_raw)
                        {
                            region_best_restricted = Some(v);
                        }
                        best.consider(v);
                    }
                }
            }

            let bounds_lo = [lo_m, lo_f];
            let bounds_hi = [hi_m, hi_f];
            if let Some(rb) = region_best {
                let mut warm_polish = None;
                let objective = |x: &[f64]| {
                    problem
                        .eval(x[0], x[1], &mut warm_polish)
                        .map_or(f64::INFINITY, |v| -v.u_raw)
                };
                let r = minimize(
                    objective,
                    &[rb.h_m, rb.h_f],
                    &[GRID * 0.5, GRID * 0.5],
                    Some((&bounds_lo, &bounds_hi)),
                    &polish_options(),
                );
                let mut warm = None;
                if let Some(v) = problem.eval(r.x[0], r.x[1], &mut warm) {
                    best.consider(v);
                }
            }
            if let Some(rb) = region_best_restricted {
                // Polish inside the restricted branch: out-earning points
                // are treated as infinitely bad so the simplex stays on
                // the feasible side.
                let mut warm_polish = None;
                let objective = |x: &[f64]| {
                    problem
                        .eval(x[0], x[1], &mut warm_polish)
                        .map_or(f64::INFINITY, |v| {
                            if v.outearns {
                                f64::INFINITY
                            } else {
                                -v.u_raw
                            }
                        })
                };
                let r = minimize(
                    objective,
                    &[rb.h_m, rb.h_f],
                    &[GRID * 0.5, GRID * 0.5],
                    Some((&bounds_lo, &bounds_hi)),
                    &polish_options(),
                );
                let mut warm = None;
                if let Some(v) = problem.eval(r.x[0], r.x[1], &mut warm) {
                    best.consider(v);
                }
            }
        }
    }

    search_manifold(problem, &pieces_m, best);
}

/// Candidates with the wife's earnings exactly matching the husband's.
///
/// For every husband's hours choice the wife's hours are recovered by
/// inverting her earnings schedule at his earnings; this traces the
/// boundary of the restricted branch, where its optimum frequently sits.
fn search_manifold(problem: &PairProblem, pieces_m: &[(f64, f64)], best: &mut Best) {
    let manifold_value = |h_m: f64, warm: &mut Option<f64>| -> Option<ComboValue> {
        let e_m = problem
            .p
            .earnings(problem.j_m, problem.schedule, problem.a_m, h_m);
        let h_f = invert_earnings(problem.p, problem.j_f, problem.schedule, problem.a_f, e_m)?;
        problem.eval(h_m, h_f, warm)
    };

    let mut best_on_manifold: Option<ComboValue> = None;
    for &(lo, hi) in pieces_m {
        let mut warm = None;
        for h_m in grid_points(lo, hi) {
            if let Some(v) = manifold_value(h_m, &mut warm) {
                best.consider(v);
                if best_on_manifold.as_ref().is_none_or(|b| v.u_raw > b.u_raw) {
                    best_on_manifold = Some(v);
                }
            }
        }
    }

    // Refine the husband-hours coordinate locally around the best
    // manifold point.
    if let Some(bm) = best_on_manifold {
        for &(lo, hi) in pieces_m {
            if bm.h_m < lo - 1e-12 || bm.h_m > hi + 1e-12 {
                continue;
            }
            let wlo = (bm.h_m - 1.5 * GRID).max(lo);
            let whi = (bm.h_m + 1.5 * GRID).min(hi);
            let mut warm_polish = None;
            let objective = |x: &[f64]| {
                manifold_value(x[0], &mut warm_polish).map_or(f64::INFINITY, |v| -v.u_raw)
            };
            let r = minimize(
                objective,
                &[bm.h_m],
                &[GRID * 0.25],
                Some((&[wlo], &[whi])),
                &polish_options(),
            );
            let mut warm = None;
            if let Some(v) = manifold_value(r.x[0], &mut warm) {
                best.consider(v);
            }
        }
    }
}

fn polish_options() -> NmOptions {
    NmOptions {
        max_evals: 400,
        x_tol: 1e-10,
        f_tol: 1e-13,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterfactual::Scenario;
    use crate::population::Couple;
    use crate::solver::{solve_couple, SolverConfig};

    #[test]
    fn grid_includes_both_endpoints() {
        let g = grid_points(0.2, 0.4);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.2);
        assert_eq!(*g.last().unwrap(), 0.4);
    }

    #[test]
    fn earnings_inversion_round_trips() {
        let p = ModelParams::calibrated();
        let a = 1.4;
        for (occ, h) in [
            (Occupation::Regular, 0.3),
            (Occupation::Regular, 0.7),
            (Occupation::NonRegular, 0.55),
        ] {
            let e = p.earnings(occ, WageSchedule::Kinked, a, h);
            let back = invert_earnings(&p, occ, WageSchedule::Kinked, a, e).unwrap();
            assert!((back - h).abs() < 1e-10, "{occ:?} {h} -> {back}");
        }
        // Unreachable targets have no inverse.
        assert!(invert_earnings(&p, Occupation::NonRegular, WageSchedule::Kinked, 1.0, 10.0)
            .is_none());
        assert!(invert_earnings(&p, Occupation::Regular, WageSchedule::Kinked, 1.0, -1.0)
            .is_none());
    }

    #[test]
    fn continuous_solution_weakly_improves_on_the_menu() {
        let p = ModelParams::calibrated();
        let couple = Couple {
            ability_m: 1.2,
            ability_f: 1.0,
            domestic_req: 0.8,
        };
        let scenario = Scenario::baseline();
        let menu = solve_couple(&p, &couple, &scenario, &SolverConfig::default());
        let cont = solve_couple(&p, &couple, &scenario, &SolverConfig::continuous());
        for i in 0..3 {
            for j in 0..3 {
                let (m, c) = (menu.utility[i][j], cont.utility[i][j]);
                if m.is_finite() {
                    assert!(
                        c >= m - 1e-9,
                        "pair ({i},{j}): continuous {c} below menu {m}"
                    );
                }
            }
        }
    }

    #[test]
    fn manifold_candidates_tie_earnings_exactly_under_a_huge_penalty() {
        let p = ModelParams::calibrated();
        // A wife with much higher ability: the unrestricted optimum has
        // her out-earning. An enormous penalty forces the compliant
        // branch, whose optimum sits on the equal-earnings manifold.
        let couple = Couple {
            ability_m: 0.8,
            ability_f: 2.4,
            domestic_req: 0.5,
        };
        let scenario = Scenario::baseline().with_delta(100.0);
        let sol = solve_couple(&p, &couple, &scenario, &SolverConfig::continuous());
        let a = sol.allocation(Occupation::Regular, Occupation::Regular);
        assert!(!a.norm_binding);
        assert!(a.e_f <= a.e_m + 1e-9);
        assert!((a.e_f - a.e_m).abs() <= 1e-6 * a.e_m.max(1e-12));
    }
}
