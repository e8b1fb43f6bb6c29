//! Independent reference optimizer for the household problem.
//!
//! This crate re-derives each occupation pair's best joint utility from
//! scratch — its own earnings formulas, golden-section inner solvers,
//! and a layered grid search over market hours with explicit
//! equal-earnings candidates — sharing only the parameter and scenario
//! types with the main library. Agreement between this oracle and the
//! production solver is the core numerical check of the test suite.
//!
//! The hours search runs per earnings-schedule piece: a coarse grid
//! first, then repeatedly re-gridded tenfold-finer windows around the
//! incumbents of each branch (unrestricted, wife-not-outearning, and
//! the equal-earnings manifold reached by bisection). The norm penalty
//! is applied through the branch comparison `max(V₁, V₂ − δ)`.

mod inner;

pub use inner::{baseline_inner, golden_max, outsourced_inner};

use breadwinner_core::counterfactual::Scenario;
use breadwinner_core::model::WageSchedule;
use breadwinner_core::population::Couple;
use breadwinner_core::{ModelParams, Occupation};

/// Search resolution. `menu_step` switches to exact enumeration of the
/// discrete hours menu; `None` searches continuously.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub menu_step: Option<f64>,
    /// Hours grid at the first continuous stage.
    pub coarse_step: f64,
    /// Coarser first stage for the outsourcing scenario, whose inner
    /// problem is two-dimensional and much more expensive.
    pub outsourcing_coarse_step: f64,
    /// Number of tenfold window refinements after the coarse stage.
    pub refinements: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            menu_step: None,
            coarse_step: 0.01,
            outsourcing_coarse_step: 0.02,
            refinements: 2,
        }
    }
}

const COARSE_INNER_ITERS: usize = 30;
const REFINE_INNER_ITERS: usize = 45;
const FINAL_INNER_ITERS: usize = 75;
const BISECT_ITERS: usize = 100;

/// Everything fixed while searching one occupation pair.
struct Pair<'a> {
    p: &'a ModelParams,
    a_m: f64,
    a_f: f64,
    d_req: f64,
    j_m: Occupation,
    j_f: Occupation,
    schedule: WageSchedule,
    price: Option<f64>,
}

impl Pair<'_> {
    fn earnings(&self, wife: bool, h: f64) -> f64 {
        let (occ, a) = if wife {
            (self.j_f, self.a_f)
        } else {
            (self.j_m, self.a_m)
        };
        let p = self.p;
        match occ {
            Occupation::NotWorking => 0.0,
            Occupation::NonRegular => {
                if h < p.hmin_nonregular - 1e-12 {
                    0.0
                } else {
                    p.psi * a * p.hbar.powf(p.theta) * h
                }
            }
            Occupation::Regular => {
                if h < p.hmin_regular - 1e-12 {
                    0.0
                } else {
                    match self.schedule {
                        WageSchedule::Linear => a * p.hbar.powf(p.theta) * h,
                        WageSchedule::Kinked => {
                            if h <= p.hbar + 1e-12 {
                                a * h.powf(1.0 + p.theta)
                            } else {
                                a * p.hbar.powf(p.theta) * h
                            }
                        }
                    }
                }
            }
        }
    }

    fn utility(&self, h_m: f64, h_f: f64, inner_iters: usize) -> f64 {
        let income = self.earnings(false, h_m) + self.earnings(true, h_f);
        match self.price {
            None => baseline_inner(self.p, h_m, h_f, self.d_req, income, inner_iters),
            Some(price) => {
                outsourced_inner(self.p, h_m, h_f, self.d_req, income, price, inner_iters)
            }
        }
    }

    fn wife_outearns(&self, h_m: f64, h_f: f64) -> bool {
        let e_m = self.earnings(false, h_m);
        let e_f = self.earnings(true, h_f);
        e_f > e_m + 1e-9 * e_m.max(1e-9)
    }

    /// Hours spans over which earnings are smooth, per spouse.
    fn pieces(&self, wife: bool) -> Vec<(f64, f64)> {
        let occ = if wife { self.j_f } else { self.j_m };
        let p = self.p;
        match occ {
            Occupation::NotWorking => vec![],
            Occupation::NonRegular => vec![(p.hmin_nonregular, 1.0)],
            Occupation::Regular => match self.schedule {
                WageSchedule::Linear => vec![(p.hmin_regular, 1.0)],
                WageSchedule::Kinked => vec![(p.hmin_regular, p.hbar), (p.hbar, 1.0)],
            },
        }
    }

    fn hours_floor(&self, wife: bool) -> f64 {
        let occ = if wife { self.j_f } else { self.j_m };
        match occ {
            Occupation::NotWorking => 0.0,
            Occupation::NonRegular => self.p.hmin_nonregular,
            Occupation::Regular => self.p.hmin_regular,
        }
    }

    /// Hours of one spouse that tie that spouse's earnings to `target`,
    /// by bisection inside each earnings piece.
    fn tie_hours(&self, wife: bool, target: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if target <= 0.0 {
            return out;
        }
        for (lo, hi) in self.pieces(wife) {
            let e_lo = self.earnings(wife, lo);
            let e_hi = self.earnings(wife, hi);
            if target < e_lo - 1e-15 || target > e_hi + 1e-15 {
                continue;
            }
            let (mut a, mut b) = (lo, hi);
            for _ in 0..BISECT_ITERS {
                let mid = 0.5 * (a + b);
                if self.earnings(wife, mid) < target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        out
    }
}

/// Incumbent of one search branch.
#[derive(Clone, Copy)]
struct Incumbent {
    value: f64,
    h_m: f64,
    h_f: f64,
}

impl Incumbent {
    const EMPTY: Incumbent = Incumbent {
        value: f64::NEG_INFINITY,
        h_m: 0.0,
        h_f: 0.0,
    };
}

#[derive(Clone, Copy)]
struct Branches {
    /// Unrestricted best (V₂).
    raw: Incumbent,
    /// Best with the wife not out-earning (V₁).
    compliant: Incumbent,
    /// Best equal-earnings candidate (a subset of `compliant`).
    manifold: Incumbent,
}

impl Branches {
    const EMPTY: Branches = Branches {
        raw: Incumbent::EMPTY,
        compliant: Incumbent::EMPTY,
        manifold: Incumbent::EMPTY,
    };

    fn consider(&mut self, pair: &Pair, h_m: f64, h_f: f64, iters: usize) {
        let value = pair.utility(h_m, h_f, iters);
        if value == f64::NEG_INFINITY {
            return;
        }
        if value > self.raw.value {
            self.raw = Incumbent { value, h_m, h_f };
        }
        if !pair.wife_outearns(h_m, h_f) && value > self.compliant.value {
            self.compliant = Incumbent { value, h_m, h_f };
        }
    }

    fn consider_manifold(&mut self, pair: &Pair, h_m: f64, iters: usize) {
        for h_f in pair.tie_hours(true, pair.earnings(false, h_m)) {
            self.consider_tied(pair, h_m, h_f, iters);
        }
    }

    /// Records an exact equal-earnings point in every branch.
    fn consider_tied(&mut self, pair: &Pair, h_m: f64, h_f: f64, iters: usize) {
        let value = pair.utility(h_m, h_f, iters);
        if value == f64::NEG_INFINITY {
            return;
        }
        if value > self.manifold.value {
            self.manifold = Incumbent { value, h_m, h_f };
        }
        if value > self.compliant.value {
            self.compliant = Incumbent { value, h_m, h_f };
        }
        if value > self.raw.value {
            self.raw = Incumbent { value, h_m, h_f };
        }
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut points = Vec::new();
    let mut k = 0u32;
    loop {
        let h = lo + f64::from(k) * step;
        if h >= hi - 1e-12 {
            break;
        }
        points.push(h);
        k += 1;
    }
    points.push(hi);
    points
}

/// Refinement grid with any piece boundaries inside the window added,
/// so kink-point optima are evaluated exactly rather than approached.
fn grid_with_breaks(lo: f64, hi: f64, step: f64, pieces: &[(f64, f64)]) -> Vec<f64> {
    let mut points = grid(lo, hi, step);
    for &(a, b) in pieces {
        for e in [a, b] {
            if e > lo + 1e-12 && e < hi - 1e-12 {
                points.push(e);
            }
        }
    }
    points
}

/// Best utility of one occupation pair under the oracle's layered
/// search; `-∞` when no feasible allocation exists.
pub fn pair_value(
    p: &ModelParams,
    couple: &Couple,
    j_m: Occupation,
    j_f: Occupation,
    scenario: &Scenario,
    cfg: &OracleConfig,
) -> f64 {
    let pair = Pair {
        p,
        a_m: couple.ability_m,
        a_f: couple.ability_f,
        d_req: couple.domestic_req,
        j_m,
        j_f,
        schedule: scenario.wage_schedule(),
        price: scenario.resolved_price(p),
    };
    let delta = scenario.resolved_delta(p);

    let branches = match cfg.menu_step {
        Some(step) => menu_search(&pair, step),
        None => continuous_search(&pair, cfg),
    };

    let finalize = |inc: Incumbent| {
        if inc.value == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            pair.utility(inc.h_m, inc.h_f, FINAL_INNER_ITERS)
        }
    };
    let v2 = finalize(branches.raw);
    let v1 = finalize(branches.compliant).max(finalize(branches.manifold));
    v1.max(v2 - delta)
}

/// All nine pair values for one couple.
pub fn couple_values(
    p: &ModelParams,
    couple: &Couple,
    scenario: &Scenario,
    cfg: &OracleConfig,
) -> [[f64; 3]; 3] {
    let mut out = [[f64::NEG_INFINITY; 3]; 3];
    for j_m in Occupation::ALL {
        for j_f in Occupation::ALL {
            out[j_m.index()][j_f.index()] = pair_value(p, couple, j_m, j_f, scenario, cfg);
        }
    }
    out
}

/// Exact enumeration of the discrete hours menu.
fn menu_search(pair: &Pair, step: f64) -> Branches {
    let menu = |occ: Occupation, hmin: f64| -> Vec<f64> {
        if occ == Occupation::NotWorking {
            return vec![0.0];
        }
        let mut m = Vec::new();
        let mut k = 0u32;
        loop {
            let h = hmin + f64::from(k) * step;
            if h > 1.0 + 1e-9 {
                break;
            }
            m.push(h.min(1.0));
            k += 1;
        }
        m
    };
    let menu_m = menu(pair.j_m, pair.hours_floor(false));
    let menu_f = menu(pair.j_f, pair.hours_floor(true));
    let mut branches = Branches::EMPTY;
    for &h_m in &menu_m {
        for &h_f in &menu_f {
            branches.consider(pair, h_m, h_f, FINAL_INNER_ITERS);
        }
    }
    branches
}

fn continuous_search(pair: &Pair, cfg: &OracleConfig) -> Branches {
    let coarse = match pair.price {
        None => cfg.coarse_step,
        Some(_) => cfg.outsourcing_coarse_step,
    };
    let pieces_m = pair.pieces(false);
    let pieces_f = pair.pieces(true);
    let mut branches = Branches::EMPTY;

    match (pieces_m.is_empty(), pieces_f.is_empty()) {
        (true, true) => {
            branches.consider(pair, 0.0, 0.0, FINAL_INNER_ITERS);
            return branches;
        }
        (false, true) => {
            let points: Vec<f64> = pieces_m
                .iter()
                .flat_map(|&(lo, hi)| grid(lo, hi, coarse))
                .collect();
            for &h in &points {
                branches.consider(pair, h, 0.0, COARSE_INNER_ITERS);
            }
            refine_one_free(pair, cfg, coarse, false, &mut branches);
            return branches;
        }
        (true, false) => {
            let points: Vec<f64> = pieces_f
                .iter()
                .flat_map(|&(lo, hi)| grid(lo, hi, coarse))
                .collect();
            for &h in &points {
                branches.consider(pair, 0.0, h, COARSE_INNER_ITERS);
            }
            refine_one_free(pair, cfg, coarse, true, &mut branches);
            return branches;
        }
        (false, false) => {}
    }

    let grid_m: Vec<f64> = pieces_m
        .iter()
        .flat_map(|&(lo, hi)| grid(lo, hi, coarse))
        .collect();
    let grid_f: Vec<f64> = pieces_f
        .iter()
        .flat_map(|&(lo, hi)| grid(lo, hi, coarse))
        .collect();
    for &h_m in &grid_m {
        for &h_f in &grid_f {
            branches.consider(pair, h_m, h_f, COARSE_INNER_ITERS);
        }
        branches.consider_manifold(pair, h_m, COARSE_INNER_ITERS);
    }

    // Corners where the equal-earnings manifold crosses one of the
    // wife's piece boundaries: fix her hours there and tie his.
    for &(lo_f, hi_f) in &pieces_f {
        for h_f in [lo_f, hi_f] {
            let target = pair.earnings(true, h_f);
            for h_m in pair.tie_hours(false, target) {
                branches.consider_tied(pair, h_m, h_f, COARSE_INNER_ITERS);
            }
        }
    }

    let mut step = coarse;
    for _ in 0..cfg.refinements {
        let window = 1.5 * step;
        step /= 10.0;
        let mut centers = vec![branches.raw];
        if (branches.compliant.h_m - branches.raw.h_m).abs() > 0.49 * step
            || (branches.compliant.h_f - branches.raw.h_f).abs() > 0.49 * step
        {
            centers.push(branches.compliant);
        }
        for center in centers {
            if center.value == f64::NEG_INFINITY {
                continue;
            }
            let lo_m = (center.h_m - window).max(pair.hours_floor(false));
            let hi_m = (center.h_m + window).min(1.0);
            let lo_f = (center.h_f - window).max(pair.hours_floor(true));
            let hi_f = (center.h_f + window).min(1.0);
            for &h_m in &grid_with_breaks(lo_m, hi_m, step, &pieces_m) {
                for &h_f in &grid_with_breaks(lo_f, hi_f, step, &pieces_f) {
                    branches.consider(pair, h_m, h_f, REFINE_INNER_ITERS);
                }
            }
        }
        if branches.manifold.value > f64::NEG_INFINITY {
            let lo = (branches.manifold.h_m - window).max(pair.hours_floor(false));
            let hi = (branches.manifold.h_m + window).min(1.0);
            for &h_m in &grid_with_breaks(lo, hi, step, &pieces_m) {
                branches.consider_manifold(pair, h_m, REFINE_INNER_ITERS);
            }
        }
    }
    branches
}

fn refine_one_free(
    pair: &Pair,
    cfg: &OracleConfig,
    coarse: f64,
    wife_works: bool,
    branches: &mut Branches,
) {
    let mut step = coarse;
    for _ in 0..cfg.refinements {
        let window = 1.5 * step;
        step /= 10.0;
        let center = branches.raw;
        if center.value == f64::NEG_INFINITY {
            return;
        }
        let h = if wife_works { center.h_f } else { center.h_m };
        let lo = (h - window).max(pair.hours_floor(wife_works));
        let hi = (h + window).min(1.0);
        for &x in &grid_with_breaks(lo, hi, step, &pair.pieces(wife_works)) {
            if wife_works {
                branches.consider(pair, 0.0, x, REFINE_INNER_ITERS);
            } else {
                branches.consider(pair, x, 0.0, REFINE_INNER_ITERS);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use breadwinner_core::SolverConfig;

    #[test]
    fn grid_includes_both_endpoints() {
        let g = grid(0.2, 0.4, 0.01);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.2);
        assert_eq!(*g.last().unwrap(), 0.4);
    }

    #[test]
    fn not_working_pair_is_infeasible_in_baseline() {
        let p = ModelParams::calibrated();
        let couple = Couple {
            ability_m: 1.0,
            ability_f: 1.0,
            domestic_req: 0.5,
        };
        let v = pair_value(
            &p,
            &couple,
            Occupation::NotWorking,
            Occupation::NotWorking,
            &Scenario::baseline(),
            &OracleConfig::default(),
        );
        assert_eq!(v, f64::NEG_INFINITY);
    }

    #[test]
    fn menu_oracle_agrees_with_the_menu_solver_on_one_couple() {
        let p = ModelParams::calibrated();
        let couple = Couple {
            ability_m: 1.1,
            ability_f: 0.9,
            domestic_req: 0.7,
        };
        let scenario = Scenario::baseline();
        let sol =
            breadwinner_core::solver::solve_couple(&p, &couple, &scenario, &SolverConfig::default());
        let cfg = OracleConfig {
            menu_step: Some(0.10),
            ..OracleConfig::default()
        };
        for j_m in Occupation::ALL {
            for j_f in Occupation::ALL {
                let v = pair_value(&p, &couple, j_m, j_f, &scenario, &cfg);
                let s = sol.utility[j_m.index()][j_f.index()];
                if s.is_finite() || v.is_finite() {
                    assert!(
                        (v - s).abs() <= 1e-8 * s.abs().max(1.0),
                        "({j_m:?},{j_f:?}): oracle {v} vs solver {s}"
                    );
                }
            }
        }
    }
}
