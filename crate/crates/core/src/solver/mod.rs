//! Per-couple solution of the joint labor-supply problem.
//!
//! For each of the nine occupation pairs the solver picks market hours
//! for the working spouses, splits the domestic requirement exactly
//! (module [`domestic`]), and evaluates household utility including the
//! penalty when the wife out-earns the husband. Pair values then feed a
//! logit over occupation pairs.
//!
//! Market hours come either from a coarse contract menu (the default:
//! steps of 0.10, i.e. ten weekly hours, starting at each occupation's
//! minimum) or, with [`SolverConfig::hour_step`] unset, from a continuous
//! search that combines a fine grid inside every smooth piece of the
//! earnings schedule, a simplex polish, and candidates on the
//! equal-earnings manifold where the penalty branch can bind.

mod continuous;
pub mod domestic;

pub use domestic::{split_requirement, split_requirement_outsourced, DomesticSplit};

use crate::counterfactual::Scenario;
use crate::model::{ModelParams, Occupation, WageSchedule};
use crate::population::Couple;

/// Hours-choice configuration for the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Spacing of the market-hours menu as a fraction of the time
    /// endowment. `None` switches to the continuous-hours search.
    pub hour_step: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            hour_step: Some(0.10),
        }
    }
}

impl SolverConfig {
    pub fn continuous() -> Self {
        SolverConfig { hour_step: None }
    }
}

/// Optimal within-pair allocation for one occupation pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub h_m: f64,
    pub h_f: f64,
    pub d_m: f64,
    pub d_f: f64,
    /// Purchased domestic services (zero outside the outsourcing scenario).
    pub d_buy: f64,
    pub e_m: f64,
    pub e_f: f64,
    /// Consumption per spouse after any service purchases.
    pub c: f64,
    /// Household utility of the pair at the optimum, net of the penalty.
    pub u: f64,
    /// True when the wife out-earns the husband at the chosen
    /// allocation, so the household pays the norm penalty.
    pub norm_binding: bool,
}

impl Allocation {
    pub(crate) const EMPTY: Allocation = Allocation {
        h_m: 0.0,
        h_f: 0.0,
        d_m: 0.0,
        d_f: 0.0,
        d_buy: 0.0,
        e_m: 0.0,
        e_f: 0.0,
        c: 0.0,
        u: f64::NEG_INFINITY,
        norm_binding: false,
    };

    /// Total time (market + domestic) of each spouse.
    pub fn total_time(&self) -> (f64, f64) {
        (self.h_m + self.d_m, self.h_f + self.d_f)
    }
}

/// Full solution for one couple: the nine pair allocations, their
/// utilities, and the logit choice probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupleSolution {
    /// Indexed `[husband occupation][wife occupation]` via [`Occupation::index`].
    pub alloc: [[Allocation; 3]; 3],
    pub utility: [[f64; 3]; 3],
    pub probs: [[f64; 3]; 3],
}

impl CoupleSolution {
    pub fn prob(&self, j_m: Occupation, j_f: Occupation) -> f64 {
        self.probs[j_m.index()][j_f.index()]
    }

    pub fn allocation(&self, j_m: Occupation, j_f: Occupation) -> &Allocation {
        &self.alloc[j_m.index()][j_f.index()]
    }
}

/// Strict out-earning test with a relative guard so that allocations
/// constructed on the equal-earnings manifold never trip the penalty
/// through rounding.
pub fn wife_outearns(e_m: f64, e_f: f64) -> bool {
    e_f > e_m + 1e-9 * e_m.max(1e-9)
}

/// Market-hours menu of one occupation: steps of `step` from the
/// occupation's minimum up to the full endowment.
pub(crate) fn hour_menu(p: &ModelParams, occ: Occupation, step: f64) -> Vec<f64> {
    let hmin = match occ {
        Occupation::NotWorking => return vec![0.0],
        Occupation::Regular => p.hmin_regular,
        Occupation::NonRegular => p.hmin_nonregular,
    };
    let mut menu = Vec::new();
    let mut k = 0u32;
    loop {
        let h = hmin + f64::from(k) * step;
        if h > 1.0 + 1e-9 {
            break;
        }
        menu.push(h.min(1.0));
        k += 1;
    }
    menu
}

/// Everything fixed during one pair's hours search.
pub(crate) struct PairProblem<'a> {
    pub p: &'a ModelParams,
    pub a_m: f64,
    pub a_f: f64,
    pub d_req: f64,
    pub j_m: Occupation,
    pub j_f: Occupation,
    pub schedule: WageSchedule,
    /// Price of outsourced services; `None` outside the outsourcing scenario.
    pub price: Option<f64>,
    pub delta: f64,
}

/// One evaluated hours combination.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ComboValue {
    pub h_m: f64,
    pub h_f: f64,
    pub d_m: f64,
    pub d_f: f64,
    pub d_buy: f64,
    pub e_m: f64,
    pub e_f: f64,
    pub c: f64,
    /// Household utility before any penalty.
    pub u_raw: f64,
    pub outearns: bool,
}

impl PairProblem<'_> {
    /// Evaluates one hours combination: earnings, exact domestic split,
    /// consumption, and raw (pre-penalty) household utility. `None` when
    /// the requirement cannot be met at these hours.
    pub(crate) fn eval(&self, h_m: f64, h_f: f64, warm: &mut Option<f64>) -> Option<ComboValue> {
        let p = self.p;
        let e_m = p.earnings(self.j_m, self.schedule, self.a_m, h_m);
        let e_f = p.earnings(self.j_f, self.schedule, self.a_f, h_f);
        let income = e_m + e_f;
        let split = match self.price {
            None => domestic::split_requirement(p, h_m, h_f, self.d_req)?,
            Some(price) => domestic::split_requirement_outsourced(
                p, h_m, h_f, self.d_req, income, price, warm,
            )?,
        };
        let spent = self.price.unwrap_or(0.0) * split.d_buy;
        let c = 0.5 * (income - spent);
        let ell_m = h_m + split.d_m;
        let ell_f = h_f + split.d_f;
        let u_raw = 0.5 * (p.spouse_utility(c, ell_m) + p.spouse_utility(c, ell_f));
        Some(ComboValue {
            h_m,
            h_f,
            d_m: split.d_m,
            d_f: split.d_f,
            d_buy: split.d_buy,
            e_m,
            e_f,
            c,
            u_raw,
            outearns: wife_outearns(e_m, e_f),
        })
    }

    /// Penalized value of an evaluated combination.
    pub(crate) fn penalized(&self, v: &ComboValue) -> f64 {
        if v.outearns {
            v.u_raw - self.delta
        } else {
            v.u_raw
        }
    }
}

fn combo_to_allocation(v: &ComboValue, u: f64, norm_binding: bool) -> Allocation {
    Allocation {
        h_m: v.h_m,
        h_f: v.h_f,
        d_m: v.d_m,
        d_f: v.d_f,
        d_buy: v.d_buy,
        e_m: v.e_m,
        e_f: v.e_f,
        c: v.c,
        u,
        norm_binding,
    }
}

/// Solves one occupation pair over the hours menu by full enumeration.
fn solve_pair_menu(problem: &PairProblem, step: f64) -> Allocation {
    let menu_m = hour_menu(problem.p, problem.j_m, step);
    let menu_f = hour_menu(problem.p, problem.j_f, step);
    let mut warm = None;
    let mut best: Option<(f64, ComboValue)> = None;
    for &h_m in &menu_m {
        for &h_f in &menu_f {
            let Some(v) = problem.eval(h_m, h_f, &mut warm) else {
                continue;
            };
            let u_pen = problem.penalized(&v);
            if best.as_ref().is_none_or(|(u, _)| u_pen > *u) {
                best = Some((u_pen, v));
            }
        }
    }
    match best {
        Some((u, v)) => combo_to_allocation(&v, u, v.outearns),
        None => Allocation::EMPTY,
    }
}

/// Solves the full couple problem and the occupation-pair logit.
pub fn solve_couple(
    p: &ModelParams,
    couple: &Couple,
    scenario: &Scenario,
    cfg: &SolverConfig,
) -> CoupleSolution {
    let delta = scenario.resolved_delta(p);
    let schedule = scenario.wage_schedule();
    let price = scenario.resolved_price(p);

    let mut alloc = [[Allocation::EMPTY; 3]; 3];
    let mut utility = [[f64::NEG_INFINITY; 3]; 3];
    for j_m in Occupation::ALL {
        for j_f in Occupation::ALL {
            let problem = PairProblem {
                p,
                a_m: couple.ability_m,
                a_f: couple.ability_f,
                d_req: couple.domestic_req,
                j_m,
                j_f,
                schedule,
                price,
                delta,
            };
            let a = match cfg.hour_step {
                Some(step) => solve_pair_menu(&problem, step),
                None => continuous::solve_pair_continuous(&problem),
            };
            utility[j_m.index()][j_f.index()] = a.u;
            alloc[j_m.index()][j_f.index()] = a;
        }
    }

    CoupleSolution {
        alloc,
        utility,
        probs: logit_probs(&utility, p.eta),
    }
}

/// Logit choice probabilities over the nine pair values; `-∞` values get
/// probability exactly zero.
pub fn logit_probs(utility: &[[f64; 3]; 3], eta: f64) -> [[f64; 3]; 3] {
    let max_u = utility
        .iter()
        .flatten()
        .copied()
        .filter(|u| u.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut probs = [[0.0; 3]; 3];
    if !max_u.is_finite() {
        return probs;
    }
    let mut denom = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            if utility[i][j].is_finite() {
                let w = ((utility[i][j] - max_u) / eta).exp();
                probs[i][j] = w;
                denom += w;
            }
        }
    }
    for row in probs.iter_mut() {
        for v in row.iter_mut() {
            *v /= denom;
        }
    }
    probs
}
