//! Probability-weighted population statistics.
//!
//! All statistics weight each couple's nine occupation pairs by their
//! choice probabilities instead of sampling occupations, which removes
//! one layer of Monte Carlo noise. Sums use compensated (Kahan)
//! accumulation so results are stable to reordering at the 1e-12 level.
//! Statistics whose conditioning cell is empty are reported as `None`
//! and printed as a dash, never as zero.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::Occupation;
use crate::population::SimulatedPopulation;
use crate::solver::wife_outearns;
use crate::WEEKLY_HOURS;

/// Compensated summation accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Weighted first and second moments of one variable.
#[derive(Debug, Default, Clone, Copy)]
struct Accumulator {
    w: KahanSum,
    wx: KahanSum,
    wxx: KahanSum,
}

impl Accumulator {
    fn add(&mut self, weight: f64, x: f64) {
        self.w.add(weight);
        self.wx.add(weight * x);
        self.wxx.add(weight * x * x);
    }

    fn mean(&self) -> Option<f64> {
        (self.w.value() > 1e-12).then(|| self.wx.value() / self.w.value())
    }

    fn sd(&self) -> Option<f64> {
        let w = self.w.value();
        if w <= 1e-12 {
            return None;
        }
        let m = self.wx.value() / w;
        let v = self.wxx.value() / w - m * m;
        Some(v.max(0.0).sqrt())
    }
}

/// The nine statistics targeted by the calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    /// Share of husbands in regular work.
    pub share_r_male: Option<f64>,
    /// Share of husbands in non-regular work.
    pub share_nr_male: Option<f64>,
    /// Mean log hourly wage of regular minus non-regular husbands.
    pub logwage_gap_r_nr_male: Option<f64>,
    /// Mean market hours of regular husbands, censored at the full-time
    /// kink (hours above h̄ count as h̄).
    pub mean_hours_r_male: Option<f64>,
    /// SD of log hourly wages among regular husbands.
    pub sd_logwage_r_male: Option<f64>,
    /// Correlation of spouses' log earnings among dual-regular couples.
    pub corr_logearn_rr: Option<f64>,
    /// Mean domestic hours of regular-employed wives.
    pub mean_domestic_wife_r: Option<f64>,
    /// SD of domestic hours of regular-employed wives.
    pub sd_domestic_wife_r: Option<f64>,
    /// Share of all couples where the wife strictly out-earns.
    pub share_wife_outearns: Option<f64>,
}

impl MomentSet {
    /// Stable names used in target files, CSV output, and traces.
    pub const NAMES: [&'static str; 9] = [
        "share_r_male",
        "share_nr_male",
        "logwage_gap_r_nr_male",
        "mean_hours_r_male",
        "sd_logwage_r_male",
        "corr_logearn_rr",
        "mean_domestic_wife_r",
        "sd_domestic_wife_r",
        "share_wife_outearns",
    ];

    pub fn as_array(&self) -> [Option<f64>; 9] {
        [
            self.share_r_male,
            self.share_nr_male,
            self.logwage_gap_r_nr_male,
            self.mean_hours_r_male,
            self.sd_logwage_r_male,
            self.corr_logearn_rr,
            self.mean_domestic_wife_r,
            self.sd_domestic_wife_r,
            self.share_wife_outearns,
        ]
    }
}

/// Computes the calibration moments for a solved population.
pub fn compute_moments(pop: &SimulatedPopulation) -> MomentSet {
    let n = pop.len();
    if n == 0 {
        return MomentSet {
            share_r_male: None,
            share_nr_male: None,
            logwage_gap_r_nr_male: None,
            mean_hours_r_male: None,
            sd_logwage_r_male: None,
            corr_logearn_rr: None,
            mean_domestic_wife_r: None,
            sd_domestic_wife_r: None,
            share_wife_outearns: None,
        };
    }
    let hbar = pop.params.hbar;

    let mut share_r = KahanSum::default();
    let mut share_nr = KahanSum::default();
    let mut outearn = KahanSum::default();
    let mut lw_r = Accumulator::default();
    let mut lw_nr = Accumulator::default();
    let mut hours_r = Accumulator::default();
    let mut d_wife_r = Accumulator::default();
    // Correlation pieces for dual-regular couples.
    let mut rr_w = KahanSum::default();
    let mut rr_x = KahanSum::default();
    let mut rr_y = KahanSum::default();
    let mut rr_xx = KahanSum::default();
    let mut rr_yy = KahanSum::default();
    let mut rr_xy = KahanSum::default();

    for sol in &pop.solutions {
        for i in 0..3 {
            for j in 0..3 {
                let p = sol.probs[i][j];
                if p <= 0.0 {
                    continue;
                }
                let a = &sol.alloc[i][j];
                if i == 0 {
                    share_r.add(p);
                    let lw = (a.e_m / a.h_m).ln();
                    lw_r.add(p, lw);
                    hours_r.add(p, a.h_m.min(hbar));
                } else if i == 1 {
                    share_nr.add(p);
                    lw_nr.add(p, (a.e_m / a.h_m).ln());
                }
                if j == 0 {
                    d_wife_r.add(p, a.d_f);
                }
                if i == 0 && j == 0 {
                    let x = a.e_m.ln();
                    let y = a.e_f.ln();
                    rr_w.add(p);
                    rr_x.add(p * x);
                    rr_y.add(p * y);
                    rr_xx.add(p * x * x);
                    rr_yy.add(p * y * y);
                    rr_xy.add(p * x * y);
                }
                if wife_outearns(a.e_m, a.e_f) {
                    outearn.add(p);
                }
            }
        }
    }

    let nf = n as f64;
    let corr = {
        let w = rr_w.value();
        if w > 1e-12 {
            let mx = rr_x.value() / w;
            let my = rr_y.value() / w;
            let vx = rr_xx.value() / w - mx * mx;
            let vy = rr_yy.value() / w - my * my;
            let cov = rr_xy.value() / w - mx * my;
            (vx > 1e-14 && vy > 1e-14).then(|| cov / (vx.sqrt() * vy.sqrt()))
        } else {
            None
        }
    };

    MomentSet {
        share_r_male: Some(share_r.value() / nf),
        share_nr_male: Some(share_nr.value() / nf),
        logwage_gap_r_nr_male: match (lw_r.mean(), lw_nr.mean()) {
            (Some(r), Some(nr)) => Some(r - nr),
            _ => None,
        },
        mean_hours_r_male: hours_r.mean(),
        sd_logwage_r_male: lw_r.sd(),
        corr_logearn_rr: corr,
        mean_domestic_wife_r: d_wife_r.mean(),
        sd_domestic_wife_r: d_wife_r.sd(),
        share_wife_outearns: Some(outearn.value() / nf),
    }
}

/// Male-minus-female gender gaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSet {
    /// P(husband works) − P(wife works).
    pub participation: Option<f64>,
    /// P(husband regular) − P(wife regular).
    pub occupation: Option<f64>,
    /// Mean log market hours of working husbands minus working wives.
    pub hours: Option<f64>,
    /// Mean log hourly wage of working husbands minus working wives.
    pub wage: Option<f64>,
}

impl GapSet {
    pub const NAMES: [&'static str; 4] = [
        "gap_participation",
        "gap_occupation",
        "gap_hours",
        "gap_wage",
    ];

    pub fn as_array(&self) -> [Option<f64>; 4] {
        [self.participation, self.occupation, self.hours, self.wage]
    }
}

/// Gender gaps with the occupation gap measured over all individuals.
pub fn gender_gaps(pop: &SimulatedPopulation) -> GapSet {
    gender_gaps_with(pop, false)
}

/// Gender gaps; `occupation_among_workers` switches the occupation gap
/// to the regular share conditional on working.
pub fn gender_gaps_with(pop: &SimulatedPopulation, occupation_among_workers: bool) -> GapSet {
    let n = pop.len();
    if n == 0 {
        return GapSet {
            participation: None,
            occupation: None,
            hours: None,
            wage: None,
        };
    }
    let mut work_m = KahanSum::default();
    let mut work_f = KahanSum::default();
    let mut r_m = KahanSum::default();
    let mut r_f = KahanSum::default();
    let mut lh_m = Accumulator::default();
    let mut lh_f = Accumulator::default();
    let mut lw_m = Accumulator::default();
    let mut lw_f = Accumulator::default();

    for sol in &pop.solutions {
        for i in 0..3 {
            for j in 0..3 {
                let p = sol.probs[i][j];
                if p <= 0.0 {
                    continue;
                }
                let a = &sol.alloc[i][j];
                if i < 2 {
                    work_m.add(p);
                    lh_m.add(p, a.h_m.ln());
                    lw_m.add(p, (a.e_m / a.h_m).ln());
                    if i == 0 {
                        r_m.add(p);
                    }
                }
                if j < 2 {
                    work_f.add(p);
                    lh_f.add(p, a.h_f.ln());
                    lw_f.add(p, (a.e_f / a.h_f).ln());
                    if j == 0 {
                        r_f.add(p);
                    }
                }
            }
        }
    }

    let nf = n as f64;
    let occupation = if occupation_among_workers {
        let (wm, wf) = (work_m.value(), work_f.value());
        (wm > 1e-12 && wf > 1e-12).then(|| r_m.value() / wm - r_f.value() / wf)
    } else {
        Some((r_m.value() - r_f.value()) / nf)
    };
    GapSet {
        participation: Some((work_m.value() - work_f.value()) / nf),
        occupation,
        hours: match (lh_m.mean(), lh_f.mean()) {
            (Some(m), Some(f)) => Some(m - f),
            _ => None,
        },
        wage: match (lw_m.mean(), lw_f.mean()) {
            (Some(m), Some(f)) => Some(m - f),
            _ => None,
        },
    }
}

/// Population shares of the nine occupation pairs, husband in rows.
pub fn occupation_matrix(pop: &SimulatedPopulation) -> [[f64; 3]; 3] {
    let mut sums = [[KahanSum::default(); 3]; 3];
    for sol in &pop.solutions {
        for i in 0..3 {
            for j in 0..3 {
                sums[i][j].add(sol.probs[i][j]);
            }
        }
    }
    let nf = pop.len().max(1) as f64;
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = sums[i][j].value() / nf;
        }
    }
    m
}

/// Mean weekly market and domestic hours within one occupation pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoursCell {
    pub h_m: f64,
    pub h_f: f64,
    pub d_m: f64,
    pub d_f: f64,
}

/// Conditional hours for the four dual-worker occupation pairs.
#[derive(Debug, Clone)]
pub struct HoursTable {
    /// (husband occupation, wife occupation, conditional means).
    pub rows: [(Occupation, Occupation, Option<HoursCell>); 4],
}

/// Mean hours by working pair, in weekly hours.
pub fn hours_table(pop: &SimulatedPopulation) -> HoursTable {
    let pairs = [
        (Occupation::Regular, Occupation::Regular),
        (Occupation::Regular, Occupation::NonRegular),
        (Occupation::NonRegular, Occupation::Regular),
        (Occupation::NonRegular, Occupation::NonRegular),
    ];
    let mut rows = pairs.map(|(m, f)| (m, f, None));
    for (k, (jm, jf)) in pairs.iter().enumerate() {
        let (i, j) = (jm.index(), jf.index());
        let mut w = KahanSum::default();
        let mut sums = [KahanSum::default(); 4];
        for sol in &pop.solutions {
            let p = sol.probs[i][j];
            if p <= 0.0 {
                continue;
            }
            let a = &sol.alloc[i][j];
            w.add(p);
            sums[0].add(p * a.h_m);
            sums[1].add(p * a.h_f);
            sums[2].add(p * a.d_m);
            sums[3].add(p * a.d_f);
        }
        if w.value() > 1e-12 {
            let s = WEEKLY_HOURS / w.value();
            rows[k].2 = Some(HoursCell {
                h_m: sums[0].value() * s,
                h_f: sums[1].value() * s,
                d_m: sums[2].value() * s,
                d_f: sums[3].value() * s,
            });
        }
    }
    HoursTable { rows }
}

/// Histogram of the wife's share of couple earnings among dual-earner
/// pairs, with the exact-tie mass kept out of the bins.
#[derive(Debug, Clone)]
pub struct RelativeEarningsDensity {
    pub bin_width: f64,
    /// Mass per bin over [0, 1]; together with the atom it sums to 1.
    pub bins: Vec<f64>,
    /// Mass at exactly one half (equal earnings).
    pub atom_at_half: f64,
}

/// Distribution of `e_f/(e_m+e_f)` among couples where both spouses work.
pub fn relative_earnings_density(
    pop: &SimulatedPopulation,
    bin_width: f64,
) -> RelativeEarningsDensity {
    assert!(bin_width > 0.0 && bin_width < 1.0);
    let n_bins = (1.0 / bin_width).round() as usize;
    let mut bins = vec![KahanSum::default(); n_bins];
    let mut atom = KahanSum::default();
    let mut total = KahanSum::default();
    for sol in &pop.solutions {
        for i in 0..2 {
            for j in 0..2 {
                let p = sol.probs[i][j];
                if p <= 0.0 {
                    continue;
                }
                let a = &sol.alloc[i][j];
                total.add(p);
                if !wife_outearns(a.e_m, a.e_f) && !wife_outearns(a.e_f, a.e_m) {
                    atom.add(p);
                } else {
                    let x = a.e_f / (a.e_m + a.e_f);
                    let k = ((x / bin_width) as usize).min(n_bins - 1);
                    bins[k].add(p);
                }
            }
        }
    }
    let t = total.value();
    let norm = if t > 1e-12 { 1.0 / t } else { 0.0 };
    RelativeEarningsDensity {
        bin_width,
        bins: bins.iter().map(|b| b.value() * norm).collect(),
        atom_at_half: atom.value() * norm,
    }
}

/// Share of dual-earner couples where the wife strictly out-earns.
pub fn share_wife_outearns_dual(pop: &SimulatedPopulation) -> Option<f64> {
    let mut out = KahanSum::default();
    let mut total = KahanSum::default();
    for sol in &pop.solutions {
        for i in 0..2 {
            for j in 0..2 {
                let p = sol.probs[i][j];
                if p <= 0.0 {
                    continue;
                }
                let a = &sol.alloc[i][j];
                total.add(p);
                if wife_outearns(a.e_m, a.e_f) {
                    out.add(p);
                }
            }
        }
    }
    (total.value() > 1e-12).then(|| out.value() / total.value())
}

/// Per-couple sufficient statistics for recomputing gender gaps on
/// bootstrap resamples.
#[derive(Debug, Default, Clone, Copy)]
struct GapContribution {
    work_m: f64,
    work_f: f64,
    r_m: f64,
    r_f: f64,
    p_lh_m: f64,
    p_lh_f: f64,
    p_lw_m: f64,
    p_lw_f: f64,
}

/// Bootstrap standard errors of the four gender gaps, resampling
/// couples with replacement.
pub fn bootstrap_gap_se(pop: &SimulatedPopulation, reps: usize, seed: u64) -> GapSet {
    let n = pop.len();
    if n == 0 || reps < 2 {
        return GapSet {
            participation: None,
            occupation: None,
            hours: None,
            wage: None,
        };
    }
    let contributions: Vec<GapContribution> = pop
        .solutions
        .iter()
        .map(|sol| {
            let mut g = GapContribution::default();
            for i in 0..3 {
                for j in 0..3 {
                    let p = sol.probs[i][j];
                    if p <= 0.0 {
                        continue;
                    }
                    let a = &sol.alloc[i][j];
                    if i < 2 {
                        g.work_m += p;
                        g.p_lh_m += p * a.h_m.ln();
                        g.p_lw_m += p * (a.e_m / a.h_m).ln();
                        if i == 0 {
                            g.r_m += p;
                        }
                    }
                    if j < 2 {
                        g.work_f += p;
                        g.p_lh_f += p * a.h_f.ln();
                        g.p_lw_f += p * (a.e_f / a.h_f).ln();
                        if j == 0 {
                            g.r_f += p;
                        }
                    }
                }
            }
            g
        })
        .collect();

    let mut rep_gaps: [Vec<f64>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..reps {
        let mut t = GapContribution::default();
        for _ in 0..n {
            let k = (rng.next_u64() % n as u64) as usize;
            let c = &contributions[k];
            t.work_m += c.work_m;
            t.work_f += c.work_f;
            t.r_m += c.r_m;
            t.r_f += c.r_f;
            t.p_lh_m += c.p_lh_m;
            t.p_lh_f += c.p_lh_f;
            t.p_lw_m += c.p_lw_m;
            t.p_lw_f += c.p_lw_f;
        }
        let nf = n as f64;
        rep_gaps[0].push((t.work_m - t.work_f) / nf);
        rep_gaps[1].push((t.r_m - t.r_f) / nf);
        if t.work_m > 0.0 && t.work_f > 0.0 {
            rep_gaps[2].push(t.p_lh_m / t.work_m - t.p_lh_f / t.work_f);
            rep_gaps[3].push(t.p_lw_m / t.work_m - t.p_lw_f / t.work_f);
        }
    }

    let sd = |v: &[f64]| -> Option<f64> {
        if v.len() < 2 {
            return None;
        }
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
        Some(var.sqrt())
    };
    GapSet {
        participation: sd(&rep_gaps[0]),
        occupation: sd(&rep_gaps[1]),
        hours: sd(&rep_gaps[2]),
        wage: sd(&rep_gaps[3]),
    }
}
