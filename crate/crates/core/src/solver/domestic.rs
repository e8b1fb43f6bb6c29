//! Exact inner solutions for the domestic side of the household problem.
//!
//! Given market hours the couple must still produce the domestic
//! requirement `D` as a CES aggregate of the spouses' unpaid hours (and,
//! in the outsourcing scenario, purchased services). Both problems have
//! strictly monotone first-order conditions, so they are solved to near
//! machine precision with safeguarded Newton iterations inside a
//! maintained bracket.

use crate::model::ModelParams;

/// Domestic hours of each spouse plus purchased services.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomesticSplit {
    pub d_m: f64,
    pub d_f: f64,
    pub d_buy: f64,
}

impl DomesticSplit {
    pub const ZERO: DomesticSplit = DomesticSplit {
        d_m: 0.0,
        d_f: 0.0,
        d_buy: 0.0,
    };
}

/// Splits the requirement `d_req` between the spouses' own hours so as to
/// minimize their joint time disutility, holding market hours fixed.
///
/// Minimizes `(h_m+d_m)^(1+γ) + (h_f+d_f)^(1+γ)` subject to
/// `(d_m^ξ + d_f^ξ)^(1/ξ) = d_req` and `0 ≤ d_g ≤ 1 − h_g`. Returns
/// `None` when the requirement cannot be met within the remaining time of
/// the two spouses.
pub fn split_requirement(
    p: &ModelParams,
    h_m: f64,
    h_f: f64,
    d_req: f64,
) -> Option<DomesticSplit> {
    if d_req <= 0.0 {
        return Some(DomesticSplit::ZERO);
    }
    let cap_m = (1.0 - h_m).max(0.0);
    let cap_f = (1.0 - h_f).max(0.0);
    let xi = p.xi;
    let q = d_req.powf(xi);
    let cap_m_xi = if cap_m > 0.0 { cap_m.powf(xi) } else { 0.0 };
    let cap_f_xi = if cap_f > 0.0 { cap_f.powf(xi) } else { 0.0 };
    if cap_m_xi + cap_f_xi + 1e-12 < q {
        return None;
    }

    // Bracket for d_m: the lower end is forced when the wife's remaining
    // time alone cannot produce the requirement; the upper end is the
    // husband's own cap or the full requirement.
    let x_lo = if cap_f_xi >= q {
        d_req * 1e-14
    } else {
        (q - cap_f_xi).powf(1.0 / xi)
    };
    let x_hi = d_req.min(cap_m);
    if x_lo >= x_hi {
        // Degenerate bracket: both caps essentially bind.
        let d_m = x_hi.min(x_lo);
        let d_f = partner_input(q, d_m, xi).min(cap_f);
        return Some(DomesticSplit {
            d_m,
            d_f,
            d_buy: 0.0,
        });
    }

    let gamma = p.gamma;
    let one_m_xi = 1.0 - xi;
    // F(x) is the log difference of the two spouses' marginal rates of
    // substitution between own time and own domestic input; it is
    // strictly increasing in x = d_m.
    let f_and_df = |x: f64| -> (f64, f64) {
        let r = partner_input(q, x, xi);
        let f = gamma * (h_m + x).ln() + one_m_xi * x.ln()
            - gamma * (h_f + r).ln()
            - one_m_xi * r.ln();
        let dr_scale = (r / x).powf(one_m_xi);
        let df = gamma / (h_m + x)
            + one_m_xi / x
            + (gamma / (h_f + r) + one_m_xi / r) * dr_scale;
        (f, df)
    };

    let (f_lo, _) = f_and_df(x_lo);
    if f_lo >= 0.0 {
        // The wife's cap binds: the husband takes the forced minimum.
        let d_f = partner_input(q, x_lo, xi).min(cap_f);
        return Some(DomesticSplit {
            d_m: x_lo,
            d_f,
            d_buy: 0.0,
        });
    }
    let (f_hi, _) = f_and_df(x_hi);
    if f_hi <= 0.0 {
        // The husband's cap (or the full requirement) binds.
        let d_f = partner_input(q, x_hi, xi).min(cap_f);
        return Some(DomesticSplit {
            d_m: x_hi,
            d_f,
            d_buy: 0.0,
        });
    }

    let mut lo = x_lo;
    let mut hi = x_hi;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..80 {
        let (f, df) = f_and_df(x);
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if f.abs() < 1e-13 {
            break;
        }
        let step = f / df;
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x.abs() {
            x = next;
            break;
        }
        x = next;
    }
    let d_f = partner_input(q, x, xi);
    Some(DomesticSplit {
        d_m: x,
        d_f,
        d_buy: 0.0,
    })
}

/// Splits the requirement across both spouses' hours and purchased
/// services, trading time disutility against the consumption cost
/// `price·d_buy`, holding market hours and household income fixed.
///
/// Minimizes the household's loss
/// `−log((E − price·d_buy)/2) + φ/(2(1+γ))·(ℓ_m^(1+γ) + ℓ_f^(1+γ))`
/// subject to `(d_m^ξ + d_f^ξ + d_buy^ξ)^(1/ξ) = d_req` and the spouses'
/// time caps. `warm_start` carries the previous combination's log
/// multiplier to speed up sweeps over an hours grid; `None` when no
/// feasible point has positive consumption.
pub fn split_requirement_outsourced(
    p: &ModelParams,
    h_m: f64,
    h_f: f64,
    d_req: f64,
    income: f64,
    price: f64,
    warm_start: &mut Option<f64>,
) -> Option<DomesticSplit> {
    if d_req <= 0.0 {
        return Some(DomesticSplit::ZERO);
    }
    if income <= 0.0 {
        // Nothing can be purchased; fall back to the own-hours split.
        return split_requirement(p, h_m, h_f, d_req);
    }
    let xi = p.xi;
    let q = d_req.powf(xi);
    let ctx = OutsourceContext {
        p,
        h_m,
        h_f,
        cap_m: (1.0 - h_m).max(0.0),
        cap_f: (1.0 - h_f).max(0.0),
        income,
        price,
        q,
    };

    // F(s) = d_m^ξ + d_f^ξ + d_buy^ξ − D^ξ is strictly increasing in the
    // log multiplier s, because every input rises with the multiplier.
    let mut s = warm_start.unwrap_or_else(|| ctx.initial_multiplier());
    let (f0, _) = ctx.residual(s);
    // Establish a bracket around the root by stepping outward.
    let mut lo;
    let mut hi;
    if f0 < 0.0 {
        lo = s;
        let mut step = 0.5;
        loop {
            s += step;
            let (fs, _) = ctx.residual(s);
            if fs >= 0.0 {
                hi = s;
                break;
            }
            lo = s;
            step *= 2.0;
            if s > 90.0 {
                return None;
            }
        }
    } else {
        hi = s;
        let mut step = 0.5;
        loop {
            s -= step;
            let (fs, _) = ctx.residual(s);
            if fs <= 0.0 || s < -90.0 {
                lo = s;
                break;
            }
            hi = s;
            step *= 2.0;
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..80 {
        let (fx, dfx) = ctx.residual(x);
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if fx.abs() < 1e-13 * q.max(1e-6) {
            break;
        }
        let mut next = if dfx > 0.0 { x - fx / dfx } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            x = next;
            break;
        }
        x = next;
    }
    *warm_start = Some(x);
    let (d_m, _) = ctx.spouse_input(h_m, ctx.cap_m, x);
    let (d_f, _) = ctx.spouse_input(h_f, ctx.cap_f, x);
    let (d_buy, _) = ctx.purchased_input(x);
    Some(DomesticSplit { d_m, d_f, d_buy })
}

/// Partner input needed to complete the CES requirement: `(q − x^ξ)^(1/ξ)`.
fn partner_input(q: f64, x: f64, xi: f64) -> f64 {
    let rem = q - x.powf(xi);
    if rem > 0.0 {
        rem.powf(1.0 / xi)
    } else {
        0.0
    }
}

struct OutsourceContext<'a> {
    p: &'a ModelParams,
    h_m: f64,
    h_f: f64,
    cap_m: f64,
    cap_f: f64,
    income: f64,
    price: f64,
    q: f64,
}

impl OutsourceContext<'_> {
    /// Starting guess for the log multiplier from an even own-hours split.
    fn initial_multiplier(&self) -> f64 {
        let p = self.p;
        let d_guess = (self.q / 2.0).powf(1.0 / p.xi).max(1e-6);
        let ell = self.h_m + d_guess;
        (0.5 * p.phi * ell.powf(p.gamma) * d_guess.powf(1.0 - p.xi))
            .max(1e-280)
            .ln()
    }

    /// CES residual `Σ inputs^ξ − q` at log multiplier `s`, with its
    /// derivative in `s` for Newton steps.
    fn residual(&self, s: f64) -> (f64, f64) {
        let xi = self.p.xi;
        let (x_m, dx_m) = self.spouse_input(self.h_m, self.cap_m, s);
        let (x_f, dx_f) = self.spouse_input(self.h_f, self.cap_f, s);
        let (y, dy) = self.purchased_input(s);
        let mut f = -self.q;
        let mut df = 0.0;
        for (v, dv) in [(x_m, dx_m), (x_f, dx_f), (y, dy)] {
            if v > 0.0 {
                f += v.powf(xi);
                df += xi * v.powf(xi - 1.0) * dv;
            }
        }
        (f, df)
    }

    /// Own-hours input of one spouse at log multiplier `s`: the root of
    /// `φ·(h+x)^γ·x^(1−ξ) = 2·e^s`, clamped to the spouse's time cap.
    /// Returns the input and its derivative in `s` (zero when clamped).
    fn spouse_input(&self, h: f64, cap: f64, s: f64) -> (f64, f64) {
        if cap <= 0.0 {
            return (0.0, 0.0);
        }
        let p = self.p;
        let gamma = p.gamma;
        let one_m_xi = 1.0 - p.xi;
        let target = s + core::f64::consts::LN_2 - p.phi.ln();
        // g(x) = γ·ln(h+x) + (1−ξ)·ln x is strictly increasing.
        let g = |x: f64| gamma * (h + x).ln() + one_m_xi * x.ln();
        if g(cap) <= target {
            return (cap, 0.0);
        }
        let mut lo = 1e-300;
        let mut hi = cap;
        let mut x = (0.5 * cap).min(0.1);
        for _ in 0..80 {
            let gx = g(x) - target;
            if gx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = gamma / (h + x) + one_m_xi / x;
            if gx.abs() < 1e-14 {
                break;
            }
            let mut next = x - gx / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-16 * x.abs() {
                x = next;
                break;
            }
            x = next;
        }
        let slope = gamma / (h + x) + one_m_xi / x;
        (x, 1.0 / slope)
    }

    /// Purchased input at log multiplier `s`: the root of
    /// `price·y + (price/e^s)·y^(1−ξ) = E`, which equates the marginal
    /// consumption cost of a purchase with its shadow value. Returns the
    /// input and its derivative in `s`.
    fn purchased_input(&self, s: f64) -> (f64, f64) {
        let one_m_xi = 1.0 - self.p.xi;
        let mu = s.exp();
        let price = self.price;
        let income = self.income;
        let k = price / mu;
        // G(y) = price·y + k·y^(1−ξ) − E is strictly increasing with a
        // unique root in (0, E/price).
        let mut lo = 0.0;
        let mut hi = income / price;
        let mut y = 0.5 * hi;
        for _ in 0..80 {
            let gy = price * y + k * y.powf(one_m_xi) - income;
            if gy > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            if gy.abs() < 1e-14 * income {
                break;
            }
            let slope = price + k * one_m_xi * y.powf(-self.p.xi);
            let mut next = y - gy / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= 1e-16 * y.abs() {
                y = next;
                break;
            }
            y = next;
        }
        let dy = k * y.powf(one_m_xi) / (price + k * one_m_xi * y.powf(-self.p.xi));
        (y, dy)
    }
}
