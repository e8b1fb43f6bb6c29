//! Reference inner solvers for the domestic-hours problem, built on
//! golden-section search in transformed coordinates.
//!
//! Substituting `z = d^ξ` turns the CES requirement into a linear
//! constraint and makes both inner objectives concave over a convex
//! domain, so one-dimensional (and nested) golden-section search is
//! provably safe.

use breadwinner_core::ModelParams;

const INVPHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal function on `[lo, hi]`; returns (argmax, max).
/// Endpoint and midpoint evaluations guard against degenerate brackets.
pub fn golden_max(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    if !(hi > lo) {
        return (lo, f(lo));
    }
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INVPHI * (b - a);
    let mut x2 = a + INVPHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..iters {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INVPHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INVPHI * (b - a);
            f2 = f(x2);
        }
        if f1 > best.1 {
            best = (x1, f1);
        }
        if f2 > best.1 {
            best = (x2, f2);
        }
    }
    for x in [lo, 0.5 * (a + b), hi] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Average-per-spouse household utility at a fully specified point.
fn household_utility(p: &ModelParams, c: f64, ell_m: f64, ell_f: f64) -> f64 {
    if c <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let pow = 1.0 + p.gamma;
    c.ln() - p.phi / (2.0 * pow) * (ell_m.powf(pow) + ell_f.powf(pow))
}

fn zpow(z: f64, inv_xi: f64) -> f64 {
    if z > 0.0 {
        z.powf(inv_xi)
    } else {
        0.0
    }
}

/// Best household utility over the spouses' domestic split when the
/// requirement must be met in-house: spends golden search on
/// `z_m = d_m^ξ` with `d_f` pinned by the constraint.
pub fn baseline_inner(
    p: &ModelParams,
    h_m: f64,
    h_f: f64,
    d_req: f64,
    income: f64,
    iters: usize,
) -> f64 {
    if income <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let c = 0.5 * income;
    let q = d_req.powf(p.xi);
    let inv_xi = 1.0 / p.xi;
    let cap_m = (1.0 - h_m).max(0.0);
    let cap_f = (1.0 - h_f).max(0.0);
    let zcap_m = cap_m.powf(p.xi);
    let zcap_f = cap_f.powf(p.xi);
    if zcap_m + zcap_f + 1e-12 < q {
        return f64::NEG_INFINITY;
    }
    let lo = (q - zcap_f).max(0.0);
    let hi = zcap_m.min(q);
    let mut value = |z_m: f64| {
        let d_m = zpow(z_m, inv_xi);
        let d_f = zpow(q - z_m, inv_xi);
        if d_f > cap_f + 1e-9 {
            return f64::NEG_INFINITY;
        }
        household_utility(p, c, h_m + d_m, h_f + d_f)
    };
    golden_max(&mut value, lo, hi, iters).1
}

/// Best household utility when the remainder of the requirement can be
/// bought at `price`: nested golden search over `(z_m, z_f)` with
/// `d_buy` taken from the CES remainder and paid out of income.
pub fn outsourced_inner(
    p: &ModelParams,
    h_m: f64,
    h_f: f64,
    d_req: f64,
    income: f64,
    price: f64,
    iters: usize,
) -> f64 {
    if income <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let q = d_req.powf(p.xi);
    let inv_xi = 1.0 / p.xi;
    let cap_m = (1.0 - h_m).max(0.0);
    let cap_f = (1.0 - h_f).max(0.0);
    let zcap_m = cap_m.powf(p.xi).min(q);
    let zcap_f = cap_f.powf(p.xi).min(q);

    let mut outer = |z_m: f64| {
        let d_m = zpow(z_m, inv_xi);
        let mut inner = |z_f: f64| {
            let d_f = zpow(z_f, inv_xi);
            let d_buy = zpow(q - z_m - z_f, inv_xi);
            let c = 0.5 * (income - price * d_buy);
            household_utility(p, c, h_m + d_m, h_f + d_f)
        };
        golden_max(&mut inner, 0.0, zcap_f.min(q - z_m), iters).1
    };
    golden_max(&mut outer, 0.0, zcap_m, iters).1
}
