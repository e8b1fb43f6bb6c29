//! Deterministic text/CSV rendering of simulation outputs.
//!
//! All numbers go through one formatter (six significant digits, plain
//! decimal notation) so that repeated runs with the same inputs produce
//! byte-identical files.

use crate::calibration::CalibrationResult;
use crate::counterfactual::ScenarioSweep;
use crate::model::{ModelParams, Occupation};
use crate::regional::CurvePoint;
use crate::stats::{GapSet, HoursTable, MomentSet, RelativeEarningsDensity};

/// Formats with six significant digits in plain decimal notation.
///
/// Values that round to zero print as `0`; undefined values print as an
/// empty field so CSV consumers see a missing cell rather than NaN.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Trim trailing zeros (and a dangling point) so 0.400000 prints as 0.4.
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        let t = if t == "-0" { "0" } else { t };
        t.to_string()
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// `name,value` rows for the nine calibration moments.
pub fn moments_csv(m: &MomentSet) -> String {
    let mut out = String::from("moment,value\n");
    for (name, value) in MomentSet::NAMES.iter().zip(m.as_array()) {
        out.push_str(name);
        out.push(',');
        out.push_str(&fmt_opt(value));
        out.push('\n');
    }
    out
}

/// Husband-by-wife occupation shares, one row per husband occupation.
pub fn matrix_csv(matrix: &[[f64; 3]; 3]) -> String {
    let mut out = String::from("husband,wife_r,wife_nr,wife_nw\n");
    for (i, occ) in Occupation::ALL.iter().enumerate() {
        out.push_str(occ.label());
        for j in 0..3 {
            out.push(',');
            out.push_str(&fmt_sig(matrix[i][j]));
        }
        out.push('\n');
    }
    out
}

/// Weekly market/domestic hours by couple type.
pub fn hours_csv(table: &HoursTable) -> String {
    let mut out = String::from("husband,wife,market_m,market_f,domestic_m,domestic_f\n");
    for (jm, jf, cell) in &table.rows {
        out.push_str(jm.label());
        out.push(',');
        out.push_str(jf.label());
        match cell {
            Some(c) => {
                for v in [c.h_m, c.h_f, c.d_m, c.d_f] {
                    out.push(',');
                    out.push_str(&fmt_sig(v));
                }
            }
            None => out.push_str(",,,,"),
        }
        out.push('\n');
    }
    out
}

/// `gap,value` rows for the four gender gaps.
pub fn gaps_csv(g: &GapSet) -> String {
    let mut out = String::from("gap,value\n");
    for (name, value) in GapSet::NAMES.iter().zip(g.as_array()) {
        out.push_str(name);
        out.push(',');
        out.push_str(&fmt_opt(value));
        out.push('\n');
    }
    out
}

/// Histogram of the wife's share of couple earnings among dual earners.
/// The point mass at exactly one half gets its own row.
pub fn density_csv(d: &RelativeEarningsDensity) -> String {
    let mut out = String::from("bin_start,bin_end,mass\n");
    for (k, mass) in d.bins.iter().enumerate() {
        let lo = k as f64 * d.bin_width;
        let hi = lo + d.bin_width;
        out.push_str(&fmt_sig(lo));
        out.push(',');
        out.push_str(&fmt_sig(hi));
        out.push(',');
        out.push_str(&fmt_sig(*mass));
        out.push('\n');
    }
    out.push_str("0.5,0.5,");
    out.push_str(&fmt_sig(d.atom_at_half));
    out.push('\n');
    out
}

/// Long-format sweep output: one row per (scenario, δ, gap) triple.
pub fn sweep_csv(sweeps: &[ScenarioSweep]) -> String {
    let mut out = String::from("scenario,delta,gap,value\n");
    for sweep in sweeps {
        for p in &sweep.points {
            for (name, value) in GapSet::NAMES.iter().zip(p.gaps.as_array()) {
                out.push_str(&sweep.mode.to_string());
                out.push(',');
                out.push_str(&fmt_sig(p.delta));
                out.push(',');
                out.push_str(name);
                out.push(',');
                out.push_str(&fmt_opt(value));
                out.push('\n');
            }
        }
    }
    out
}

/// Occupation-share matrices of several scenarios stacked into one
/// table, one three-row panel per scenario.
pub fn occupation_panels_csv(panels: &[(String, [[f64; 3]; 3])]) -> String {
    let mut out = String::from("scenario,husband,wife_r,wife_nr,wife_nw\n");
    for (name, matrix) in panels {
        for (i, occ) in Occupation::ALL.iter().enumerate() {
            out.push_str(name);
            out.push(',');
            out.push_str(occ.label());
            for j in 0..3 {
                out.push(',');
                out.push_str(&fmt_sig(matrix[i][j]));
            }
            out.push('\n');
        }
    }
    out
}

/// The score-on-share regression behind regional predictions.
pub fn bridge_csv(fit: &crate::regional::BridgeFit) -> String {
    let mut out = String::from("intercept,slope,rms_residual\n");
    out.push_str(&fmt_sig(fit.intercept));
    out.push(',');
    out.push_str(&fmt_sig(fit.slope));
    out.push(',');
    out.push_str(&fmt_sig(fit.rms_residual));
    out.push('\n');
    out
}

/// Per-gap level offsets that anchor the model curve to national data.
pub fn offsets_csv(g0: &[f64; 4]) -> String {
    let mut out = String::from("gap,offset\n");
    for (name, v) in GapSet::NAMES.iter().zip(g0) {
        out.push_str(name);
        out.push(',');
        out.push_str(&fmt_sig(*v));
        out.push('\n');
    }
    out
}

/// Calibrated parameter values, one `name,value` row each.
pub fn params_csv(p: &ModelParams) -> String {
    let rows = [
        ("theta", p.theta),
        ("psi", p.psi),
        ("eta", p.eta),
        ("phi", p.phi),
        ("gamma", p.gamma),
        ("xi", p.xi),
        ("sigma", p.sigma),
        ("rho", p.rho),
        ("alpha", p.alpha),
        ("beta", p.beta),
        ("delta", p.delta),
        ("hbar", p.hbar),
        ("hmin_regular", p.hmin_regular),
        ("hmin_nonregular", p.hmin_nonregular),
    ];
    let mut out = String::from("parameter,value\n");
    for (name, value) in rows {
        out.push_str(name);
        out.push(',');
        out.push_str(&fmt_sig(value));
        out.push('\n');
    }
    out
}

/// Objective improvements over the calibration run.
pub fn trace_csv(result: &CalibrationResult) -> String {
    let mut out = String::from("eval,objective\n");
    for t in &result.trace {
        out.push_str(&t.eval.to_string());
        out.push(',');
        out.push_str(&fmt_sig(t.objective));
        out.push('\n');
    }
    out
}

/// Model-curve vs. prefecture-data-fit pairing, long format. The data
/// fit column is empty where the model's score leaves the data range.
pub fn comparison_csv(cmp: &crate::regional::CurveComparison) -> String {
    let mut out = String::from("delta,score_hat,gap,model_hat,data_fit\n");
    for row in &cmp.rows {
        for (i, name) in GapSet::NAMES.iter().enumerate() {
            out.push_str(&fmt_sig(row.delta));
            out.push(',');
            out.push_str(&fmt_sig(row.score_hat));
            out.push(',');
            out.push_str(name);
            out.push(',');
            out.push_str(&fmt_sig(row.model[i]));
            out.push(',');
            out.push_str(&fmt_opt(row.data_fit.map(|g| g[i])));
            out.push('\n');
        }
    }
    out
}

/// Per-gap RMS distance between the model curve and the data fit.
pub fn comparison_rms_csv(cmp: &crate::regional::CurveComparison) -> String {
    let mut out = String::from("gap,rms\n");
    for (name, rms) in GapSet::NAMES.iter().zip(cmp.rms) {
        out.push_str(name);
        out.push(',');
        out.push_str(&fmt_opt(rms));
        out.push('\n');
    }
    out
}

/// Regional prediction curve rows.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(
        "delta,score_hat,gap_participation_hat,gap_occupation_hat,gap_hours_hat,gap_wage_hat\n",
    );
    for p in points {
        out.push_str(&fmt_sig(p.delta));
        out.push(',');
        out.push_str(&fmt_sig(p.score_hat));
        for g in p.gaps_hat {
            out.push(',');
            out.push_str(&fmt_sig(g));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits_plain_decimal() {
        assert_eq!(fmt_sig(0.4), "0.4");
        assert_eq!(fmt_sig(0.123456789), "0.123457");
        assert_eq!(fmt_sig(123456.789), "123457");
        assert_eq!(fmt_sig(-0.0000123456789), "-0.0000123457");
        assert_eq!(fmt_sig(2.62), "2.62");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(1e-9), "0.000000001");
        assert_eq!(fmt_sig(f64::NAN), "");
    }

    #[test]
    fn rounding_does_not_leave_trailing_zeros() {
        assert_eq!(fmt_sig(0.100000000001), "0.1");
        assert_eq!(fmt_sig(12.0), "12");
        assert_eq!(fmt_sig(0.999999449), "0.999999");
        assert_eq!(fmt_sig(0.9999999), "1");
    }

    #[test]
    fn matrix_csv_layout() {
        let m = [[0.2, 0.3, 0.3], [0.04, 0.03, 0.01], [0.04, 0.0, 0.0]];
        let s = matrix_csv(&m);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "husband,wife_r,wife_nr,wife_nw");
        assert_eq!(lines[1], "R,0.2,0.3,0.3");
        assert_eq!(lines[3], "NW,0.04,0,0");
    }

    #[test]
    fn panels_csv_stacks_scenarios() {
        let m = [[0.4, 0.2, 0.2], [0.1, 0.05, 0.02], [0.03, 0.0, 0.0]];
        let s = occupation_panels_csv(&[("baseline".into(), m), ("flexible".into(), m)]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "scenario,husband,wife_r,wife_nr,wife_nw");
        assert_eq!(lines[1], "baseline,R,0.4,0.2,0.2");
        assert_eq!(lines[4], "flexible,R,0.4,0.2,0.2");
    }

    #[test]
    fn sweep_csv_is_long_format() {
        use crate::counterfactual::{ScenarioMode, SweepPoint};
        use crate::stats::GapSet;
        let sweeps = vec![ScenarioSweep {
            mode: ScenarioMode::Baseline,
            points: vec![SweepPoint {
                delta: 0.5,
                gaps: GapSet {
                    participation: Some(0.1),
                    occupation: Some(0.2),
                    hours: None,
                    wage: Some(0.4),
                },
            }],
        }];
        let s = sweep_csv(&sweeps);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "baseline,0.5,gap_participation,0.1");
        assert_eq!(lines[3], "baseline,0.5,gap_hours,");
    }
}
