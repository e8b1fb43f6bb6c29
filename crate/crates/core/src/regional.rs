//! Regional predictions from the penalty channel.
//!
//! Cross-region variation in a survey-based attitude score is linked to
//! the model through the share of couples where the wife out-earns the
//! husband: an OLS bridge maps that share to the score, and sweeping the
//! penalty δ traces out predicted score–gap pairs. Gap predictions are
//! the model's gaps at each δ plus a constant level adjustment pinned at
//! the calibrated penalty, so the curve passes through the national data
//! gaps at δ̂ by construction; the out-earning share enters the bridge
//! without any adjustment.

use std::path::Path;

use thiserror::Error;

use crate::counterfactual::Scenario;
use crate::model::ModelParams;
use crate::population::{simulate, Couple};
use crate::solver::SolverConfig;
use crate::stats::{compute_moments, gender_gaps, GapSet};

/// One prefecture's data row.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefectureRecord {
    pub prefecture: String,
    /// Attitude score (higher = stronger breadwinner norm).
    pub score: f64,
    pub gap_participation: f64,
    pub gap_occupation: f64,
    pub gap_hours: f64,
    pub gap_wage: f64,
    pub share_wife_outearns: f64,
}

/// Problems with regional inputs or the bridge regression.
#[derive(Debug, Error)]
pub enum RegionalError {
    #[error("cannot read prefecture file `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("prefecture file `{path}`: {message}")]
    Format { path: String, message: String },
    #[error("bridge regression is degenerate: {reason}")]
    Degenerate { reason: String },
    #[error("model gaps undefined at the calibrated penalty")]
    UndefinedGaps,
}

const PREFECTURE_HEADERS: [&str; 7] = [
    "prefecture",
    "score",
    "gap_participation",
    "gap_occupation",
    "gap_hours",
    "gap_wage",
    "share_wife_outearns",
];

/// Reads the prefecture CSV (exact headers:
/// `prefecture,score,gap_participation,gap_occupation,gap_hours,gap_wage,share_wife_outearns`).
pub fn read_prefecture_csv(path: &Path) -> Result<Vec<PrefectureRecord>, RegionalError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => RegionalError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => RegionalError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        },
    })?;
    let format_err = |message: String| RegionalError::Format {
        path: path.display().to_string(),
        message,
    };

    let headers = reader
        .headers()
        .map_err(|e| format_err(e.to_string()))?
        .clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != PREFECTURE_HEADERS {
        return Err(format_err(format!(
            "expected headers `{}`, got `{}`",
            PREFECTURE_HEADERS.join(","),
            got.join(",")
        )));
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| format_err(e.to_string()))?;
        let field = |k: usize| -> Result<f64, RegionalError> {
            row.get(k)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| {
                    format_err(format!(
                        "row {}: bad numeric value `{}` in column `{}`",
                        i + 2,
                        row.get(k).unwrap_or(""),
                        PREFECTURE_HEADERS[k]
                    ))
                })
        };
        records.push(PrefectureRecord {
            prefecture: row.get(0).unwrap_or("").trim().to_string(),
            score: field(1)?,
            gap_participation: field(2)?,
            gap_occupation: field(3)?,
            gap_hours: field(4)?,
            gap_wage: field(5)?,
            share_wife_outearns: field(6)?,
        });
    }
    Ok(records)
}

/// OLS line mapping the out-earning share to the attitude score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeFit {
    pub intercept: f64,
    pub slope: f64,
    /// Root-mean-square residual of the fitted scores.
    pub rms_residual: f64,
}

impl BridgeFit {
    pub fn predict(&self, share: f64) -> f64 {
        self.intercept + self.slope * share
    }
}

/// Regresses score on out-earning share across prefectures.
pub fn ols_bridge(records: &[PrefectureRecord]) -> Result<BridgeFit, RegionalError> {
    if records.len() < 2 {
        return Err(RegionalError::Degenerate {
            reason: format!("need at least two prefectures, got {}", records.len()),
        });
    }
    let n = records.len() as f64;
    let mean_x = records.iter().map(|r| r.share_wife_outearns).sum::<f64>() / n;
    let mean_y = records.iter().map(|r| r.score).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for r in records {
        let dx = r.share_wife_outearns - mean_x;
        sxx += dx * dx;
        sxy += dx * (r.score - mean_y);
    }
    if sxx <= 1e-14 {
        return Err(RegionalError::Degenerate {
            reason: "all prefectures have the same out-earning share".to_string(),
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mss = records
        .iter()
        .map(|r| {
            let e = r.score - (intercept + slope * r.share_wife_outearns);
            e * e
        })
        .sum::<f64>()
        / n;
    Ok(BridgeFit {
        intercept,
        slope,
        rms_residual: mss.sqrt(),
    })
}

/// Constant added to model gaps so the prediction curve reproduces the
/// national data gaps at the calibrated penalty.
pub fn level_adjustment(
    data_national: &[f64; 4],
    model_at_delta_hat: &GapSet,
) -> Result<[f64; 4], RegionalError> {
    let model = model_at_delta_hat.as_array();
    let mut g0 = [0.0; 4];
    for i in 0..4 {
        let m = model[i].ok_or(RegionalError::UndefinedGaps)?;
        g0[i] = data_national[i] - m;
    }
    Ok(g0)
}

/// One δ point of the prediction curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub delta: f64,
    pub score_hat: f64,
    /// Level-adjusted gaps: participation, occupation, hours, wage.
    pub gaps_hat: [f64; 4],
}

/// Evenly spaced penalty grid for regional predictions: 21 points from
/// 0 to 2·δ̂ (so the calibrated penalty is the midpoint).
pub fn default_regional_grid(delta_hat: f64) -> Vec<f64> {
    crate::counterfactual::delta_grid(delta_hat, 21, 2.0)
}

/// Sweeps δ and maps each point to a predicted score and adjusted gaps.
pub fn prediction_curve(
    p: &ModelParams,
    couples: &[Couple],
    grid: &[f64],
    bridge: &BridgeFit,
    g0: &[f64; 4],
    cfg: &SolverConfig,
) -> Result<Vec<CurvePoint>, RegionalError> {
    let mut out = Vec::with_capacity(grid.len());
    for &delta in grid {
        let scenario = Scenario::baseline().with_delta(delta);
        let pop = simulate(p, couples, &scenario, cfg);
        let share = compute_moments(&pop)
            .share_wife_outearns
            .ok_or(RegionalError::UndefinedGaps)?;
        let gaps = gender_gaps(&pop);
        let raw = gaps.as_array();
        let mut gaps_hat = [0.0; 4];
        for i in 0..4 {
            gaps_hat[i] = raw[i].ok_or(RegionalError::UndefinedGaps)? + g0[i];
        }
        out.push(CurvePoint {
            delta,
            score_hat: bridge.predict(share),
            gaps_hat,
        });
    }
    Ok(out)
}

/// Per-gap OLS line of the prefecture gap on the attitude score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapScoreFit {
    pub intercept: f64,
    pub slope: f64,
}

impl GapScoreFit {
    pub fn predict(&self, score: f64) -> f64 {
        self.intercept + self.slope * score
    }
}

fn ols_line(points: &[(f64, f64)]) -> Result<GapScoreFit, RegionalError> {
    if points.len() < 2 {
        return Err(RegionalError::Degenerate {
            reason: format!("need at least two prefectures, got {}", points.len()),
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx <= 1e-14 {
        return Err(RegionalError::Degenerate {
            reason: "all prefectures have the same score".to_string(),
        });
    }
    let slope = sxy / sxx;
    Ok(GapScoreFit {
        intercept: mean_y - slope * mean_x,
        slope,
    })
}

/// Fits each of the four gaps on the score across prefectures.
pub fn data_gap_fits(records: &[PrefectureRecord]) -> Result<[GapScoreFit; 4], RegionalError> {
    let col = |f: fn(&PrefectureRecord) -> f64| -> Vec<(f64, f64)> {
        records.iter().map(|r| (r.score, f(r))).collect()
    };
    Ok([
        ols_line(&col(|r| r.gap_participation))?,
        ols_line(&col(|r| r.gap_occupation))?,
        ols_line(&col(|r| r.gap_hours))?,
        ols_line(&col(|r| r.gap_wage))?,
    ])
}

/// One row of the model-curve vs. data-fit pairing: the data fits are
/// evaluated at the model's predicted score, or absent when that score
/// falls outside the range observed in the prefecture data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub delta: f64,
    pub score_hat: f64,
    pub model: [f64; 4],
    pub data_fit: Option<[f64; 4]>,
}

/// Paired series plus per-gap RMS distance over the common score range.
#[derive(Debug, Clone)]
pub struct CurveComparison {
    pub rows: Vec<ComparisonRow>,
    pub rms: [Option<f64>; 4],
}

/// Pairs each curve point with the prefecture-data OLS fits at the same
/// score and summarizes the distance as a per-gap RMS, using only curve
/// points whose predicted score lies inside the data's score range.
pub fn compare_curve_to_fit(
    curve: &[CurvePoint],
    records: &[PrefectureRecord],
) -> Result<CurveComparison, RegionalError> {
    let fits = data_gap_fits(records)?;
    let lo = records.iter().map(|r| r.score).fold(f64::INFINITY, f64::min);
    let hi = records
        .iter()
        .map(|r| r.score)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut rows = Vec::with_capacity(curve.len());
    let mut sq = [0.0; 4];
    let mut count = 0usize;
    for p in curve {
        let in_range = p.score_hat >= lo && p.score_hat <= hi;
        let data_fit = in_range.then(|| {
            let mut g = [0.0; 4];
            for i in 0..4 {
                g[i] = fits[i].predict(p.score_hat);
            }
            g
        });
        if let Some(g) = data_fit {
            for i in 0..4 {
                let e = p.gaps_hat[i] - g[i];
                sq[i] += e * e;
            }
            count += 1;
        }
        rows.push(ComparisonRow {
            delta: p.delta,
            score_hat: p.score_hat,
            model: p.gaps_hat,
            data_fit,
        });
    }
    let rms = if count == 0 {
        [None; 4]
    } else {
        sq.map(|s| Some((s / count as f64).sqrt()))
    };
    Ok(CurveComparison { rows, rms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn record(share: f64, score: f64) -> PrefectureRecord {
        PrefectureRecord {
            prefecture: "x".into(),
            score,
            gap_participation: 0.1,
            gap_occupation: 0.5,
            gap_hours: 0.4,
            gap_wage: 0.7,
            share_wife_outearns: share,
        }
    }

    #[test]
    fn two_point_bridge_is_exact() {
        let fit = ols_bridge(&[record(0.05, 3.0), record(0.10, 2.0)]).unwrap();
        assert_relative_eq!(fit.slope, -20.0, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 4.0, max_relative = 1e-12);
        assert_relative_eq!(fit.rms_residual, 0.0, epsilon = 1e-12);
        assert_relative_eq!(fit.predict(0.075), 2.5, max_relative = 1e-12);
    }

    #[test]
    fn duplicated_records_leave_the_bridge_unchanged() {
        let base = vec![record(0.04, 3.2), record(0.08, 2.6), record(0.11, 2.1)];
        let mut doubled = base.clone();
        doubled.extend(base.iter().cloned());
        let a = ols_bridge(&base).unwrap();
        let b = ols_bridge(&doubled).unwrap();
        assert_relative_eq!(a.slope, b.slope, max_relative = 1e-12);
        assert_relative_eq!(a.intercept, b.intercept, max_relative = 1e-12);
    }

    #[test]
    fn curve_comparison_pairs_model_and_data_fit() {
        let recs = vec![
            PrefectureRecord {
                prefecture: "a".into(),
                score: 2.0,
                gap_participation: 0.10,
                gap_occupation: 0.40,
                gap_hours: 0.30,
                gap_wage: 0.60,
                share_wife_outearns: 0.10,
            },
            PrefectureRecord {
                prefecture: "b".into(),
                score: 3.0,
                gap_participation: 0.20,
                gap_occupation: 0.60,
                gap_hours: 0.50,
                gap_wage: 0.80,
                share_wife_outearns: 0.05,
            },
        ];
        let curve = vec![
            CurvePoint {
                delta: 0.4,
                score_hat: 2.5,
                gaps_hat: [0.15, 0.50, 0.40, 0.70],
            },
            CurvePoint {
                delta: 0.8,
                score_hat: 9.0,
                gaps_hat: [0.2, 0.6, 0.5, 0.8],
            },
        ];
        let cmp = compare_curve_to_fit(&curve, &recs).unwrap();
        // First point: data fits at score 2.5 interpolate the two
        // prefectures exactly, matching the model values here.
        let fit = cmp.rows[0].data_fit.unwrap();
        assert_relative_eq!(fit[0], 0.15, epsilon = 1e-12);
        assert_relative_eq!(fit[3], 0.70, epsilon = 1e-12);
        // Second point falls outside the observed score range.
        assert!(cmp.rows[1].data_fit.is_none());
        for r in cmp.rms {
            assert_relative_eq!(r.unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_bridge_is_an_explicit_error() {
        assert!(matches!(
            ols_bridge(&[record(0.07, 3.0), record(0.07, 2.0)]),
            Err(RegionalError::Degenerate { .. })
        ));
        assert!(matches!(
            ols_bridge(&[record(0.07, 3.0)]),
            Err(RegionalError::Degenerate { .. })
        ));
    }

    #[test]
    fn level_adjustment_offsets_model_gaps() {
        let model = GapSet {
            participation: Some(0.34),
            occupation: Some(0.62),
            hours: Some(0.77),
            wage: Some(0.37),
        };
        let g0 = level_adjustment(&[0.16, 0.53, 0.49, 0.76], &model).unwrap();
        assert_relative_eq!(g0[0], -0.18, epsilon = 1e-12);
        assert_relative_eq!(g0[1], -0.09, epsilon = 1e-12);
        assert_relative_eq!(g0[2], -0.28, epsilon = 1e-12);
        assert_relative_eq!(g0[3], 0.39, epsilon = 1e-12);
    }

    #[test]
    fn regional_grid_centers_on_the_calibrated_penalty() {
        let g = default_regional_grid(0.79);
        assert_eq!(g.len(), 21);
        assert_relative_eq!(g[0], 0.0);
        assert_relative_eq!(g[10], 0.79, max_relative = 1e-12);
        assert_relative_eq!(g[20], 1.58, max_relative = 1e-12);
    }

    #[test]
    fn prefecture_csv_round_trip_and_header_check() {
        let dir = std::env::temp_dir().join("bw_regional_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("prefs.csv");
        std::fs::write(
            &path,
            "prefecture,score,gap_participation,gap_occupation,gap_hours,gap_wage,share_wife_outearns\n\
             north,3.1,0.15,0.50,0.45,0.70,0.05\n\
             south,2.4,0.12,0.42,0.40,0.66,0.09\n",
        )
        .unwrap();
        let recs = read_prefecture_csv(&path).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].prefecture, "north");
        assert_relative_eq!(recs[1].share_wife_outearns, 0.09);

        std::fs::write(&path, "prefecture,score\nnorth,3.1\n").unwrap();
        assert!(matches!(
            read_prefecture_csv(&path),
            Err(RegionalError::Format { .. })
        ));
    }
}
