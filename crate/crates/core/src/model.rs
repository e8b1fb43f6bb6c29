//! Model primitives: parameters, occupations, earnings schedules, and
//! per-spouse utility.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Occupation of one spouse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Occupation {
    Regular,
    NonRegular,
    NotWorking,
}

impl Occupation {
    /// All occupations in matrix order (regular, non-regular, not working).
    pub const ALL: [Occupation; 3] = [
        Occupation::Regular,
        Occupation::NonRegular,
        Occupation::NotWorking,
    ];

    /// Row/column index used by 3×3 tables.
    pub fn index(self) -> usize {
        match self {
            Occupation::Regular => 0,
            Occupation::NonRegular => 1,
            Occupation::NotWorking => 2,
        }
    }

    /// Short label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Occupation::Regular => "R",
            Occupation::NonRegular => "NR",
            Occupation::NotWorking => "NW",
        }
    }

    pub fn is_working(self) -> bool {
        self != Occupation::NotWorking
    }
}

/// Shape of the regular-job earnings schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WageSchedule {
    /// Earnings `a·h^(1+θ)` up to the full-time kink `h̄`, linear at the
    /// kink hourly rate `a·h̄^θ` beyond it.
    Kinked,
    /// Earnings `a·h̄^θ·h` at every hour level: the kink hourly rate paid
    /// proportionally, as when regular jobs become fully flexible.
    Linear,
}

/// Structural parameters.
///
/// Hours and time use live on a [0, 1] scale where 1 is the weekly time
/// endowment (100 hours); earnings are in ability units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Convexity of regular-job earnings in hours below the kink.
    pub theta: f64,
    /// Non-regular hourly wage as a fraction of the regular kink rate.
    pub psi: f64,
    /// Scale of the logit taste shocks over occupation pairs.
    pub eta: f64,
    /// Weight on the disutility of total (market + domestic) time.
    pub phi: f64,
    /// Curvature of time disutility: `φ·ℓ^(1+γ)/(1+γ)`.
    pub gamma: f64,
    /// CES exponent aggregating domestic inputs.
    pub xi: f64,
    /// Standard deviation of log ability (both spouses).
    pub sigma: f64,
    /// Correlation of spouses' log abilities.
    pub rho: f64,
    /// First Beta shape of the domestic-requirement distribution.
    pub alpha: f64,
    /// Second Beta shape of the domestic-requirement distribution.
    pub beta: f64,
    /// Utility penalty when the wife strictly out-earns the husband.
    pub delta: f64,
    /// Full-time kink of the regular schedule (0.40 = 40 h/week).
    pub hbar: f64,
    /// Minimum market hours in a regular job.
    pub hmin_regular: f64,
    /// Minimum market hours in a non-regular job.
    pub hmin_nonregular: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::calibrated()
    }
}

/// Validation failure for [`ModelParams`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("parameter `{name}` = {value} must be strictly positive")]
    NotPositive { name: &'static str, value: f64 },
    #[error("parameter `{name}` = {value} out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

impl ModelParams {
    /// The calibrated benchmark parameter point.
    pub fn calibrated() -> Self {
        ModelParams {
            theta: 2.62,
            psi: 0.59,
            eta: 0.17,
            phi: 12.00,
            gamma: 3.0,
            xi: 2.0 / 3.0,
            sigma: 0.64,
            rho: 0.53,
            alpha: 0.43,
            beta: 0.08,
            delta: 0.79,
            hbar: 0.40,
            hmin_regular: 0.20,
            hmin_nonregular: 0.10,
        }
    }

    /// Checks that every parameter lies in its admissible range.
    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            ("theta", self.theta),
            ("psi", self.psi),
            ("eta", self.eta),
            ("phi", self.phi),
            ("gamma", self.gamma),
            ("sigma", self.sigma),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(ParamError::OutOfRange {
                name: "delta",
                value: self.delta,
                reason: "must be non-negative",
            });
        }
        if !(self.psi <= 1.0) {
            return Err(ParamError::OutOfRange {
                name: "psi",
                value: self.psi,
                reason: "must not exceed 1 (discount on the regular rate)",
            });
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(ParamError::OutOfRange {
                name: "rho",
                value: self.rho,
                reason: "must lie strictly inside (-1, 1)",
            });
        }
        if !(self.xi > 0.0 && self.xi <= 1.0) {
            return Err(ParamError::OutOfRange {
                name: "xi",
                value: self.xi,
                reason: "must lie in (0, 1]",
            });
        }
        if !(self.hmin_nonregular > 0.0) {
            return Err(ParamError::NotPositive {
                name: "hmin_nonregular",
                value: self.hmin_nonregular,
            });
        }
        if !(self.hmin_regular >= self.hmin_nonregular) {
            return Err(ParamError::OutOfRange {
                name: "hmin_regular",
                value: self.hmin_regular,
                reason: "must be at least hmin_nonregular",
            });
        }
        if !(self.hbar >= self.hmin_regular && self.hbar <= 1.0) {
            return Err(ParamError::OutOfRange {
                name: "hbar",
                value: self.hbar,
                reason: "must lie in [hmin_regular, 1]",
            });
        }
        Ok(())
    }

    /// Hourly rate at the full-time kink for ability `a = 1`.
    pub fn kink_rate(&self) -> f64 {
        self.hbar.powf(self.theta)
    }

    /// Price of outsourced domestic services in the outsourcing scenario:
    /// the non-regular wage at unit ability, `ψ·h̄^θ`.
    pub fn default_outsourcing_price(&self) -> f64 {
        self.psi * self.kink_rate()
    }

    /// Earnings of a spouse with ability `a` working `h` in occupation
    /// `occ` under the given regular-job schedule.
    ///
    /// Below the occupation's hour minimum (and for anyone not working)
    /// earnings are zero.
    pub fn earnings(&self, occ: Occupation, schedule: WageSchedule, a: f64, h: f64) -> f64 {
        match occ {
            Occupation::NotWorking => 0.0,
            Occupation::Regular => {
                if h < self.hmin_regular - 1e-12 {
                    0.0
                } else {
                    match schedule {
                        WageSchedule::Kinked => {
                            if h <= self.hbar + 1e-12 {
                                a * h.powf(1.0 + self.theta)
                            } else {
                                a * self.kink_rate() * h
                            }
                        }
                        WageSchedule::Linear => a * self.kink_rate() * h,
                    }
                }
            }
            Occupation::NonRegular => {
                if h < self.hmin_nonregular - 1e-12 {
                    0.0
                } else {
                    self.psi * a * self.kink_rate() * h
                }
            }
        }
    }

    /// Per-spouse flow utility `log c − φ·ℓ^(1+γ)/(1+γ)`.
    ///
    /// Returns `-∞` for non-positive consumption, which the solver and
    /// the logit treat as a zero-probability choice.
    pub fn spouse_utility(&self, consumption: f64, total_time: f64) -> f64 {
        if consumption <= 0.0 {
            return f64::NEG_INFINITY;
        }
        consumption.ln() - self.phi * total_time.powf(1.0 + self.gamma) / (1.0 + self.gamma)
    }

    /// CES aggregate of domestic inputs, `(Σ dᵢ^ξ)^(1/ξ)`.
    pub fn ces_aggregate(&self, inputs: &[f64]) -> f64 {
        let s: f64 = inputs
            .iter()
            .map(|&d| if d > 0.0 { d.powf(self.xi) } else { 0.0 })
            .sum();
        if s > 0.0 {
            s.powf(1.0 / self.xi)
        } else {
            0.0
        }
    }
}
