//! Structural model of married couples' joint labor supply.
//!
//! Each spouse works in one of three occupations — regular employment,
//! non-regular employment, or not working — and the couple additionally
//! splits a fixed home-production requirement between unpaid domestic
//! hours of the two spouses (and, in one counterfactual, purchased
//! services). Regular jobs pay a convex hourly schedule up to a full-time
//! kink, non-regular jobs pay a discounted linear wage, and the household
//! suffers a fixed utility penalty whenever the wife out-earns the
//! husband. Couples differ in correlated log-normal abilities and in a
//! Beta-distributed domestic requirement; occupation pairs are chosen by
//! a logit over the nine pair values, with hours and the domestic split
//! solved exactly inside each pair.
//!
//! The crate provides the model primitives ([`model`]), the per-couple
//! solver ([`solver`]), population simulation ([`population`]), summary
//! statistics ([`stats`]), moment-matching calibration ([`calibration`]),
//! counterfactual scenarios ([`counterfactual`]), regional predictions
//! ([`regional`]), and fixed-format CSV reporting ([`report`]).

pub mod calibration;
pub mod counterfactual;
pub mod model;
pub mod nelder_mead;
pub mod population;
pub mod regional;
pub mod report;
pub mod solver;
pub mod stats;

pub use model::{ModelParams, Occupation, ParamError, WageSchedule};
pub use population::{Couple, PopulationConfig, SimulatedPopulation};
pub use solver::{Allocation, CoupleSolution, SolverConfig};

/// Hours are measured as a fraction of the weekly time endowment; this
/// converts back to hours per week for reporting.
pub const WEEKLY_HOURS: f64 = 100.0;
