//! Targeted model selection for one-dimensional estimators.
//!
//! Given an ordered family of candidate estimators whose first member is an
//! asymptotically unbiased baseline, the crate estimates each candidate's
//! mean-squared error around that baseline, picks the minimizer of the
//! positive-part ("modified") risk criterion and forms bootstrap percentile
//! intervals for the selected estimate using a shortcut that reuses one
//! replicate matrix.
//!
//! The crate also ships three synthetic causal-inference scenarios
//! (limited-overlap observational data, an instrumental-variables setting
//! with an auxiliary incomplete sample, and an experiment with a binary proxy
//! outcome) together with a Monte Carlo harness comparing targeted selection
//! with K-fold cross-validation and with the baseline alone.
//!
//! ```
//! use tmsel_core::dgp::{gen_proxy, ScenarioConfig};
//! use tmsel_core::estimands::{Scenario, scenario_family, default_weights};
//! use tmsel_core::bootstrap::{ResamplePlan, select_ci_shortcut};
//!
//! let sample = gen_proxy(&ScenarioConfig::default_for(Scenario::Proxy, 0.2, 7)).unwrap();
//! let family = scenario_family(Scenario::Proxy, &default_weights(Scenario::Proxy)).unwrap();
//! let plan = ResamplePlan::seeded(200, 11);
//! let (selection, ci) = select_ci_shortcut(&family, &sample, &plan, 0.95).unwrap();
//! assert!(ci.lower <= ci.upper);
//! println!("selected {} -> {:.3}", selection.selected_label, selection.estimate);
//! ```

pub mod bootstrap;
pub mod dgp;
pub mod estimands;
pub mod experiments;
pub mod io;
pub mod normal;
pub mod plot;
pub mod rng;
pub mod selection;

mod par;

pub use bootstrap::{ConfidenceInterval, ReplicateMatrix, ResamplePlan};
pub use estimands::{CandidateFamily, Scenario, ScenarioSample};
pub use selection::{Criterion, RiskTable, SelectionResult, VarianceEstimates};
