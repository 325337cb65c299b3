//! Simulation and verification of Bell/CHSH experiments.
//!
//! Local hidden-variable models run as actual sequences of trials. Their
//! statistics are compared against the CHSH bound both empirically and
//! exactly, through the at most sixteen classes of hidden variables a CHSH
//! experiment can distinguish. The crate also samples singlet-state trials,
//! decides GHZ constraint satisfiability, and decides joint-probability
//! existence for given statistics.
//!
//! | module | role |
//! |---|---|
//! | [`model`] | outcomes, settings, behaviors and the [`LhvModel`] contract |
//! | [`engine`] | trial runs, correlation estimates, class analysis, MI diagnostic |
//! | [`quantum`] | singlet correlations and sampling |
//! | [`ghz`] | GHZ constraints and exhaustive satisfiability |
//! | [`fine`] | joint-probability feasibility and CHSH facets |
//! | [`zoo`] | named hidden-variable models |
//! | [`report`] | JSON/CSV reports used by the command line |

// `!(x <= bound)` is how range checks here also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod fine;
pub mod ghz;
pub mod model;
pub mod quantum;
pub mod report;
pub mod rng;
pub mod scalar;
mod simplex;
pub mod zoo;

pub use engine::{
    chsh_statistic, class_frequencies, estimate_correlation, mi_diagnostic, run_experiment,
    theoretical_chsh, theoretical_correlations, ChshReport, ClassFrequencies, ClassWeights,
    RunOptions, Schedule, TrialLog,
};
pub use error::{Error, ModelError, Result};
pub use fine::{
    chsh_criterion, jp_feasible, jp_from_lhv, statistics_of, BehaviorStatistics, JointProbability,
};
pub use model::{
    behavior_of, Behavior, CorrelationTable, HiddenVariable, LhvModel, Outcome, Party, Setting,
    SettingIndex, SettingPair, TrialRecord,
};
pub use quantum::{quantum_chsh, singlet_correlation, AnglePair};
pub use scalar::{Rational, Scalar};
