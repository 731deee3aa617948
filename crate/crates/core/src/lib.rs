//! Rank-based inference for nonparametric relative treatment effects in
//! general factorial designs.
//!
//! The pipeline is: mid-ranks ([`ranks`]) → pairwise and unweighted relative
//! effects ([`effects`]) → rank-based covariance estimate of the effect
//! vector ([`covariance`]) → ANOVA-type / Wald-type tests and confidence
//! intervals ([`inference`]) for hypotheses built in [`contrasts`].
//! [`analysis::analyze`] runs the whole chain; [`simulation`] drives
//! Monte-Carlo studies of the tests.
//!
//! ```
//! use rankfx::{analysis, data::datasets};
//!
//! let data = datasets::leucocyte();
//! let report = analysis::analyze(&data, &analysis::AnalysisOptions::default()).unwrap();
//! assert_eq!(report.effects.len(), 4);
//! ```

pub mod analysis;
pub mod contrasts;
pub mod covariance;
pub mod data;
pub mod effects;
pub mod error;
pub mod inference;
pub mod io;
pub mod numerics;
pub mod ranks;
pub mod simulation;

pub use analysis::{analyze, AnalysisOptions, Report};
pub use contrasts::{HypothesisLabel, HypothesisSpec};
pub use covariance::CovarianceEstimate;
pub use data::{Dataset, Layout, Sample};
pub use effects::{EffectEstimates, PairwiseEffects};
pub use error::{Error, Result};
pub use inference::{ConfidenceInterval, Method, TestResult, Transform};
pub use numerics::linalg::Matrix;
pub use numerics::rng::RngStream;
