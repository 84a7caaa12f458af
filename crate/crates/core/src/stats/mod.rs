//! One-way ANOVA, the studentized range distribution and Tukey HSD.
//!
//! The analyses assume independent, normally distributed observations with
//! equal group variances; no assumption checks are performed.

mod anova;
mod ptukey;
mod special;
mod tukey;

pub use anova::{anova, AnovaResult, Degeneracy};
pub use ptukey::{ptukey, range_cdf};
pub use special::{f_upper_tail, ln_beta, normal_cdf, regularized_incomplete_beta};
pub use tukey::{tukey_hsd, tukey_hsd_from_anova, TukeyPair};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {group} has {size} observation(s), need at least 2")]
    TooFewObservations { group: usize, size: usize },
    #[error("non-finite observation in group {0}")]
    NonFinite(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("significance level {0} is outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("continued fraction did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("quadrature did not reach tolerance {tolerance} (last change {change})")]
    QuadratureNonConvergence { tolerance: f64, change: f64 },
}
