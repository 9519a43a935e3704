//! Exact Kac-Rice tests of the global null in penalized regression.
//!
//! The crate covers the lasso, the group lasso and nuclear-norm problems. Each
//! penalty frontend produces the first knot `λ1`, the truncation limits `V−, V+`,
//! the variance of the selected statistic and the curvature eigenvalues; the
//! pivot kernel turns those into a p-value that is exactly uniform under the null,
//! or into a selection interval for the mean of the statistic.

pub mod error;
pub mod fracsolve;
pub mod geometry;
pub mod group;
pub mod io;
pub mod lasso;
pub mod linalg;
pub mod model;
pub mod nuclear;
pub mod pipeline;
pub mod pivot;
pub mod special;

pub use error::{Error, Result};
pub use model::{Covariance, GroupSpec, KnotCertificate, NuclearOp, NuclearSpec, PenaltySpec, Problem, Response};
pub use pipeline::{analyze, analyze_prepared, interval, lambda_one, prepare, pvalue, Analysis};
pub use pivot::{selection_interval, survival_pivot, PivotInputs, PivotResult};
