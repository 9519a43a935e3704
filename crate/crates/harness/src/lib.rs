//! Scenario catalog, Monte Carlo uniformity and coverage studies, and the `kacrice` CLI.
//!
//! ```no_run
//! use kacrice_harness::{find_scenario, sample_pvalues};
//!
//! let s = find_scenario("lasso-tall-desk").unwrap().with_replicates(500);
//! let res = sample_pvalues(&s).unwrap();
//! println!("KS p-value {}", res.ks_pvalue);
//! ```

pub mod cli;
pub mod config;
pub mod error;
pub mod noise;
pub mod scenario;
pub mod stats;
pub mod study;

pub use cli::run_cli;
pub use error::{HarnessError, Result};
pub use noise::Noise;
pub use scenario::{desk_scenarios, find_scenario, scenario_catalog, Family, Scenario};
pub use stats::{cov_test_baseline, ks_uniform};
pub use study::{coverage_experiment, sample_pvalues, Record, StudyResult};
