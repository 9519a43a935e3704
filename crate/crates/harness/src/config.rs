//! Scenario files: a penalty config plus simulation keys.
//!
//! ```toml
//! id = "my-study"
//! kind = "group"
//! groups = [[0, 1], [2, 3, 4]]
//! weights = [1.4, 1.7]
//! design = "X.csv"          # relative to the config file
//! noise = "heavy-tail"      # or "gaussian"
//! sigma2 = 1.0
//! replicates = 500
//! seed = 7
//! beta0 = [0, 0, 2, 0, 0]   # optional, defaults to the global null
//! ```
//!
//! Nuclear scenarios use `op_kind`, `mask` and `shape` as in the penalty config;
//! `shape` is the coefficient shape and is required.

use std::path::{Path, PathBuf};

use kacrice::io::{read_matrix, PenaltyConfig};
use kacrice::{Covariance, PenaltySpec, Problem, Response};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{HarnessError, Result};
use crate::noise::Noise;
use crate::scenario::{Recipe, Scenario, DEFAULT_REPLICATES, DEFAULT_SEED};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: Option<String>,
    pub kind: String,
    pub groups: Option<Vec<Vec<usize>>>,
    pub weights: Option<Vec<f64>>,
    pub op_kind: Option<String>,
    pub mask: Option<Vec<(usize, usize)>>,
    pub shape: Option<(usize, usize)>,
    pub design: Option<PathBuf>,
    pub noise: Option<String>,
    pub sigma2: Option<f64>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub beta0: Option<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::InvalidScenario(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)?.into_scenario(path.parent().unwrap_or(Path::new(".")))
    }

    /// Builds the scenario; relative design paths resolve against `base`.
    pub fn into_scenario(self, base: &Path) -> Result<Scenario> {
        let sigma2 = self.sigma2.unwrap_or(1.0);
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(HarnessError::InvalidScenario(format!("sigma2 = {sigma2} is not positive")));
        }
        let noise = match self.noise.as_deref() {
            None => Noise::Gaussian,
            Some(s) => Noise::parse(s).ok_or_else(|| HarnessError::InvalidScenario(format!("unknown noise {s:?}")))?,
        };
        let design = match &self.design {
            Some(p) => Some(read_matrix(&base.join(p))?),
            None => None,
        };
        let penalty_cfg = PenaltyConfig {
            kind: self.kind.clone(),
            groups: self.groups.clone(),
            weights: self.weights.clone(),
            op_kind: self.op_kind.clone(),
            mask: self.mask.clone(),
            shape: self.shape,
        };
        let shape = self.shape.unwrap_or((0, 0));
        let penalty = penalty_cfg.to_spec(design.as_ref(), shape)?;
        let problem = match &penalty {
            PenaltySpec::Nuclear(spec) => {
                if self.shape.is_none() {
                    return Err(HarnessError::InvalidScenario("nuclear scenarios need a shape".into()));
                }
                let (m, p) = spec.output_shape();
                Problem::nuclear(spec.op.clone(), spec.shape, DMatrix::zeros(m, p), sigma2)
            }
            _ => {
                let x = design.ok_or_else(|| HarnessError::InvalidScenario("missing design".into()))?;
                let n = x.nrows();
                Problem {
                    design: Some(x),
                    response: Response::Vector(DVector::zeros(n)),
                    covariance: Covariance::Scaled(sigma2),
                    penalty,
                    cperp_basis: None,
                }
            }
        };
        let problem = problem.validate()?;
        Ok(Scenario {
            id: self.id.unwrap_or_else(|| "custom".into()),
            recipe: Recipe::Fixed(Box::new(problem)),
            noise,
            sigma2,
            beta0: self.beta0.map(DVector::from_vec),
            replicates: self.replicates.unwrap_or(DEFAULT_REPLICATES),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            surrogate: false,
        })
    }
}
