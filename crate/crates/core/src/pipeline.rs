//! End-to-end test: validate, project out `C⊥`, dispatch to the penalty frontend,
//! evaluate the pivot.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fracsolve::{solve_v, FractionalProgram, Sense, SolveReport};
use crate::geometry::Geometry;
use crate::linalg::psd_pinv;
use crate::model::{apply_null_projection, validate_problem, Covariance, KnotCertificate, PenaltySpec, Problem};
use crate::pivot::{selection_interval, survival_pivot, PivotInputs, PivotResult};
use crate::{group, lasso, nuclear};

/// Everything the frontends compute about one data set.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub certificate: KnotCertificate,
    pub v_minus: f64,
    pub v_plus: f64,
    /// Variance of the statistic at `η*`.
    pub sigma2: f64,
    pub lambda_eigs: Vec<f64>,
    /// `C(η*)`, in coefficient space.
    pub c: DVector<f64>,
    /// `Xᵀy − λ1·C(η*)`, in coefficient space.
    pub a: DVector<f64>,
    /// Response-space direction `r` with `λ1 = rᵀy` at the observed data.
    pub r: DVector<f64>,
    /// `Xᵀr`, so the mean of the statistic under `β0` is `mean_directionᵀβ0`.
    pub mean_direction: DVector<f64>,
}

impl Analysis {
    pub fn lambda1(&self) -> f64 {
        self.certificate.lambda1
    }

    /// Pivot inputs under the global null (`μ = 0`).
    pub fn pivot_inputs(&self) -> PivotInputs {
        PivotInputs {
            lambda1: self.certificate.lambda1,
            v_minus: self.v_minus,
            v_plus: self.v_plus,
            sigma2: self.sigma2,
            mu: 0.0,
            lambda_eigs: self.lambda_eigs.clone(),
        }
    }

    /// Mean of the selected statistic when the true coefficients are `beta0`
    /// (column-major vectorized for matrix problems).
    pub fn mu(&self, beta0: &DVector<f64>) -> Result<f64> {
        if beta0.len() != self.mean_direction.len() {
            return Err(Error::DimensionMismatch {
                field: "beta0",
                detail: format!("expected length {}, got {}", self.mean_direction.len(), beta0.len()),
            });
        }
        Ok(self.mean_direction.dot(beta0))
    }

    pub fn pvalue(&self) -> Result<PivotResult> {
        survival_pivot(&self.pivot_inputs())
    }

    pub fn interval(&self, alpha: f64) -> Result<(f64, f64)> {
        selection_interval(&self.pivot_inputs(), alpha)
    }

    /// The two fractional programs behind `V−` and `V+`.
    pub fn programs(&self, geometry: &Geometry) -> (FractionalProgram, FractionalProgram) {
        // with a single block `a` is rounding noise and would be normalized into a direction
        let mut objective = self.a.clone();
        if objective.norm() <= 1e-12 * self.lambda1() * (objective.len() as f64).sqrt() {
            objective.fill(0.0);
        }
        let lower = FractionalProgram {
            objective,
            constraint: self.c.clone(),
            geometry: geometry.clone(),
            sense: Sense::Lower,
        };
        let upper = FractionalProgram {
            sense: Sense::Upper,
            ..lower.clone()
        };
        (lower, upper)
    }

    /// `(V−, V+)` recomputed by the iterative solver.
    pub fn solver_bounds(&self, geometry: &Geometry, tol: f64) -> Result<(SolveReport, SolveReport)> {
        let (lo, hi) = self.programs(geometry);
        Ok((solve_v(&lo, tol)?, solve_v(&hi, tol)?))
    }
}

/// Validation followed by the null-space projection.
pub fn prepare(p: Problem) -> Result<Problem> {
    Ok(apply_null_projection(validate_problem(p)?))
}

/// Validates, projects, and runs the matching frontend.
pub fn analyze(p: Problem) -> Result<Analysis> {
    analyze_prepared(&prepare(p)?)
}

/// Runs the frontend on a problem that has already been through [`prepare`].
pub fn analyze_prepared(p: &Problem) -> Result<Analysis> {
    match &p.penalty {
        PenaltySpec::Lasso => lasso::lasso_analysis(p),
        PenaltySpec::Group(_) => group::group_analysis(p),
        PenaltySpec::Nuclear(_) => nuclear::nuclear_analysis(p),
    }
}

/// The first knot and its certificate.
pub fn lambda_one(p: Problem) -> Result<KnotCertificate> {
    let p = prepare(p)?;
    match &p.penalty {
        PenaltySpec::Lasso => Ok(lasso::lasso_knot(&p)?.0),
        PenaltySpec::Group(_) => Ok(group::group_knot(&p)?.0),
        PenaltySpec::Nuclear(_) => Ok(nuclear::nuclear_knot(&p)?.0),
    }
}

pub fn pvalue(p: Problem) -> Result<PivotResult> {
    analyze(p)?.pvalue()
}

pub fn interval(p: Problem, alpha: f64) -> Result<(f64, f64)> {
    analyze(p)?.interval(alpha)
}

/// `r`, `σ²` and `C` for a vector problem with maximizer `eta` and tangent basis `tangent`.
///
/// `r = Xη − B(BᵀΣB)⁺BᵀΣXη` with `B = X·tangent`, `σ² = rᵀΣr`, `C = XᵀΣr/σ²`.
pub(crate) fn residual_quantities(
    x: &DMatrix<f64>,
    cov: &Covariance,
    eta: &DVector<f64>,
    tangent: &DMatrix<f64>,
) -> Result<(DVector<f64>, f64, DVector<f64>)> {
    let e = x * eta;
    let r = if tangent.ncols() == 0 {
        e
    } else {
        let b = x * tangent;
        let sb = cov.apply_matrix(&b);
        let m = b.tr_mul(&sb);
        let m = (&m + m.transpose()) * 0.5;
        let coef = psd_pinv(&m) * sb.tr_mul(&e);
        e - b * coef
    };
    let sr = cov.apply(&r);
    let sigma2 = r.dot(&sr);
    if !(sigma2 > 0.0) {
        return Err(Error::Numerical(format!("statistic variance {sigma2:e} is not positive")));
    }
    let c = x.tr_mul(&sr) / sigma2;
    Ok((r, sigma2, c))
}
