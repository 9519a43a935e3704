//! The ℓ1 penalty: first knot, closed-form truncation limits, Gaussian pivot.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{check_tie, ActiveSet, KnotCertificate, Problem};
use crate::pipeline::Analysis;
use crate::pivot::{survival_pivot, PivotInputs, PivotResult};

/// What the lasso frontend keeps after the first knot.
///
/// Only the `j*` column of `Θ = XᵀΣX` is ever formed.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoState {
    pub j_star: usize,
    pub s_star: f64,
    pub lambda1: f64,
    /// `Xᵀy`
    pub score: DVector<f64>,
    /// `Θ_{·j*} = XᵀΣX_{j*}`
    pub theta_col: DVector<f64>,
}

impl LassoState {
    pub fn theta_jj(&self) -> f64 {
        self.theta_col[self.j_star]
    }
}

/// `λ1 = ‖Xᵀy‖∞` and its maximizer `η* = s*·e_{j*}`.
pub fn lasso_knot(p: &Problem) -> Result<(KnotCertificate, LassoState)> {
    let (x, y) = p.vector_parts()?;
    let score = x.tr_mul(y);
    let (j_star, lambda1) = argmax_abs(&score);
    let second = score
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j_star)
        .map(|(_, v)| v.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    if score.len() > 1 {
        check_tie(lambda1, second)?;
    }
    let s_star = if score[j_star] >= 0.0 { 1.0 } else { -1.0 };
    let sigma_xj = p.covariance.apply(&x.column(j_star).into_owned());
    let theta_col = x.tr_mul(&sigma_xj);
    let mut eta = DVector::zeros(score.len());
    eta[j_star] = s_star;
    let cert = KnotCertificate {
        lambda1,
        eta_star: eta,
        active: ActiveSet::Coordinate {
            index: j_star,
            sign: s_star,
        },
        tangent_basis: DMatrix::zeros(score.len(), 0),
    };
    Ok((
        cert,
        LassoState {
            j_star,
            s_star,
            lambda1,
            score,
            theta_col,
        },
    ))
}

fn argmax_abs(v: &DVector<f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, x) in v.iter().enumerate() {
        if x.abs() > best.1 {
            best = (k, x.abs());
        }
    }
    best
}

/// Closed-form `(V−, V+)`.
///
/// Each competitor `k ≠ j*` and sign `s` gives the ratio
/// `s(X_k − ρ_k X_{j*})ᵀy / (1 − s·s*·ρ_k)` with `ρ_k = Θ_{j*k}/Θ_{j*j*}`. Positive
/// denominators bound from below, negative ones from above. The vertex `−η*`
/// contributes the value 0 to the lower limit, so `V− ≥ 0`.
pub fn lasso_v_bounds(state: &LassoState) -> (f64, f64) {
    let j = state.j_star;
    let tjj = state.theta_jj();
    let gj = state.score[j];
    let mut lower: f64 = 0.0;
    let mut upper = f64::INFINITY;
    for k in 0..state.score.len() {
        if k == j {
            continue;
        }
        let rho = state.theta_col[k] / tjj;
        let resid = state.score[k] - rho * gj;
        for s in [1.0, -1.0] {
            let den = 1.0 - s * state.s_star * rho;
            if den > 0.0 {
                lower = lower.max(s * resid / den);
            } else if den < 0.0 {
                upper = upper.min(s * resid / den);
            }
        }
    }
    (lower, upper)
}

pub fn lasso_analysis(p: &Problem) -> Result<Analysis> {
    let (x, _) = p.vector_parts()?;
    let (cert, state) = lasso_knot(p)?;
    let tjj = state.theta_jj();
    if !(tjj > 0.0) {
        return Err(Error::Numerical(format!(
            "selected column {} has zero variance under Sigma",
            state.j_star
        )));
    }
    let (v_minus, v_plus) = lasso_v_bounds(&state);
    let c = &state.theta_col * (state.s_star / tjj);
    let a = &state.score - &c * state.lambda1;
    let r = x.column(state.j_star) * state.s_star;
    let mean_direction = x.tr_mul(&r);
    Ok(Analysis {
        certificate: cert,
        v_minus,
        v_plus,
        sigma2: tjj,
        lambda_eigs: Vec::new(),
        c,
        a,
        r,
        mean_direction,
    })
}

/// Pivot with `σ² = Θ_{j*j*}`, no curvature term, and zero mean.
pub fn lasso_pvalue(p: &Problem) -> Result<PivotResult> {
    let analysis = lasso_analysis(p)?;
    survival_pivot(&analysis.pivot_inputs())
}

/// The inputs of the lasso pivot; handy when only the bounds are needed.
pub fn lasso_pivot_inputs(p: &Problem) -> Result<PivotInputs> {
    Ok(lasso_analysis(p)?.pivot_inputs())
}
