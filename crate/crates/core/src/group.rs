//! Group lasso: first knot over groups, tangent space of the selected sphere,
//! angle formulas for the truncation limits, chi-type pivot.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{complement_of_vector, numerical_rank};
use crate::model::{check_tie, ActiveSet, GroupSpec, KnotCertificate, PenaltySpec, Problem};
use crate::pipeline::{residual_quantities, Analysis};
use crate::pivot::{survival_pivot, PivotResult};

#[derive(Debug, Clone, PartialEq)]
pub struct GroupState {
    pub g_star: usize,
    pub lambda1: f64,
    /// Numerical rank of `X_{g*}`.
    pub r_star: usize,
    /// `Xᵀy`
    pub score: DVector<f64>,
    /// `C(η*)`
    pub c_vec: DVector<f64>,
    pub sigma2: f64,
    /// Response-space direction of the statistic.
    pub r: DVector<f64>,
}

fn group_spec(p: &Problem) -> Result<&GroupSpec> {
    match &p.penalty {
        PenaltySpec::Group(g) => Ok(g),
        other => Err(Error::InvalidInput {
            field: "penalty",
            detail: format!("group frontend called with {} penalty", other.name()),
        }),
    }
}

fn sub_vector(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&j| v[j]))
}

/// `λ1 = max_g ‖X_gᵀy‖/w_g`, the maximizer on the selected group, and the tangent
/// space of the scaled sphere at that point.
pub fn group_knot(p: &Problem) -> Result<(KnotCertificate, GroupState)> {
    let spec = group_spec(p)?;
    let (x, y) = p.vector_parts()?;
    let score = x.tr_mul(y);
    let values: Vec<f64> = spec
        .groups
        .iter()
        .zip(&spec.weights)
        .map(|(g, w)| sub_vector(&score, g).norm() / w)
        .collect();
    let mut g_star = 0;
    for (g, v) in values.iter().enumerate() {
        if *v > values[g_star] {
            g_star = g;
        }
    }
    let lambda1 = values[g_star];
    if values.len() > 1 {
        let second = values
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != g_star)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        check_tie(lambda1, second)?;
    }
    if !(lambda1 > 0.0) {
        return Err(Error::TieAtMax {
            first: lambda1,
            second: lambda1,
        });
    }
    let members = &spec.groups[g_star];
    let w = spec.weights[g_star];
    let u = sub_vector(&score, members);
    let dir = &u / (w * u.norm());
    let pdim = score.len();
    let mut eta = DVector::zeros(pdim);
    for (k, &j) in members.iter().enumerate() {
        eta[j] = dir[k];
    }
    let local = complement_of_vector(&u);
    let mut tangent = DMatrix::zeros(pdim, local.ncols());
    for (k, &j) in members.iter().enumerate() {
        tangent.row_mut(j).copy_from(&local.row(k));
    }
    let xg = DMatrix::from_fn(x.nrows(), members.len(), |i, k| x[(i, members[k])]);
    let r_star = numerical_rank(&xg).max(1);
    let (r, sigma2, c_vec) = residual_quantities(x, &p.covariance, &eta, &tangent)?;
    let cert = KnotCertificate {
        lambda1,
        eta_star: eta,
        active: ActiveSet::Group { index: g_star },
        tangent_basis: tangent,
    };
    Ok((
        cert,
        GroupState {
            g_star,
            lambda1,
            r_star,
            score,
            c_vec,
            sigma2,
            r,
        },
    ))
}

/// Contribution of one competing group: the lower-limit candidate and the
/// upper-limit candidate (`∞` when the group imposes none).
///
/// On the sphere `‖u_g‖ = 1/w` only the plane of `a_g` and `c_g` matters. With `θ`
/// the angle between them and `γ = ‖c_g‖`, the stationary points of the fractional
/// objective satisfy `sin ψ = (γ/w) sin θ`, giving
/// `w± = ‖a_g‖ cos ψ / (w − γ cos(θ − ψ))`. Returns `None` when `(γ/w) sin θ > 1`.
pub fn angle_bounds(a_g: &DVector<f64>, c_g: &DVector<f64>, w: f64) -> Option<(f64, f64)> {
    let na = a_g.norm();
    let gamma = c_g.norm();
    if na == 0.0 || gamma == 0.0 {
        return None;
    }
    let c_hat = c_g / gamma;
    let along = a_g.dot(&c_hat);
    let sin_t = (a_g - &c_hat * along).norm() / na;
    let cos_t = along / na;
    let theta = sin_t.atan2(cos_t);
    let s = gamma / w * theta.sin();
    if s > 1.0 + 1e-12 {
        return None;
    }
    let psi1 = s.min(1.0).asin();
    let psi2 = std::f64::consts::PI - psi1;
    let eval = |psi: f64| {
        let den = w - gamma * (theta - psi).cos();
        (na * psi.cos() / den, den)
    };
    let (v1, d1) = eval(psi1);
    let (v2, d2) = eval(psi2);
    if gamma < w {
        return Some((v1.max(v2), f64::INFINITY));
    }
    match (d1 > 0.0, d2 > 0.0) {
        (true, false) => Some((v1, v2)),
        (false, true) => Some((v2, v1)),
        _ => Some((v1.min(v2), v1.max(v2))),
    }
}

/// Exact solution set of `‖a_g + t·c_g‖ ≤ w·t` over `t ≥ 0`, as `(lower, upper)`.
/// Intersecting these over all groups gives `[V−, V+]`.
pub fn quadratic_bounds(a_g: &DVector<f64>, c_g: &DVector<f64>, w: f64) -> (f64, f64) {
    let qa = c_g.norm_squared() - w * w;
    let qb = 2.0 * a_g.dot(c_g);
    let qc = a_g.norm_squared();
    if qc == 0.0 {
        return if qa <= 0.0 { (0.0, f64::INFINITY) } else { (0.0, 0.0) };
    }
    if qa == 0.0 {
        return if qb < 0.0 {
            (-qc / qb, f64::INFINITY)
        } else {
            (f64::INFINITY, f64::NEG_INFINITY)
        };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        // opens upward with no real root: the set is empty
        return (f64::INFINITY, f64::NEG_INFINITY);
    }
    let q = -0.5 * (qb + qb.signum() * disc.sqrt());
    let (r1, r2) = {
        let x1 = q / qa;
        let x2 = if q != 0.0 { qc / q } else { 0.0 };
        (x1.min(x2), x1.max(x2))
    };
    if qa < 0.0 {
        // nonpositive outside the roots; the product of roots is ≤ 0
        (r2.max(0.0), f64::INFINITY)
    } else {
        (r1.max(0.0), r2)
    }
}

/// Closed-form `(V−, V+)` from the angle formulas, group by group.
pub fn group_v_bounds_closed(state: &GroupState, spec: &GroupSpec) -> (f64, f64) {
    let a = &state.score - &state.c_vec * state.lambda1;
    let mut lower: f64 = 0.0;
    let mut upper = f64::INFINITY;
    for (g, (members, &w)) in spec.groups.iter().zip(&spec.weights).enumerate() {
        if g == state.g_star {
            continue;
        }
        let a_g = sub_vector(&a, members);
        let c_g = sub_vector(&state.c_vec, members);
        let (lo, hi) = angle_bounds(&a_g, &c_g, w).unwrap_or_else(|| quadratic_bounds(&a_g, &c_g, w));
        lower = lower.max(lo);
        upper = upper.min(hi);
    }
    (lower, upper)
}

pub fn group_analysis(p: &Problem) -> Result<Analysis> {
    let spec = group_spec(p)?;
    let (x, _) = p.vector_parts()?;
    let (cert, state) = group_knot(p)?;
    let (v_minus, v_plus) = group_v_bounds_closed(&state, spec);
    let a = &state.score - &state.c_vec * state.lambda1;
    let mean_direction = x.tr_mul(&state.r);
    Ok(Analysis {
        certificate: cert,
        v_minus,
        v_plus,
        sigma2: state.sigma2,
        lambda_eigs: vec![0.0; state.r_star - 1],
        c: state.c_vec,
        a,
        r: state.r,
        mean_direction,
    })
}

/// Pivot with `det(Λ + zI) = z^{r*−1}`.
pub fn group_pvalue(p: &Problem) -> Result<PivotResult> {
    survival_pivot(&group_analysis(p)?.pivot_inputs())
}

/// `P(λ1 < σχ_k ≤ V+) / P(V− < σχ_k ≤ V+)` with `k = r*`, the closed form of the
/// group pivot under the null.
pub fn chi_ratio(k: usize, lambda1: f64, v_minus: f64, v_plus: f64, sigma2: f64) -> f64 {
    use crate::special::{chi_cdf, chi_sf};
    let s = sigma2.sqrt();
    // upper tails keep precision when everything is far out
    let tail = |x: f64| chi_sf(k, x / s);
    let num = tail(lambda1) - tail(v_plus);
    let den = tail(v_minus) - tail(v_plus);
    if den <= 0.0 {
        let num_c = chi_cdf(k, v_plus / s) - chi_cdf(k, lambda1 / s);
        let den_c = chi_cdf(k, v_plus / s) - chi_cdf(k, v_minus / s);
        return num_c / den_c;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::lasso_pvalue;
    use crate::model::Covariance;
    use approx::assert_relative_eq;

    fn small_problem() -> Problem {
        let x = DMatrix::from_row_slice(
            3,
            4,
            &[1.0, 0.3, -0.2, 0.8, 0.1, 1.2, 0.5, -0.4, -0.6, 0.2, 1.1, 0.3],
        );
        let y = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        Problem::group(x, y, Covariance::identity(), GroupSpec::consecutive(&[2, 2], vec![2f64.sqrt(), 0.1]))
    }

    #[test]
    fn knot_follows_weighted_norms() {
        let p = small_problem();
        let (x, y) = p.vector_parts().unwrap();
        let s = x.transpose() * y;
        let v0 = (s[0].hypot(s[1])) / 2f64.sqrt();
        let v1 = (s[2].hypot(s[3])) / 0.1;
        let (cert, state) = group_knot(&p).unwrap();
        assert_eq!(state.g_star, if v0 > v1 { 0 } else { 1 });
        assert_relative_eq!(cert.lambda1, v0.max(v1), max_relative = 1e-14);
        // η* sits on the unit ball of the penalty and attains λ1
        let spec = group_spec(&p).unwrap();
        let geom = crate::geometry::Geometry::Group(spec.clone());
        assert_relative_eq!(geom.norm(&cert.eta_star), 1.0, max_relative = 1e-14);
        assert_relative_eq!(cert.eta_star.dot(&s), cert.lambda1, max_relative = 1e-14);
        assert!((cert.tangent_basis.transpose() * &s).norm() < 1e-12);
    }

    #[test]
    fn self_consistency_of_c() {
        let (cert, state) = group_knot(&small_problem()).unwrap();
        assert_relative_eq!(cert.eta_star.dot(&state.c_vec), 1.0, max_relative = 1e-12);
        assert!((cert.tangent_basis.transpose() * &state.c_vec).norm() < 1e-12);
    }

    #[test]
    fn singletons_reproduce_lasso() {
        let x = DMatrix::from_row_slice(4, 3, &[1.0, 0.4, 0.0, 0.2, 1.0, 0.3, 0.0, 0.5, 1.0, 0.7, 0.1, 0.2]);
        let y = DVector::from_vec(vec![0.3, 1.5, -0.7, 0.2]);
        let lasso = Problem::lasso(x.clone(), y.clone(), Covariance::identity());
        let group = Problem::group(x, y, Covariance::identity(), GroupSpec::singletons(3));
        let pl = lasso_pvalue(&lasso).unwrap().p_value;
        let pg = group_pvalue(&group).unwrap().p_value;
        assert!((pl - pg).abs() < 1e-12, "{pl} vs {pg}");
    }

    #[test]
    fn angle_formula_matches_quadratic() {
        let cases = [
            (vec![1.0, 2.0, -0.5], vec![0.3, -0.2, 0.4], 1.3),
            (vec![-1.0, 0.5], vec![2.0, 1.0], 1.0),
            (vec![0.2, -0.1, 0.3], vec![-1.5, 0.1, 0.2], 1.2),
            (vec![3.0], vec![-0.5], 1.0),
        ];
        for (a, c, w) in cases {
            let a = DVector::from_vec(a);
            let c = DVector::from_vec(c);
            let (ql, qh) = quadratic_bounds(&a, &c, w);
            if ql > qh {
                continue;
            }
            let (al, ah) = angle_bounds(&a, &c, w).expect("real angles");
            assert_relative_eq!(al.max(0.0), ql, max_relative = 1e-10, epsilon = 1e-12);
            if qh.is_finite() {
                assert_relative_eq!(ah, qh, max_relative = 1e-10);
            } else {
                assert_eq!(ah, f64::INFINITY);
            }
        }
    }

    #[test]
    fn single_group_has_no_competitors() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let p = Problem::group(x, DVector::from_vec(vec![1.0, 2.0, 0.5]), Covariance::identity(), GroupSpec::consecutive(&[2], vec![1.0]));
        let an = group_analysis(&p).unwrap();
        assert_eq!((an.v_minus, an.v_plus), (0.0, f64::INFINITY));
        assert_eq!(an.lambda_eigs, vec![0.0]);
    }

    #[test]
    fn pivot_equals_chi_ratio() {
        let an = group_analysis(&small_problem()).unwrap();
        let k = an.lambda_eigs.len() + 1;
        let direct = survival_pivot(&an.pivot_inputs()).unwrap().p_value;
        let closed = chi_ratio(k, an.lambda1(), an.v_minus, an.v_plus, an.sigma2);
        assert!((direct - closed).abs() < 1e-8, "{direct} vs {closed}");
    }
}
