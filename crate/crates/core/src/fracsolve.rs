//! Generic computation of the truncation limits `V−` and `V+`.
//!
//! Both limits are optima of linear-fractional programs over the unit ball `K`
//! of the penalty,
//!
//! ```text
//! V− = max { aᵀu / (1 − uᵀc) : P(u) ≤ 1, uᵀc < 1 }
//! V+ = min { aᵀu / (1 − uᵀc) : P(u) ≤ 1, uᵀc > 1 }
//! ```
//!
//! with `a = Xᵀy − λ1·c` and `c = C(η*)`. Rescaling by the denominator turns each
//! into a conic program over the epigraph of `P`, solved here by ADMM. The same
//! limits are also the endpoints of `{t : Q(a + t·c) ≤ t}`, which
//! [`sublevel_bounds`] finds by bisection.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::Geometry;

/// Which limit a program computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `V−`: maximize, constraint `w − uᵀc = 1`.
    Lower,
    /// `V+`: minimize, constraint `w − uᵀc = −1`.
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalProgram {
    /// `a = Xᵀy − λ1·C(η*)`
    pub objective: DVector<f64>,
    /// `C(η*)`
    pub constraint: DVector<f64>,
    pub geometry: Geometry,
    pub sense: Sense,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub value: f64,
    pub iterations: usize,
    /// Larger of the relative primal and dual residuals at exit.
    pub residual: f64,
}

/// Default relative tolerance of [`solve_v`].
pub const DEFAULT_TOL: f64 = 1e-6;

const MAX_ITER: usize = 200_000;
const BALANCE_EVERY: usize = 50;
const BALANCE_UNTIL: usize = 10_000;
const RHO_MAX: f64 = 1e6;

/// `V+ = ∞` exactly when no point of `K` has `uᵀc > 1`, i.e. `Q(c) ≤ 1`.
pub fn upper_is_unbounded(geom: &Geometry, c: &DVector<f64>) -> bool {
    geom.dual_norm(c) <= 1.0 + 1e-10
}

/// Solves one of the two convex reformulations by scaled ADMM.
///
/// Iterates: `x` on the affine constraint, `v` on the epigraph, `z` the scaled dual.
/// The reported value is the fractional objective at the epigraph iterate, so it is
/// always attained by a feasible point of the original program.
pub fn solve_v(prog: &FractionalProgram, tol: f64) -> Result<SolveReport> {
    let d = prog.objective.len();
    if prog.constraint.len() != d {
        return Err(Error::DimensionMismatch {
            field: "constraint",
            detail: format!("objective has length {d}, constraint {}", prog.constraint.len()),
        });
    }
    if prog.sense == Sense::Upper && upper_is_unbounded(&prog.geometry, &prog.constraint) {
        return Ok(SolveReport {
            value: f64::INFINITY,
            iterations: 0,
            residual: 0.0,
        });
    }
    let a_norm = prog.objective.norm();
    if a_norm == 0.0 {
        return Ok(SolveReport {
            value: 0.0,
            iterations: 0,
            residual: 0.0,
        });
    }
    let a = &prog.objective / a_norm;
    let c = &prog.constraint;
    let rhs = match prog.sense {
        Sense::Lower => 1.0,
        Sense::Upper => -1.0,
    };
    // affine set {(u, w) : w − cᵀu = rhs}, normal (−c, 1)
    let normal_sq = c.norm_squared() + 1.0;
    let project_affine = |u: &mut DVector<f64>, w: &mut f64| {
        let gap = (*w - c.dot(u) - rhs) / normal_sq;
        u.axpy(gap, c, 1.0);
        *w -= gap;
    };
    // fractional value of a point of the epigraph cone, if its denominator has the right sign
    let fractional = |u: &DVector<f64>, w: f64| -> Option<f64> {
        let h = (w - c.dot(u)) * rhs;
        (h > 1e-12 * (1.0 + w.abs())).then(|| a.dot(u) / h)
    };

    let mut rho = 1.0;
    let mut xu = DVector::zeros(d);
    let mut vu = DVector::<f64>::zeros(d);
    let mut vw = 0.0;
    let mut zu = DVector::<f64>::zeros(d);
    let mut zw = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITER {
        xu.copy_from(&vu);
        xu -= &zu;
        xu.axpy(1.0 / rho, &a, 1.0);
        let mut xw = vw - zw;
        project_affine(&mut xu, &mut xw);

        let (nu, nw) = prog.geometry.project_epigraph(&(&xu + &zu), xw + zw);
        let dual_sq = (&nu - &vu).norm_squared() + (nw - vw).powi(2);
        vu = nu;
        vw = nw;

        let ru = &xu - &vu;
        let rw = xw - vw;
        zu += &ru;
        zw += rw;

        let primal = (ru.norm_squared() + rw * rw).sqrt();
        let dual = rho * dual_sq.sqrt();
        let scale_p = (xu.norm_squared() + xw * xw).sqrt().max((vu.norm_squared() + vw * vw).sqrt());
        let scale_d = rho * (zu.norm_squared() + zw * zw).sqrt();
        let rel_p = primal / (1.0 + scale_p);
        let rel_d = dual / (1.0 + scale_d);
        residual = rel_p.max(rel_d);

        if let Some(v) = fractional(&vu, vw) {
            best = best.max(v);
        }

        if residual <= tol {
            let value = fractional(&vu, vw).unwrap_or(best);
            return Ok(SolveReport {
                value: finish(prog.sense, value, a_norm),
                iterations: it,
                residual,
            });
        }
        // balancing stops after a burn-in; left running it can cycle
        if it % BALANCE_EVERY == 0 && it <= BALANCE_UNTIL {
            if rel_p > 10.0 * rel_d && rho < RHO_MAX {
                rho *= 2.0;
                zu /= 2.0;
                zw /= 2.0;
            } else if rel_d > 10.0 * rel_p && rho > 1.0 / RHO_MAX {
                rho /= 2.0;
                zu *= 2.0;
                zw *= 2.0;
            }
        }
    }
    Err(Error::MaxIterations {
        iterations: MAX_ITER,
        best_value: finish(prog.sense, best, a_norm),
        residual,
    })
}

fn finish(sense: Sense, value: f64, a_norm: f64) -> f64 {
    match sense {
        Sense::Lower => value * a_norm,
        Sense::Upper => -value * a_norm,
    }
}

/// Both limits from the sublevel set `{t : Q(a + t·c) ≤ t}`.
///
/// `Q(a + t·c) ≥ t` holds for every `t` (take `η*` in the dual pairing), so the
/// set is where equality holds; it contains `λ1` and lies in `[0, ∞)`.
pub fn sublevel_bounds(geom: &Geometry, a: &DVector<f64>, c: &DVector<f64>, lambda1: f64) -> (f64, f64) {
    let qc = geom.dual_norm(c);
    let tol = 1e-11 * (1.0 + lambda1) * (1.0 + qc);
    let excess = |t: f64| geom.dual_norm(&(a + c * t)) - t;
    let inside = |t: f64| excess(t) <= tol;

    let lower = if inside(0.0) {
        0.0
    } else {
        bisect_edge(&inside, 0.0, lambda1)
    };
    let upper = if upper_is_unbounded(geom, c) {
        f64::INFINITY
    } else {
        let mut step = 1.0 + lambda1;
        let mut outer = lambda1 + step;
        let mut inner = lambda1;
        while inside(outer) {
            inner = outer;
            step *= 2.0;
            outer = lambda1 + step;
            if !outer.is_finite() {
                return (lower, f64::INFINITY);
            }
        }
        bisect_edge(&inside, outer, inner)
    };
    (lower, upper)
}

/// Bisects between a point `out` outside the set and a point `inn` inside it.
fn bisect_edge<F: Fn(f64) -> bool>(inside: &F, mut out: f64, mut inn: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (out + inn);
        if mid == out || mid == inn {
            break;
        }
        if inside(mid) {
            inn = mid;
        } else {
            out = mid;
        }
    }
    inn
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn orthonormal_lasso() -> (DVector<f64>, DVector<f64>, f64) {
        // X = I, y = (3, -2, 1): λ1 = 3, η* = e₁, C = e₁, a = (0, -2, 1)
        let a = DVector::from_vec(vec![0.0, -2.0, 1.0]);
        let c = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        (a, c, 3.0)
    }

    #[test]
    fn sublevel_orthonormal_lasso_gives_second_knot() {
        let (a, c, l1) = orthonormal_lasso();
        let (lo, hi) = sublevel_bounds(&Geometry::Lasso, &a, &c, l1);
        assert_relative_eq!(lo, 2.0, max_relative = 1e-10);
        assert_eq!(hi, f64::INFINITY);
    }

    #[test]
    fn admm_orthonormal_lasso_gives_second_knot() {
        let (a, c, _) = orthonormal_lasso();
        let prog = FractionalProgram {
            objective: a.clone(),
            constraint: c.clone(),
            geometry: Geometry::Lasso,
            sense: Sense::Lower,
        };
        let r = solve_v(&prog, 1e-9).unwrap();
        assert!((r.value - 2.0).abs() < 1e-5, "{r:?}");
        let up = solve_v(&FractionalProgram { sense: Sense::Upper, ..prog }, 1e-9).unwrap();
        assert_eq!(up.value, f64::INFINITY);
    }

    #[test]
    fn single_coordinate_has_no_competitor() {
        // the only remaining vertex is −η*, whose fractional value is 0
        let a = DVector::from_vec(vec![0.0]);
        let c = DVector::from_vec(vec![1.0]);
        assert_eq!(sublevel_bounds(&Geometry::Lasso, &a, &c, 1.5), (0.0, f64::INFINITY));
    }

    #[test]
    fn finite_upper_limit() {
        // λ1 = 2, η* = e₁, c = (1, 1.5), a = (0, −4): Xᵀy = (2, −1).
        // |1.5t − 4| ≤ t on [1.6, 8]
        let a = DVector::from_vec(vec![0.0, -4.0]);
        let c = DVector::from_vec(vec![1.0, 1.5]);
        let (lo, hi) = sublevel_bounds(&Geometry::Lasso, &a, &c, 2.0);
        assert_relative_eq!(lo, 1.6, max_relative = 1e-10);
        assert_relative_eq!(hi, 8.0, max_relative = 1e-10);
        for (sense, want) in [(Sense::Lower, 1.6), (Sense::Upper, 8.0)] {
            let prog = FractionalProgram {
                objective: a.clone(),
                constraint: c.clone(),
                geometry: Geometry::Lasso,
                sense,
            };
            let r = solve_v(&prog, 1e-9).unwrap();
            assert!((r.value - want).abs() < 1e-5 * want, "{sense:?}: {r:?}");
        }
    }
}
