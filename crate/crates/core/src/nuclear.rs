//! Nuclear norm: principal components, matrix completion and reduced-rank
//! regression. Curvature enters through `Λ = G⁻¹H` built from the full SVD of `Xᵀ(y)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fracsolve::sublevel_bounds;
use crate::geometry::Geometry;
use crate::linalg::{column_space_basis, orthonormal_complement, sorted_svd};
use crate::model::{ActiveSet, Covariance, KnotCertificate, NuclearOp, NuclearSpec, PenaltySpec, Problem};
use crate::pipeline::Analysis;
use crate::pivot::{survival_pivot, PivotResult};

#[derive(Debug, Clone, PartialEq)]
pub struct NuclearState {
    /// `Xᵀ(y)`, n×p.
    pub m: DMatrix<f64>,
    /// Full n×n left singular vectors, ordered by decreasing singular value.
    pub u: DMatrix<f64>,
    /// Full p×p right singular vectors.
    pub v: DMatrix<f64>,
    /// The `min(n, p)` singular values, decreasing.
    pub d: DVector<f64>,
    pub eta_star: DMatrix<f64>,
    /// `C(η*)` as an n×p matrix.
    pub c_mat: DMatrix<f64>,
    pub sigma2: f64,
    /// Response-space direction of the statistic, column-major.
    pub r: DVector<f64>,
}

impl NuclearState {
    pub fn d1(&self) -> f64 {
        self.d[0]
    }

    pub fn d2(&self) -> f64 {
        self.d.get(1).copied().unwrap_or(0.0)
    }
}

fn nuclear_spec(p: &Problem) -> Result<&NuclearSpec> {
    match &p.penalty {
        PenaltySpec::Nuclear(n) => Ok(n),
        other => Err(Error::InvalidInput {
            field: "penalty",
            detail: format!("nuclear frontend called with {} penalty", other.name()),
        }),
    }
}

fn scalar_variance(p: &Problem) -> Result<f64> {
    match p.covariance {
        Covariance::Scaled(s) => Ok(s),
        Covariance::Dense(_) => Err(Error::InvalidInput {
            field: "Sigma",
            detail: "nuclear problems need a scalar multiple of the identity".into(),
        }),
    }
}

fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// `Xᵀ(y)` for the operator in `spec`.
pub fn adjoint_apply(spec: &NuclearSpec, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spec.adjoint(y)
}

/// `λ1 = ‖Xᵀ(y)‖op`, `η* = U₁V₁ᵀ`, and the `(n−1)+(p−1)` tangent directions
/// `{UᵢV₁ᵀ} ∪ {U₁Vⱼᵀ}`.
pub fn nuclear_knot(p: &Problem) -> Result<(KnotCertificate, NuclearState)> {
    let spec = nuclear_spec(p)?;
    let sigma0 = scalar_variance(p)?;
    let y = p.response.as_matrix().ok_or(Error::InvalidInput {
        field: "y",
        detail: "nuclear penalty needs a matrix response".into(),
    })?;
    let m = spec.adjoint(y)?;
    let (n, pc) = spec.shape;
    let svd = sorted_svd(&m);
    let d = svd.singular_values.clone();
    let d1 = d[0];
    let d2 = d.get(1).copied().unwrap_or(0.0);
    if !(d1 > 0.0) || d1 - d2 < 1e-9 * d1 {
        return Err(Error::TieAtMax { first: d1, second: d2 });
    }
    let u = complete(&svd.u);
    let v = complete(&svd.v);
    let u1 = u.column(0).into_owned();
    let v1 = v.column(0).into_owned();
    let eta_star = &u1 * v1.transpose();

    let dim = (n - 1) + (pc - 1);
    let mut tangent = DMatrix::zeros(n * pc, dim);
    for i in 1..n {
        tangent.set_column(i - 1, &vec_of(&(u.column(i) * v1.transpose())));
    }
    for j in 1..pc {
        tangent.set_column(n - 1 + j - 1, &vec_of(&(&u1 * v.column(j).transpose())));
    }

    let (r, sigma2, c_mat) = operator_quantities(spec, sigma0, &eta_star, &tangent)?;
    let cert = KnotCertificate {
        lambda1: d1,
        eta_star: vec_of(&eta_star),
        active: ActiveSet::SingularPair { u1, v1 },
        tangent_basis: tangent,
    };
    Ok((
        cert,
        NuclearState {
            m,
            u,
            v,
            d,
            eta_star,
            c_mat,
            sigma2,
            r,
        },
    ))
}

fn complete(q: &DMatrix<f64>) -> DMatrix<f64> {
    let extra = orthonormal_complement(q);
    let mut full = DMatrix::zeros(q.nrows(), q.ncols() + extra.ncols());
    full.columns_mut(0, q.ncols()).copy_from(q);
    full.columns_mut(q.ncols(), extra.ncols()).copy_from(&extra);
    full
}

/// `r`, `σ²` and `C` with `Σ = σ₀²I`, pushing each tangent direction through the
/// operator instead of forming the operator as a matrix.
fn operator_quantities(
    spec: &NuclearSpec,
    sigma0: f64,
    eta: &DMatrix<f64>,
    tangent: &DMatrix<f64>,
) -> Result<(DVector<f64>, f64, DMatrix<f64>)> {
    let (n, pc) = spec.shape;
    let e = vec_of(&spec.forward(eta));
    let r = match spec.op {
        // the tangent basis is orthonormal and orthogonal to η
        NuclearOp::Identity => e,
        _ if tangent.ncols() == 0 => e,
        _ => {
            let mut b = DMatrix::zeros(e.len(), tangent.ncols());
            for k in 0..tangent.ncols() {
                let t = DMatrix::from_column_slice(n, pc, tangent.column(k).as_slice());
                b.set_column(k, &vec_of(&spec.forward(&t)));
            }
            // outputs the operator never reaches (unobserved entries) drop out
            let live: Vec<usize> = (0..e.len())
                .filter(|&i| e[i] != 0.0 || b.row(i).iter().any(|&x| x != 0.0))
                .collect();
            let b_live = b.select_rows(&live);
            let e_live = e.select_rows(&live);
            let q = column_space_basis(&b_live);
            let r_live = &e_live - &q * q.tr_mul(&e_live);
            let mut r = DVector::zeros(e.len());
            for (k, &i) in live.iter().enumerate() {
                r[i] = r_live[k];
            }
            r
        }
    };
    let rr = r.norm_squared();
    if !(rr > 0.0) {
        return Err(Error::Numerical(
            "the maximizer lies in the span of the tangent directions after the operator".into(),
        ));
    }
    let (m_out, p_out) = spec.output_shape();
    let r_mat = DMatrix::from_column_slice(m_out, p_out, r.as_slice());
    let c_mat = spec.adjoint(&r_mat)? / rr;
    Ok((r, sigma0 * rr, c_mat))
}

/// `G`, `H` and the real eigenvalues of `G⁻¹H`.
///
/// With `κ = U₁ᵀCV₁` and `W = U₋₁ᵀCV₋₁`:
/// `G = [[κI, W], [Wᵀ, κI]]`, `H = [[d₁(1−κ)I, D₋₁ − d₁W], [(D₋₁ − d₁W)ᵀ, d₁(1−κ)I]]`.
pub fn build_g_h(state: &NuclearState) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<f64>)> {
    let n = state.u.ncols();
    let pc = state.v.ncols();
    let d1 = state.d1();
    let u1 = state.u.column(0);
    let v1 = state.v.column(0);
    let kappa = (u1.transpose() * &state.c_mat * v1)[(0, 0)];
    let u_rest = state.u.columns(1, n - 1);
    let v_rest = state.v.columns(1, pc - 1);
    let w = u_rest.transpose() * &state.c_mat * v_rest;
    let mut dm = DMatrix::zeros(n - 1, pc - 1);
    for k in 1..state.d.len() {
        dm[(k - 1, k - 1)] = state.d[k];
    }
    let dim = n + pc - 2;
    let mut g = DMatrix::zeros(dim, dim);
    let mut h = DMatrix::zeros(dim, dim);
    let off = &dm - &w * d1;
    for i in 0..n - 1 {
        g[(i, i)] = kappa;
        h[(i, i)] = d1 * (1.0 - kappa);
    }
    for j in 0..pc - 1 {
        g[(n - 1 + j, n - 1 + j)] = kappa;
        h[(n - 1 + j, n - 1 + j)] = d1 * (1.0 - kappa);
    }
    g.view_mut((0, n - 1), (n - 1, pc - 1)).copy_from(&w);
    g.view_mut((n - 1, 0), (pc - 1, n - 1)).copy_from(&w.transpose());
    h.view_mut((0, n - 1), (n - 1, pc - 1)).copy_from(&off);
    h.view_mut((n - 1, 0), (pc - 1, n - 1)).copy_from(&off.transpose());
    let eigs = generalized_eigenvalues(&g, &h)?;
    Ok((g, h, eigs))
}

/// Real eigenvalues of `G⁻¹H` for symmetric `G`, `H`.
fn generalized_eigenvalues(g: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = g.nrows();
    if dim == 0 {
        return Ok(Vec::new());
    }
    let spectrum = g.clone().symmetric_eigen().eigenvalues;
    let big = spectrum.amax();
    let small = spectrum.iter().fold(f64::INFINITY, |acc, x| acc.min(x.abs()));
    let condition = if small > 0.0 { big / small } else { f64::INFINITY };
    if condition > 1e12 {
        return Err(Error::SingularG { condition });
    }
    if let Some(chol) = g.clone().cholesky() {
        // L⁻¹HL⁻ᵀ is symmetric and similar to G⁻¹H
        let l = chol.l();
        let left = l
            .solve_lower_triangular(h)
            .ok_or(Error::SingularG { condition })?;
        let sym = l
            .solve_lower_triangular(&left.transpose())
            .ok_or(Error::SingularG { condition })?;
        let sym = (&sym + sym.transpose()) * 0.5;
        let mut e: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().cloned().collect();
        e.sort_by(|a, b| b.total_cmp(a));
        return Ok(e);
    }
    let ginv_h = g
        .clone()
        .lu()
        .solve(h)
        .ok_or(Error::SingularG { condition })?;
    let complex = ginv_h.complex_eigenvalues();
    let scale = complex.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut e = Vec::with_capacity(dim);
    for z in complex.iter() {
        if z.im.abs() > 1e-8 * scale {
            return Err(Error::Numerical(format!("G⁻¹H has a complex eigenvalue {z}")));
        }
        e.push(z.re);
    }
    e.sort_by(|a, b| b.total_cmp(a));
    Ok(e)
}

/// `(d₂, ∞)` for principal components; the sublevel-set bisection for other operators.
pub fn nuclear_v_bounds(state: &NuclearState, spec: &NuclearSpec) -> (f64, f64) {
    match spec.op {
        NuclearOp::Identity => (state.d2(), f64::INFINITY),
        _ => {
            let c = vec_of(&state.c_mat);
            let a = vec_of(&state.m) - &c * state.d1();
            sublevel_bounds(&Geometry::Nuclear { shape: spec.shape }, &a, &c, state.d1())
        }
    }
}

/// Rows and columns of a mask that hold at least one observation, when some do not.
fn observed_support(spec: &NuclearSpec) -> Option<(Vec<usize>, Vec<usize>)> {
    let NuclearOp::Mask(entries) = &spec.op else {
        return None;
    };
    let (n, pc) = spec.shape;
    let mut row_seen = vec![false; n];
    let mut col_seen = vec![false; pc];
    for &(i, j) in entries {
        row_seen[i] = true;
        col_seen[j] = true;
    }
    let rows: Vec<usize> = (0..n).filter(|&i| row_seen[i]).collect();
    let cols: Vec<usize> = (0..pc).filter(|&j| col_seen[j]).collect();
    if rows.is_empty() || (rows.len() == n && cols.len() == pc) {
        return None;
    }
    Some((rows, cols))
}

/// Scatters a column-major `rows.len()×cols.len()` vector into an n×p one.
fn embed(v: &DVector<f64>, rows: &[usize], cols: &[usize], n: usize, pc: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n * pc);
    for (jj, &j) in cols.iter().enumerate() {
        for (ii, &i) in rows.iter().enumerate() {
            out[i + j * n] = v[ii + jj * rows.len()];
        }
    }
    out
}

fn embed_rows(v: &DVector<f64>, idx: &[usize], len: usize) -> DVector<f64> {
    let mut out = DVector::zeros(len);
    for (k, &i) in idx.iter().enumerate() {
        out[i] = v[k];
    }
    out
}

/// Unobserved rows and columns carry no signal: the gradient has zero variance along
/// tangent directions supported on them, so the analysis runs on the observed block and
/// is embedded back.
fn masked_analysis(p: &Problem, spec: &NuclearSpec, rows: &[usize], cols: &[usize]) -> Result<Analysis> {
    let y = p.response.as_matrix().ok_or(Error::InvalidInput {
        field: "y",
        detail: "nuclear penalty needs a matrix response".into(),
    })?;
    let NuclearOp::Mask(entries) = &spec.op else {
        unreachable!("observed_support only reduces masks");
    };
    let (n, pc) = spec.shape;
    let mut row_at = vec![usize::MAX; n];
    let mut col_at = vec![usize::MAX; pc];
    rows.iter().enumerate().for_each(|(k, &i)| row_at[i] = k);
    cols.iter().enumerate().for_each(|(k, &j)| col_at[j] = k);
    let sub_mask = entries.iter().map(|&(i, j)| (row_at[i], col_at[j])).collect();
    let sub_y = DMatrix::from_fn(rows.len(), cols.len(), |a, b| y[(rows[a], cols[b])]);
    let sub = Problem {
        response: crate::model::Response::Matrix(sub_y),
        penalty: PenaltySpec::Nuclear(NuclearSpec {
            op: NuclearOp::Mask(sub_mask),
            shape: (rows.len(), cols.len()),
        }),
        ..p.clone()
    };
    let an = nuclear_analysis(&sub)?;
    let lift = |v: &DVector<f64>| embed(v, rows, cols, n, pc);
    let cert = &an.certificate;
    let (u1, v1) = match &cert.active {
        ActiveSet::SingularPair { u1, v1 } => (embed_rows(u1, rows, n), embed_rows(v1, cols, pc)),
        _ => unreachable!("nuclear certificates carry a singular pair"),
    };
    let mut tangent = DMatrix::zeros(n * pc, cert.tangent_basis.ncols());
    for k in 0..tangent.ncols() {
        tangent.set_column(k, &lift(&cert.tangent_basis.column(k).into_owned()));
    }
    Ok(Analysis {
        certificate: KnotCertificate {
            lambda1: cert.lambda1,
            eta_star: lift(&cert.eta_star),
            active: ActiveSet::SingularPair { u1, v1 },
            tangent_basis: tangent,
        },
        c: lift(&an.c),
        a: lift(&an.a),
        r: lift(&an.r),
        mean_direction: lift(&an.mean_direction),
        ..an
    })
}

pub fn nuclear_analysis(p: &Problem) -> Result<Analysis> {
    let spec = nuclear_spec(p)?;
    if let Some((rows, cols)) = observed_support(spec) {
        return masked_analysis(p, spec, &rows, &cols);
    }
    let (cert, state) = nuclear_knot(p)?;
    let (_, _, eigs) = build_g_h(&state)?;
    let (v_minus, v_plus) = nuclear_v_bounds(&state, spec);
    let c = vec_of(&state.c_mat);
    let a = vec_of(&state.m) - &c * state.d1();
    let (m_out, p_out) = spec.output_shape();
    let r_mat = DMatrix::from_column_slice(m_out, p_out, state.r.as_slice());
    let mean_direction = vec_of(&spec.adjoint(&r_mat)?);
    Ok(Analysis {
        certificate: cert,
        v_minus,
        v_plus,
        sigma2: state.sigma2,
        lambda_eigs: eigs,
        c,
        a,
        r: state.r,
        mean_direction,
    })
}

pub fn nuclear_pvalue(p: &Problem) -> Result<PivotResult> {
    survival_pivot(&nuclear_analysis(p)?.pivot_inputs())
}
