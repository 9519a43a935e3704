//! Problem data model, validation and the `C⊥` null-space projection.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, column_space_basis_scaled, orthonormality_defect};

/// Covariance of the response.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    /// `σ²·I` on the (vectorized) response.
    Scaled(f64),
    /// A dense symmetric PSD matrix.
    Dense(DMatrix<f64>),
}

impl Covariance {
    pub fn identity() -> Self {
        Covariance::Scaled(1.0)
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Covariance::Scaled(s) => v * *s,
            Covariance::Dense(m) => m * v,
        }
    }

    pub fn apply_matrix(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Covariance::Scaled(s) => v * *s,
            Covariance::Dense(m) => m * v,
        }
    }

    /// `vᵀ Σ v`
    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        match self {
            Covariance::Scaled(s) => s * v.norm_squared(),
            Covariance::Dense(m) => v.dot(&(m * v)),
        }
    }

    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        match self {
            Covariance::Scaled(s) => DMatrix::identity(n, n) * *s,
            Covariance::Dense(m) => m.clone(),
        }
    }

    /// Scale the covariance by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Covariance::Scaled(s) => Covariance::Scaled(s * c),
            Covariance::Dense(m) => Covariance::Dense(m * c),
        }
    }
}

/// Response: a vector for lasso/group problems, a matrix for nuclear-norm problems.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Vector(DVector<f64>),
    Matrix(DMatrix<f64>),
}

impl Response {
    pub fn as_vector(&self) -> Option<&DVector<f64>> {
        match self {
            Response::Vector(v) => Some(v),
            Response::Matrix(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            Response::Matrix(m) => Some(m),
            Response::Vector(_) => None,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Response::Vector(v) => Response::Vector(v * c),
            Response::Matrix(m) => Response::Matrix(m * c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    /// Disjoint index sets covering `0..p`.
    pub groups: Vec<Vec<usize>>,
    /// One positive weight per group.
    pub weights: Vec<f64>,
}

impl GroupSpec {
    /// Every coordinate its own group, unit weights.
    pub fn singletons(p: usize) -> Self {
        GroupSpec {
            groups: (0..p).map(|j| vec![j]).collect(),
            weights: vec![1.0; p],
        }
    }

    /// Consecutive groups of the given sizes.
    pub fn consecutive(sizes: &[usize], weights: Vec<f64>) -> Self {
        let mut start = 0;
        let groups = sizes
            .iter()
            .map(|&s| {
                let g: Vec<usize> = (start..start + s).collect();
                start += s;
                g
            })
            .collect();
        GroupSpec { groups, weights }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.groups.len() != self.weights.len() {
            return Err(Error::BadGroups(format!(
                "{} groups but {} weights",
                self.groups.len(),
                self.weights.len()
            )));
        }
        if let Some((g, w)) = self
            .weights
            .iter()
            .enumerate()
            .find(|(_, &w)| !(w > 0.0 && w.is_finite()))
        {
            return Err(Error::BadGroups(format!("weight {w} of group {g} is not positive")));
        }
        let mut seen = vec![false; p];
        for (g, members) in self.groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::BadGroups(format!("group {g} is empty")));
            }
            for &j in members {
                if j >= p {
                    return Err(Error::BadGroups(format!(
                        "group {g} has index {j} outside 0..{p}"
                    )));
                }
                if seen[j] {
                    return Err(Error::BadGroups(format!("index {j} appears in two groups")));
                }
                seen[j] = true;
            }
        }
        if let Some(j) = seen.iter().position(|&s| !s) {
            return Err(Error::BadGroups(format!("index {j} is not in any group")));
        }
        Ok(())
    }
}

/// The linear operator of a nuclear-norm problem, acting on `n×p` coefficient matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum NuclearOp {
    /// Principal components: `X(B) = B`.
    Identity,
    /// Matrix completion: keep the listed `(row, col)` entries, zero the rest.
    Mask(Vec<(usize, usize)>),
    /// Reduced-rank regression: `X(B) = X B` for an `m×n` matrix `X`.
    MatMul(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuclearSpec {
    pub op: NuclearOp,
    /// Shape `(n, p)` of the coefficient matrix.
    pub shape: (usize, usize),
}

impl NuclearSpec {
    /// Shape of `X(B)`, which is also the shape of the response.
    pub fn output_shape(&self) -> (usize, usize) {
        match &self.op {
            NuclearOp::Identity | NuclearOp::Mask(_) => self.shape,
            NuclearOp::MatMul(x) => (x.nrows(), self.shape.1),
        }
    }

    /// `X(B)`
    pub fn forward(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.op {
            NuclearOp::Identity => b.clone(),
            NuclearOp::Mask(entries) => {
                let mut out = DMatrix::zeros(b.nrows(), b.ncols());
                for &(i, j) in entries {
                    out[(i, j)] = b[(i, j)];
                }
                out
            }
            NuclearOp::MatMul(x) => x * b,
        }
    }

    /// The adjoint `Xᵀ(y)`.
    pub fn adjoint(&self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let (m, p) = self.output_shape();
        if y.shape() != (m, p) {
            return Err(Error::DimensionMismatch {
                field: "y",
                detail: format!("operator output is {m}x{p} but y is {}x{}", y.nrows(), y.ncols()),
            });
        }
        Ok(match &self.op {
            NuclearOp::Identity | NuclearOp::Mask(_) => self.forward(y),
            NuclearOp::MatMul(x) => x.transpose() * y,
        })
    }

    fn validate(&self) -> Result<()> {
        let (n, p) = self.shape;
        if n == 0 || p == 0 {
            return Err(Error::DimensionMismatch {
                field: "shape",
                detail: format!("coefficient shape {n}x{p} is empty"),
            });
        }
        match &self.op {
            NuclearOp::Identity => Ok(()),
            NuclearOp::Mask(entries) => {
                if let Some(&(i, j)) = entries.iter().find(|&&(i, j)| i >= n || j >= p) {
                    return Err(Error::InvalidInput {
                        field: "mask",
                        detail: format!("entry ({i},{j}) outside {n}x{p}"),
                    });
                }
                let mut sorted = entries.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != entries.len() {
                    return Err(Error::InvalidInput {
                        field: "mask",
                        detail: "duplicate entries".into(),
                    });
                }
                Ok(())
            }
            NuclearOp::MatMul(x) => {
                if x.ncols() != n {
                    return Err(Error::DimensionMismatch {
                        field: "X",
                        detail: format!("X has {} columns but coefficient has {n} rows", x.ncols()),
                    });
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PenaltySpec {
    Lasso,
    Group(GroupSpec),
    Nuclear(NuclearSpec),
}

impl PenaltySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PenaltySpec::Lasso => "lasso",
            PenaltySpec::Group(_) => "group",
            PenaltySpec::Nuclear(_) => "nuclear",
        }
    }
}

/// Full input of the global-null test.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    /// Design matrix for lasso/group problems; `None` for nuclear problems,
    /// whose operator lives in the penalty spec.
    pub design: Option<DMatrix<f64>>,
    pub response: Response,
    pub covariance: Covariance,
    pub penalty: PenaltySpec,
    /// Orthonormal basis (p×k) of `C⊥`, the unpenalized directions.
    pub cperp_basis: Option<DMatrix<f64>>,
}

impl Problem {
    pub fn lasso(x: DMatrix<f64>, y: DVector<f64>, covariance: Covariance) -> Self {
        Problem {
            design: Some(x),
            response: Response::Vector(y),
            covariance,
            penalty: PenaltySpec::Lasso,
            cperp_basis: None,
        }
    }

    pub fn group(
        x: DMatrix<f64>,
        y: DVector<f64>,
        covariance: Covariance,
        groups: GroupSpec,
    ) -> Self {
        Problem {
            design: Some(x),
            response: Response::Vector(y),
            covariance,
            penalty: PenaltySpec::Group(groups),
            cperp_basis: None,
        }
    }

    /// Nuclear-norm problem with `Σ = sigma2·I`.
    pub fn nuclear(op: NuclearOp, shape: (usize, usize), y: DMatrix<f64>, sigma2: f64) -> Self {
        Problem {
            design: None,
            response: Response::Matrix(y),
            covariance: Covariance::Scaled(sigma2),
            penalty: PenaltySpec::Nuclear(NuclearSpec { op, shape }),
            cperp_basis: None,
        }
    }

    pub fn with_cperp(mut self, basis: DMatrix<f64>) -> Self {
        self.cperp_basis = Some(basis);
        self
    }

    /// Same problem with a different response.
    pub fn with_response(&self, response: Response) -> Self {
        Problem {
            response,
            ..self.clone()
        }
    }

    /// Design matrix and response vector of a lasso/group problem.
    pub fn vector_parts(&self) -> Result<(&DMatrix<f64>, &DVector<f64>)> {
        let x = self.design.as_ref().ok_or(Error::InvalidInput {
            field: "X",
            detail: format!("{} penalty needs a design matrix", self.penalty.name()),
        })?;
        let y = self.response.as_vector().ok_or(Error::InvalidInput {
            field: "y",
            detail: format!("{} penalty needs a vector response", self.penalty.name()),
        })?;
        Ok((x, y))
    }

    /// Number of penalized coefficients.
    pub fn num_coefficients(&self) -> usize {
        match (&self.penalty, &self.design) {
            (PenaltySpec::Nuclear(spec), _) => spec.shape.0 * spec.shape.1,
            (_, Some(x)) => x.ncols(),
            (_, None) => 0,
        }
    }

    pub fn validate(self) -> Result<Self> {
        validate_problem(self)
    }
}

/// Checks every structural invariant; returns the problem untouched when they hold.
pub fn validate_problem(p: Problem) -> Result<Problem> {
    let n = match (&p.penalty, &p.response) {
        (PenaltySpec::Nuclear(spec), Response::Matrix(y)) => {
            spec.validate()?;
            let out = spec.output_shape();
            if y.shape() != out {
                return Err(Error::DimensionMismatch {
                    field: "y",
                    detail: format!(
                        "operator output is {}x{} but y is {}x{}",
                        out.0,
                        out.1,
                        y.nrows(),
                        y.ncols()
                    ),
                });
            }
            if p.design.is_some() {
                return Err(Error::InvalidInput {
                    field: "X",
                    detail: "nuclear problems carry their operator in the penalty spec".into(),
                });
            }
            if p.cperp_basis.is_some() {
                return Err(Error::InvalidInput {
                    field: "cperp_basis",
                    detail: "null-space projection is only supported for vector problems".into(),
                });
            }
            if !matches!(p.covariance, Covariance::Scaled(_)) {
                return Err(Error::InvalidInput {
                    field: "Sigma",
                    detail: "nuclear problems need a scalar multiple of the identity".into(),
                });
            }
            y.len()
        }
        (PenaltySpec::Nuclear(_), Response::Vector(_)) => {
            return Err(Error::DimensionMismatch {
                field: "y",
                detail: "nuclear penalty needs a matrix response".into(),
            })
        }
        (_, Response::Matrix(_)) => {
            return Err(Error::DimensionMismatch {
                field: "y",
                detail: format!("{} penalty needs a vector response", p.penalty.name()),
            })
        }
        (penalty, Response::Vector(y)) => {
            let x = p.design.as_ref().ok_or(Error::InvalidInput {
                field: "X",
                detail: format!("{} penalty needs a design matrix", penalty.name()),
            })?;
            if x.nrows() != y.len() {
                return Err(Error::DimensionMismatch {
                    field: "y",
                    detail: format!("X has {} rows but y has length {}", x.nrows(), y.len()),
                });
            }
            if x.ncols() == 0 {
                return Err(Error::DimensionMismatch {
                    field: "X",
                    detail: "design has no columns".into(),
                });
            }
            if let PenaltySpec::Group(groups) = penalty {
                groups.validate(x.ncols())?;
            }
            if let Some(basis) = &p.cperp_basis {
                if basis.nrows() != x.ncols() {
                    return Err(Error::DimensionMismatch {
                        field: "cperp_basis",
                        detail: format!(
                            "basis has {} rows but X has {} columns",
                            basis.nrows(),
                            x.ncols()
                        ),
                    });
                }
                let defect = orthonormality_defect(basis);
                if defect > 1e-12 {
                    return Err(Error::InvalidInput {
                        field: "cperp_basis",
                        detail: format!("columns are not orthonormal (defect {defect:e})"),
                    });
                }
            }
            y.len()
        }
    };
    validate_covariance(&p.covariance, n)?;
    if !response_is_finite(&p.response) {
        return Err(Error::InvalidInput {
            field: "y",
            detail: "response has non-finite entries".into(),
        });
    }
    Ok(p)
}

fn response_is_finite(r: &Response) -> bool {
    match r {
        Response::Vector(v) => v.iter().all(|x| x.is_finite()),
        Response::Matrix(m) => m.iter().all(|x| x.is_finite()),
    }
}

fn validate_covariance(cov: &Covariance, n: usize) -> Result<()> {
    match cov {
        Covariance::Scaled(s) => {
            if !(*s > 0.0 && s.is_finite()) {
                return Err(Error::NotPsd {
                    field: "Sigma",
                    min_eigenvalue: *s,
                });
            }
        }
        Covariance::Dense(m) => {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    field: "Sigma",
                    detail: format!("expected {n}x{n}, got {}x{}", m.nrows(), m.ncols()),
                });
            }
            let scale = m.abs().max().max(1.0);
            let asym = asymmetry(m);
            if asym > 1e-12 * scale {
                return Err(Error::NotSymmetric {
                    field: "Sigma",
                    asymmetry: asym,
                });
            }
            let eig = m.clone().symmetric_eigen();
            let min = eig.eigenvalues.min();
            let norm = eig.eigenvalues.amax();
            if min < -1e-10 * norm.max(f64::MIN_POSITIVE) {
                return Err(Error::NotPsd {
                    field: "Sigma",
                    min_eigenvalue: min,
                });
            }
        }
    }
    Ok(())
}

/// Removes the unpenalized directions: `X̃ = (I−P)X`, `ỹ = (I−P)y`, `Σ̃ = (I−P)Σ(I−P)`
/// with `P` the projection onto `X·span(C⊥)`.
pub fn apply_null_projection(p: Problem) -> Problem {
    let Some(basis) = p.cperp_basis.as_ref() else {
        return p;
    };
    let (Some(x), Response::Vector(y)) = (p.design.as_ref(), &p.response) else {
        return Problem {
            cperp_basis: None,
            ..p
        };
    };
    // X·C⊥ can vanish up to rounding, e.g. after a previous projection
    let q = column_space_basis_scaled(&(x * basis), x.norm());
    let n = x.nrows();
    let project_out = |m: &DMatrix<f64>| -> DMatrix<f64> { m - &q * (q.transpose() * m) };
    let x_t = project_out(x);
    let y_t = y - &q * (q.transpose() * y);
    let sigma = p.covariance.to_dense(n);
    let sigma_t = project_out(&project_out(&sigma).transpose());
    // exact symmetry
    let sigma_t = (&sigma_t + sigma_t.transpose()) * 0.5;
    Problem {
        design: Some(x_t),
        response: Response::Vector(y_t),
        covariance: if q.ncols() == 0 {
            p.covariance.clone()
        } else {
            Covariance::Dense(sigma_t)
        },
        penalty: p.penalty.clone(),
        cperp_basis: None,
    }
}

/// Which face of the unit ball the maximizer sits on.
#[derive(Debug, Clone, PartialEq)]
pub enum ActiveSet {
    /// Lasso: `η* = sign·e_index`.
    Coordinate { index: usize, sign: f64 },
    /// Group lasso: `η*` supported on one group.
    Group { index: usize },
    /// Nuclear norm: `η* = u₁v₁ᵀ`.
    SingularPair { u1: DVector<f64>, v1: DVector<f64> },
}

/// The first knot and everything that certifies its maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotCertificate {
    pub lambda1: f64,
    /// Maximizer over the unit ball of the penalty; column-major vectorized for matrices.
    pub eta_star: DVector<f64>,
    pub active: ActiveSet,
    /// Orthonormal basis (p×m) of the tangent space at `η*`.
    pub tangent_basis: DMatrix<f64>,
}

/// Flags a tie between the two largest candidate values.
pub(crate) fn check_tie(first: f64, second: f64) -> Result<()> {
    if first - second < 1e-9 * (1.0 + first.abs()) {
        return Err(Error::TieAtMax { first, second });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_x() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    }

    #[test]
    fn small_lasso_problem_validates() {
        let p = Problem::lasso(small_x(), DVector::from_vec(vec![1.0, 0.0, 0.0]), Covariance::Dense(DMatrix::identity(3, 3)));
        assert!(p.clone().validate().is_ok());
        assert_eq!(p.clone().validate().unwrap(), p);
    }

    #[test]
    fn response_length_mismatch() {
        let p = Problem::lasso(small_x(), DVector::zeros(4), Covariance::identity());
        assert!(matches!(p.validate(), Err(Error::DimensionMismatch { field: "y", .. })));
    }

    #[test]
    fn negative_eigenvalue_is_rejected() {
        let sigma = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.1, 1.0]));
        let p = Problem::lasso(small_x(), DVector::zeros(3), Covariance::Dense(sigma));
        match p.validate() {
            Err(Error::NotPsd { field, min_eigenvalue }) => {
                assert_eq!(field, "Sigma");
                assert!((min_eigenvalue + 0.1).abs() < 1e-12);
            }
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_sigma_is_rejected() {
        let mut sigma = DMatrix::identity(3, 3);
        sigma[(0, 1)] = 0.1;
        let p = Problem::lasso(small_x(), DVector::zeros(3), Covariance::Dense(sigma));
        assert!(matches!(p.validate(), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn bad_groups() {
        let x = DMatrix::identity(4, 4);
        let y = DVector::zeros(4);
        let overlapping = GroupSpec {
            groups: vec![vec![0, 1], vec![1, 2, 3]],
            weights: vec![1.0, 1.0],
        };
        let missing = GroupSpec {
            groups: vec![vec![0, 1], vec![2]],
            weights: vec![1.0, 1.0],
        };
        let bad_weight = GroupSpec {
            groups: vec![vec![0, 1], vec![2, 3]],
            weights: vec![1.0, 0.0],
        };
        for spec in [overlapping, missing, bad_weight] {
            let p = Problem::group(x.clone(), y.clone(), Covariance::identity(), spec);
            assert!(matches!(p.validate(), Err(Error::BadGroups(_))));
        }
    }

    #[test]
    fn mask_out_of_range() {
        let p = Problem::nuclear(NuclearOp::Mask(vec![(0, 0), (2, 0)]), (2, 2), DMatrix::zeros(2, 2), 1.0);
        assert!(matches!(p.validate(), Err(Error::InvalidInput { field: "mask", .. })));
    }

    #[test]
    fn projection_without_basis_is_identity() {
        let p = Problem::lasso(small_x(), DVector::from_vec(vec![1.0, 2.0, 3.0]), Covariance::identity());
        assert_eq!(apply_null_projection(p.clone()), p);
    }

    #[test]
    fn intercept_column_gives_centering_projector() {
        // column 0 is the intercept, C⊥ = span(e₀)
        let n = 4;
        let x = DMatrix::from_row_slice(n, 3, &[1.0, 0.5, 2.0, 1.0, -1.0, 0.0, 1.0, 3.0, 1.0, 1.0, 0.0, -2.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 4.0, 9.0]);
        let mut e0 = DMatrix::zeros(3, 1);
        e0[(0, 0)] = 1.0;
        let p = Problem::lasso(x.clone(), y.clone(), Covariance::identity()).with_cperp(e0);
        let q = apply_null_projection(p);
        let centering = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
        assert!((q.design.as_ref().unwrap() - &centering * &x).abs().max() < 1e-14);
        assert!((q.response.as_vector().unwrap() - &centering * &y).abs().max() < 1e-14);
        match &q.covariance {
            Covariance::Dense(s) => assert!((s - &centering).abs().max() < 1e-14),
            other => panic!("expected dense covariance, got {other:?}"),
        }
        assert!(q.cperp_basis.is_none());
    }

    #[test]
    fn degenerate_cperp_image_is_identity_projection() {
        // X·C⊥ = {0}
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let mut e1 = DMatrix::zeros(2, 1);
        e1[(1, 0)] = 1.0;
        let p = Problem::lasso(x.clone(), DVector::from_vec(vec![1.0, 2.0, 3.0]), Covariance::identity()).with_cperp(e1);
        let q = apply_null_projection(p);
        assert_eq!(q.design.unwrap(), x);
        assert_eq!(q.covariance, Covariance::identity());
    }
}
