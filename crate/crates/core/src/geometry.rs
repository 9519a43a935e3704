//! Penalty norms, their duals, and Euclidean projections onto their epigraphs.

use nalgebra::{DMatrix, DVector};

use crate::linalg::sorted_svd;
use crate::model::{GroupSpec, PenaltySpec};

/// The unit-ball geometry of a penalty, acting on coefficient vectors.
/// Matrices are vectorized column-major.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Lasso,
    Group(GroupSpec),
    Nuclear { shape: (usize, usize) },
}

impl Geometry {
    pub fn from_penalty(spec: &PenaltySpec) -> Self {
        match spec {
            PenaltySpec::Lasso => Geometry::Lasso,
            PenaltySpec::Group(g) => Geometry::Group(g.clone()),
            PenaltySpec::Nuclear(n) => Geometry::Nuclear { shape: n.shape },
        }
    }

    /// The penalty `P(u)`.
    pub fn norm(&self, u: &DVector<f64>) -> f64 {
        match self {
            Geometry::Lasso => u.lp_norm(1),
            Geometry::Group(spec) => spec
                .groups
                .iter()
                .zip(&spec.weights)
                .map(|(g, w)| w * group_norm(u, g))
                .sum(),
            Geometry::Nuclear { shape } => {
                as_matrix(u, *shape).singular_values().iter().sum()
            }
        }
    }

    /// The dual norm `Q(u) = max{ηᵀu : P(η) ≤ 1}`.
    pub fn dual_norm(&self, u: &DVector<f64>) -> f64 {
        match self {
            Geometry::Lasso => u.amax(),
            Geometry::Group(spec) => spec
                .groups
                .iter()
                .zip(&spec.weights)
                .map(|(g, w)| group_norm(u, g) / w)
                .fold(0.0, f64::max),
            Geometry::Nuclear { shape } => as_matrix(u, *shape)
                .singular_values()
                .iter()
                .cloned()
                .fold(0.0, f64::max),
        }
    }

    /// Euclidean projection of `(u, s)` onto `{(u, s) : P(u) ≤ s}`.
    pub fn project_epigraph(&self, u: &DVector<f64>, s: f64) -> (DVector<f64>, f64) {
        match self {
            Geometry::Lasso => {
                let m: Vec<f64> = u.iter().map(|x| x.abs()).collect();
                let theta = weighted_epigraph_shift(&m, &vec![1.0; m.len()], s);
                let out = u.map(|x| x.signum() * (x.abs() - theta).max(0.0));
                (out, s + theta)
            }
            Geometry::Group(spec) => {
                let m: Vec<f64> = spec.groups.iter().map(|g| group_norm(u, g)).collect();
                let theta = weighted_epigraph_shift(&m, &spec.weights, s);
                let mut out = DVector::zeros(u.len());
                for ((g, w), mg) in spec.groups.iter().zip(&spec.weights).zip(&m) {
                    let shrunk = (mg - w * theta).max(0.0);
                    if shrunk > 0.0 {
                        let scale = shrunk / mg;
                        for &j in g {
                            out[j] = u[j] * scale;
                        }
                    }
                }
                (out, s + theta)
            }
            Geometry::Nuclear { shape } => {
                let svd = sorted_svd(&as_matrix(u, *shape));
                let d: Vec<f64> = svd.singular_values.iter().cloned().collect();
                let theta = weighted_epigraph_shift(&d, &vec![1.0; d.len()], s);
                let shrunk = DVector::from_iterator(d.len(), d.iter().map(|x| (x - theta).max(0.0)));
                let m = &svd.u * DMatrix::from_diagonal(&shrunk) * svd.v.transpose();
                (DVector::from_column_slice(m.as_slice()), s + theta)
            }
        }
    }
}

/// Free-function form of [`Geometry::project_epigraph`].
pub fn epigraph_project(geom: &Geometry, u: &DVector<f64>, s: f64) -> (DVector<f64>, f64) {
    geom.project_epigraph(u, s)
}

pub fn group_norm(u: &DVector<f64>, g: &[usize]) -> f64 {
    g.iter().map(|&j| u[j] * u[j]).sum::<f64>().sqrt()
}

pub fn as_matrix(u: &DVector<f64>, shape: (usize, usize)) -> DMatrix<f64> {
    DMatrix::from_column_slice(shape.0, shape.1, u.as_slice())
}

/// For the epigraph of `Σ wᵢ mᵢ` with block magnitudes `m ≥ 0`, the projection
/// shrinks each block to `(mᵢ − wᵢθ)₊` and lifts `s` to `s + θ`, where `θ ≥ 0` solves
/// `Σ wᵢ(mᵢ − wᵢθ)₊ = s + θ`. Returns `θ`; zero means the point is already feasible,
/// and the polar cone is mapped to the apex.
fn weighted_epigraph_shift(m: &[f64], w: &[f64], s: f64) -> f64 {
    let value: f64 = m.iter().zip(w).map(|(mi, wi)| mi * wi).sum();
    if value <= s {
        return 0.0;
    }
    // breakpoints mᵢ/wᵢ in decreasing order
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.sort_by(|&a, &b| (m[b] / w[b]).total_cmp(&(m[a] / w[a])));
    let mut wm = 0.0;
    let mut ww = 0.0;
    for (k, &i) in order.iter().enumerate() {
        wm += w[i] * m[i];
        ww += w[i] * w[i];
        let theta = (wm - s) / (1.0 + ww);
        let upper = m[i] / w[i];
        let lower = order.get(k + 1).map_or(0.0, |&j| m[j] / w[j]);
        if theta <= upper && theta >= lower {
            return theta.max(0.0);
        }
    }
    // every block shrinks to zero: the apex, reached when s + θ = 0
    (-s).max(0.0)
}
