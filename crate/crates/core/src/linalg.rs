//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Singular values below `rel_tol * largest` are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Thin SVD with singular values sorted in decreasing order.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
}

pub fn sorted_svd(m: &DMatrix<f64>) -> SortedSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(v_t.ncols(), order.len(), |i, j| v_t[(order[j], i)]);
    let singular_values = DVector::from_iterator(order.len(), order.iter().map(|&k| s[k]));
    SortedSvd {
        u,
        singular_values,
        v,
    }
}

/// Numerical rank at tolerance `RANK_TOL` relative to the largest singular value.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = m.clone().singular_values();
    let max = s.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > RANK_TOL * max).count()
}

/// Moore-Penrose pseudoinverse of a symmetric positive semidefinite matrix.
pub fn psd_pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut out = DMatrix::zeros(n, n);
    if max <= 0.0 {
        return out;
    }
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        if lam > RANK_TOL * max {
            let col = eig.eigenvectors.column(k);
            out += (col * col.transpose()) / lam;
        }
    }
    out
}

/// Orthonormal basis for the column space of `m`, at rank tolerance `RANK_TOL`.
pub fn column_space_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    column_space_basis_scaled(m, 0.0)
}

/// As [`column_space_basis`], but singular values at or below `RANK_TOL · scale`
/// also count as zero. Use when `m` is a product whose factors set the scale, so
/// that a product that vanishes up to rounding yields an empty basis.
pub fn column_space_basis_scaled(m: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = sorted_svd(m);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = RANK_TOL * max.max(scale);
    let rank = if max == 0.0 {
        0
    } else {
        svd.singular_values.iter().filter(|&&x| x > cut).count()
    };
    svd.u.columns(0, rank).into_owned()
}

/// Extends the orthonormal columns of `q` (n×k) to an orthonormal basis of ℝⁿ.
///
/// Returns the n×(n−k) complement. Candidates are the standard basis vectors,
/// orthogonalized twice against everything accepted so far.
pub fn orthonormal_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let k = q.ncols();
    let mut basis: Vec<DVector<f64>> = (0..k).map(|j| q.column(j).into_owned()).collect();
    let mut added = Vec::with_capacity(n - k);
    let mut candidates: Vec<(usize, f64)> = (0..n)
        .map(|i| {
            // prefer directions that q covers least
            let covered: f64 = (0..k).map(|j| q[(i, j)] * q[(i, j)]).sum();
            (i, covered)
        })
        .collect();
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (i, _) in candidates {
        if added.len() == n - k {
            break;
        }
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v.axpy(-proj, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v /= norm;
            basis.push(v.clone());
            added.push(v);
        }
    }
    let mut out = DMatrix::zeros(n, added.len());
    for (j, v) in added.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// Orthonormal basis of the orthogonal complement of a single nonzero vector,
/// read off a Householder reflector.
pub fn complement_of_vector(a: &DVector<f64>) -> DMatrix<f64> {
    let k = a.len();
    if k <= 1 {
        return DMatrix::zeros(k, 0);
    }
    let unit = a / a.norm();
    // reflector H = I - 2 w wᵀ with H e₁ = ±unit; columns 2..k of H span unit⊥
    let sign = if unit[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = unit.clone();
    w[0] += sign;
    let wn = w.norm();
    w /= wn;
    let h = DMatrix::identity(k, k) - 2.0 * &w * w.transpose();
    h.columns(1, k - 1).into_owned()
}

/// Largest absolute deviation from symmetry.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Largest deviation of `qᵀq` from the identity.
pub fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let gram = q.transpose() * q;
    let k = gram.nrows();
    (gram - DMatrix::identity(k, k)).abs().max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn complement_completes_basis() {
        let q = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0]) / 2f64.sqrt();
        let c = orthonormal_complement(&q);
        assert_eq!(c.ncols(), 2);
        let mut full = DMatrix::zeros(3, 3);
        full.set_column(0, &q.column(0));
        full.columns_mut(1, 2).copy_from(&c);
        assert!(orthonormality_defect(&full) < 1e-14);
    }

    #[test]
    fn householder_complement_is_orthogonal_to_vector() {
        let a = DVector::from_vec(vec![-0.3, 2.0, 1.0, 0.5]);
        let v = complement_of_vector(&a);
        assert_eq!(v.ncols(), 3);
        assert!(orthonormality_defect(&v) < 1e-14);
        assert!((v.transpose() * &a).norm() < 1e-14);
    }

    #[test]
    fn pinv_of_rank_deficient_matrix() {
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let m = b.transpose() * &b;
        let p = psd_pinv(&m);
        let back = &m * &p * &m;
        assert!((back - &m).abs().max() < 1e-10);
        assert_eq!(numerical_rank(&b), 1);
    }

    #[test]
    fn sorted_svd_is_descending() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 5.0, 0.0]);
        let s = sorted_svd(&m);
        assert_relative_eq!(s.singular_values[0], 5.0);
        assert_relative_eq!(s.singular_values[1], 1.0);
        let rebuilt = &s.u * DMatrix::from_diagonal(&s.singular_values) * s.v.transpose();
        assert!((rebuilt - m).abs().max() < 1e-14);
    }
}
