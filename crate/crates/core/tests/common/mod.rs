#![allow(dead_code)]

use kacrice::{Covariance, GroupSpec, NuclearOp, Problem};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Columns scaled to unit Euclidean norm.
pub fn standardize(mut x: DMatrix<f64>) -> DMatrix<f64> {
    for mut col in x.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    x
}

pub fn orthonormal(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    let q = gaussian_matrix(rng, n, p).qr().q();
    q.columns(0, p).into_owned()
}

pub fn random_lasso(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Problem {
    let x = standardize(gaussian_matrix(rng, n, p));
    let y = gaussian_vector(rng, n);
    Problem::lasso(x, y, Covariance::identity())
}

/// Random consecutive groups of sizes 1..=max_size with weights in [0.5, 2].
pub fn random_groups(rng: &mut ChaCha8Rng, p: usize, max_size: usize) -> GroupSpec {
    random_groups_in(rng, p, max_size, 0.5, 2.0)
}

pub fn random_groups_in(rng: &mut ChaCha8Rng, p: usize, max_size: usize, wlo: f64, whi: f64) -> GroupSpec {
    let mut sizes = Vec::new();
    let mut left = p;
    while left > 0 {
        let s = rng.random_range(1..=max_size.min(left));
        sizes.push(s);
        left -= s;
    }
    let weights = sizes.iter().map(|_| rng.random_range(wlo..whi)).collect();
    GroupSpec::consecutive(&sizes, weights)
}

pub fn random_group(rng: &mut ChaCha8Rng, n: usize, p: usize, max_size: usize) -> Problem {
    let x = gaussian_matrix(rng, n, p) / (n as f64).sqrt();
    let y = gaussian_vector(rng, n);
    let groups = random_groups(rng, p, max_size);
    Problem::group(x, y, Covariance::identity(), groups)
}

pub fn random_pca(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Problem {
    Problem::nuclear(NuclearOp::Identity, (n, p), gaussian_matrix(rng, n, p), 1.0)
}

pub fn random_mask(rng: &mut ChaCha8Rng, n: usize, p: usize, frac: f64) -> Vec<(usize, usize)> {
    let mut mask = Vec::new();
    for j in 0..p {
        for i in 0..n {
            if rng.random::<f64>() < frac {
                mask.push((i, j));
            }
        }
    }
    mask
}

/// Columns sharing a common factor with loading `rho`, and widely spread group
/// weights, so that competing groups can overtake the selected one from above.
pub fn correlated_group(rng: &mut ChaCha8Rng, n: usize, p: usize, max_size: usize, rho: f64) -> Problem {
    let z = gaussian_vector(rng, n);
    let mut x = gaussian_matrix(rng, n, p) * (1.0 - rho).sqrt();
    for mut col in x.column_iter_mut() {
        col.axpy(rho.sqrt(), &z, 1.0);
    }
    let x = x / (n as f64).sqrt();
    let y = gaussian_vector(rng, n);
    let groups = random_groups_in(rng, p, max_size, 0.2, 3.0);
    Problem::group(x, y, Covariance::identity(), groups)
}
