//! Uniformity statistics and the covariance-test baseline.

use crate::error::{HarnessError, Result};

/// One-sample Kolmogorov–Smirnov test against Unif(0,1).
///
/// Returns the statistic `D = sup |F_n − F|` and its asymptotic p-value, using
/// Stephens' small-sample correction to the argument of the Kolmogorov distribution.
pub fn ks_uniform(pvals: &[f64]) -> Result<(f64, f64)> {
    if pvals.is_empty() {
        return Err(HarnessError::EmptySample);
    }
    let d = ks_distance(pvals);
    let n = pvals.len() as f64;
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    Ok((d, kolmogorov_sf(lambda)))
}

fn ks_distance(pvals: &[f64]) -> f64 {
    let mut xs = pvals.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let x = x.clamp(0.0, 1.0);
        d.max((i + 1) as f64 / n - x).max(x - i as f64 / n)
    })
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // theta-function form converges fast for small λ
        let pi2 = std::f64::consts::PI.powi(2);
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda
            * (1..=20)
                .map(|k| {
                    let m = (2 * k - 1) as f64;
                    (-m * m * pi2 / (8.0 * lambda * lambda)).exp()
                })
                .sum::<f64>();
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let sf: f64 = (1..=100)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
        })
        .sum();
    (2.0 * sf).clamp(0.0, 1.0)
}

/// Empirical CDF of `pvals` at each grid point.
pub fn ecdf(pvals: &[f64], grid: &[f64]) -> Vec<(f64, f64)> {
    let mut xs = pvals.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len().max(1) as f64;
    grid.iter()
        .map(|&t| (t, xs.partition_point(|&x| x <= t) as f64 / n))
        .collect()
}

/// Fraction of the sample at or below `level`.
pub fn rejection_rate(pvals: &[f64], level: f64) -> f64 {
    if pvals.is_empty() {
        return f64::NAN;
    }
    pvals.iter().filter(|&&p| p <= level).count() as f64 / pvals.len() as f64
}

/// Binomial standard error of a rejection rate at `level` over `n` draws.
pub fn rate_standard_error(level: f64, n: usize) -> f64 {
    (level * (1.0 - level) / n as f64).sqrt()
}

/// Covariance-test p-value from the Exp(1) approximation to `λ1(λ1 − V−)/σ²`.
pub fn cov_test_baseline(lambda1: f64, v_minus: f64, sigma2: f64) -> f64 {
    if v_minus == f64::NEG_INFINITY {
        return 0.0;
    }
    (-lambda1 * (lambda1 - v_minus) / sigma2).exp().min(1.0)
}
