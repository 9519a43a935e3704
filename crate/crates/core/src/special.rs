//! Normal and chi distribution helpers that stay accurate far into the tails.
//!
//! Everything here works in log space. Ratios such as `(1 - Φ(30)) / (1 - Φ(29))`
//! are formed as differences of logs, never as quotients of underflowed numbers.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::{gamma_lr, gamma_ur};
use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI, SQRT_2};

/// `ln(sqrt(2π))`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Scaled complementary error function `exp(x²) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 3.0 {
        // erfc is well inside its accurate range here and exp(x²) < e^9
        return (x * x).exp() * erfc(x);
    }
    // Laplace continued fraction, evaluated backwards.
    let depth = 40 + (400.0 / x) as usize;
    let mut f = x;
    for k in (1..=depth).rev() {
        f = x + (k as f64 * 0.5) / f;
    }
    1.0 / (PI.sqrt() * f)
}

/// `ln(1 - Φ(x))` for the standard normal.
pub fn log_normal_sf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x < -5.0 {
        // 1 - Φ(x) is within 3e-7 of one; keep the small complement exact
        return (-0.5 * erfc(-x * FRAC_1_SQRT_2)).ln_1p();
    }
    let u = x * FRAC_1_SQRT_2;
    if u < 3.0 {
        (0.5 * erfc(u)).ln()
    } else {
        -LN_2 + erfcx(u).ln() - u * u
    }
}

/// `ln Φ(x)` for the standard normal.
pub fn log_normal_cdf(x: f64) -> f64 {
    log_normal_sf(-x)
}

/// `1 - Φ(x)`
pub fn normal_sf(x: f64) -> f64 {
    log_normal_sf(x).exp()
}

/// `Φ(x)`
pub fn normal_cdf(x: f64) -> f64 {
    log_normal_cdf(x).exp()
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// `Φ⁻¹(p)` for `p` in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    // two Newton steps on ln Φ against the accurate tail functions
    for _ in 0..2 {
        let (lp, target) = if x < 0.0 {
            (log_normal_cdf(x), p.ln())
        } else {
            (log_normal_sf(x), (-p).ln_1p())
        };
        let log_dens = -0.5 * x * x - LN_SQRT_2PI;
        let step = (lp - target) * (lp - log_dens).exp();
        x = if x < 0.0 { x - step } else { x + step };
    }
    x
}

/// `ln(e^a - e^b)` for `a >= b`.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a <= b {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp_m1()).ln()
}

/// `ln(e^a + e^b)`
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(Φ(b) - Φ(a))` for `a <= b`; either end may be infinite.
///
/// Picks whichever tail keeps the subtraction free of cancellation.
pub fn log_normal_interval(a: f64, b: f64) -> f64 {
    if a >= b {
        return f64::NEG_INFINITY;
    }
    if a >= 0.0 {
        log_sub_exp(log_normal_sf(a), log_normal_sf(b))
    } else if b <= 0.0 {
        log_sub_exp(log_normal_sf(-b), log_normal_sf(-a))
    } else {
        let outside = normal_sf(b) + normal_sf(-a);
        (-outside).ln_1p()
    }
}

/// `P(χ_k <= x)` for a chi variable with `k` degrees of freedom.
pub fn chi_cdf(k: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    gamma_lr(0.5 * k as f64, 0.5 * x * x)
}

/// `P(χ_k > x)` for a chi variable with `k` degrees of freedom.
pub fn chi_sf(k: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    gamma_ur(0.5 * k as f64, 0.5 * x * x)
}
