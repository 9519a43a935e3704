//! The Kac-Rice pivot: ratios of truncated Gaussian integrals weighted by
//! `det(Λ + zI)`, and selection intervals obtained by inverting the pivot in its mean.

use crate::error::{Error, Result};
use crate::special::{log_add_exp, log_normal_interval, LN_SQRT_2PI};

/// Everything the pivot needs from a frontend.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotInputs {
    pub lambda1: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub sigma2: f64,
    pub mu: f64,
    /// Eigenvalues of `Λ`; empty means `det ≡ 1`.
    pub lambda_eigs: Vec<f64>,
}

impl PivotInputs {
    /// Inputs with no curvature term and zero mean.
    pub fn gaussian(lambda1: f64, v_minus: f64, v_plus: f64, sigma2: f64) -> Self {
        PivotInputs {
            lambda1,
            v_minus,
            v_plus,
            sigma2,
            mu: 0.0,
            lambda_eigs: Vec::new(),
        }
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        PivotInputs {
            mu,
            ..self.clone()
        }
    }

    pub fn with_eigs(mut self, eigs: Vec<f64>) -> Self {
        self.lambda_eigs = eigs;
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    fn check(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidPivot(format!("sigma2 = {} is not positive", self.sigma2)));
        }
        if !self.lambda1.is_finite() || !self.mu.is_finite() {
            return Err(Error::InvalidPivot("lambda1 and mu must be finite".into()));
        }
        if self.v_minus.is_nan() || self.v_plus.is_nan() {
            return Err(Error::InvalidPivot("V bounds are NaN".into()));
        }
        if self.lambda_eigs.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidPivot("non-finite eigenvalue".into()));
        }
        let slack = 1e-9 * (1.0 + self.lambda1.abs());
        if self.v_minus > self.lambda1 + slack || self.lambda1 > self.v_plus + slack {
            return Err(Error::InvalidPivot(format!(
                "V- <= lambda1 <= V+ fails: {} <= {} <= {}",
                self.v_minus, self.lambda1, self.v_plus
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotResult {
    pub p_value: f64,
    /// `ln M[λ1, V+]`
    pub log_numerator: f64,
    /// `ln M[V−, V+]`
    pub log_denominator: f64,
    /// Relative error bound reported by the quadrature, summed over both integrals.
    pub quadrature_error_estimate: f64,
}

/// `Σ ln(eigᵢ + z)`, the log of `det(Λ + zI)`.
pub fn log_det_poly(eigs: &[f64], z: f64) -> Result<f64> {
    let tol = 1e-12 * (1.0 + z.abs());
    let mut acc = 0.0;
    for &e in eigs {
        let f = e + z;
        if f < -tol {
            return Err(Error::NegativeFactor { factor: f, z });
        }
        acc += f.max(0.0).ln();
    }
    Ok(acc)
}

/// `ln ∫ₐᵇ det(Λ+zI) φ((z−μ)/σ)/σ dz`.
pub fn m_integral(inputs: &PivotInputs, a: f64, b: f64) -> Result<f64> {
    Ok(m_integral_with_error(inputs, a, b)?.0)
}

/// As [`m_integral`], also returning a relative error estimate.
pub fn m_integral_with_error(inputs: &PivotInputs, a: f64, b: f64) -> Result<(f64, f64)> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::DomainError { a, b });
    }
    if a == b {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let sigma = inputs.sigma();
    let mu = inputs.mu;
    let ta = (a - mu) / sigma;
    let tb = (b - mu) / sigma;
    if inputs.lambda_eigs.is_empty() {
        return Ok((log_normal_interval(ta, tb), 1e-15));
    }
    let integrand = Integrand::new(
        &inputs.lambda_eigs,
        mu,
        sigma,
        a.min(inputs.v_minus),
        b.max(inputs.v_plus),
    )?;
    let lo = ta.max(integrand.root_lo);
    let hi = tb.min(integrand.root_hi);
    if lo >= hi {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    integrand.log_integral(lo, hi)
}

/// Relative distance within which a determinant root counts as sitting on a
/// truncation bound. Covers eigenvalue error of ill-conditioned `G`.
const ROOT_SNAP: f64 = 1e-5;

/// `ln g(t) = Σ ln|eigᵢ + μ + σt| − t²/2 − ln√(2π)` on the standardized axis.
/// The Jacobian `σ` of the substitution cancels the `1/σ` of the density.
///
/// Every factor `eig + z` must keep one sign on the truncation interval. Factors
/// with their root at or below the lower bound are nonnegative there; those with
/// their root at or above the upper bound are nonpositive and enter through
/// their absolute value. The overall sign is then constant and cancels in the
/// pivot ratio. A root strictly inside the interval is an error.
struct Integrand {
    rising: Vec<f64>,
    falling: Vec<f64>,
    mu: f64,
    sigma: f64,
    /// Largest root among the rising factors, standardized (−∞ if none).
    root_lo: f64,
    /// Smallest root among the falling factors, standardized (+∞ if none).
    root_hi: f64,
}

impl Integrand {
    fn new(eigs: &[f64], mu: f64, sigma: f64, lo_edge: f64, hi_edge: f64) -> Result<Self> {
        let mut rising = Vec::new();
        let mut falling = Vec::new();
        for &e in eigs {
            let root = -e;
            let tol = ROOT_SNAP * (sigma + root.abs());
            if lo_edge == f64::NEG_INFINITY || root <= lo_edge + tol {
                rising.push(e);
            } else if root >= hi_edge - tol {
                falling.push(e);
            } else {
                return Err(Error::NegativeFactor {
                    factor: e + lo_edge,
                    z: lo_edge,
                });
            }
        }
        let root_lo = rising.iter().map(|&e| (-e - mu) / sigma).fold(f64::NEG_INFINITY, f64::max);
        let root_hi = falling.iter().map(|&e| (-e - mu) / sigma).fold(f64::INFINITY, f64::min);
        Ok(Integrand {
            rising,
            falling,
            mu,
            sigma,
            root_lo,
            root_hi,
        })
    }

    fn log_g(&self, t: f64) -> f64 {
        if t <= self.root_lo || t >= self.root_hi {
            return f64::NEG_INFINITY;
        }
        let z = self.mu + self.sigma * t;
        let mut acc = -0.5 * t * t - LN_SQRT_2PI;
        for &e in &self.rising {
            acc += (e + z).ln();
        }
        for &e in &self.falling {
            acc += (-e - z).ln();
        }
        acc
    }

    /// Derivative of `log_g`; strictly decreasing on `(root_lo, root_hi)`.
    fn dlog_g(&self, t: f64) -> f64 {
        let z = self.mu + self.sigma * t;
        self.rising.iter().map(|&e| self.sigma / (e + z)).sum::<f64>()
            - self.falling.iter().map(|&e| self.sigma / (-e - z)).sum::<f64>()
            - t
    }

    /// Unconstrained maximizer of the log-concave integrand.
    fn mode(&self) -> f64 {
        let mut lo = if self.root_lo.is_finite() {
            self.root_lo
        } else {
            let mut t = self.root_hi.min(0.0) - 1.0;
            let mut step = 1.0;
            while self.dlog_g(t) <= 0.0 {
                step *= 2.0;
                t -= step;
            }
            t
        };
        let mut hi = if self.root_hi.is_finite() {
            self.root_hi
        } else {
            let mut step = 1.0;
            let mut t = lo.max(0.0) + step;
            while self.dlog_g(t) > 0.0 {
                lo = t;
                step *= 2.0;
                t += step;
            }
            t
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.dlog_g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Point in direction `dir` from `from` where `log_g` has dropped `drop`
    /// below `peak`, not going past `limit`.
    fn cutoff(&self, from: f64, dir: f64, limit: f64, peak: f64, drop: f64) -> f64 {
        let target = peak - drop;
        if limit.is_finite() && self.log_g(limit) >= target {
            return limit;
        }
        let mut inner = from;
        let mut step = 1.0;
        let mut outer = from + dir * step;
        loop {
            if (dir > 0.0 && outer >= limit) || (dir < 0.0 && outer <= limit) {
                outer = limit;
                break;
            }
            if self.log_g(outer) < target {
                break;
            }
            inner = outer;
            step *= 2.0;
            outer = from + dir * step;
        }
        for _ in 0..100 {
            let mid = 0.5 * (inner + outer);
            if mid == inner || mid == outer {
                break;
            }
            if self.log_g(mid) >= target {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        outer
    }

    fn log_integral(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        let peak_t = self.mode().clamp(lo, hi);
        let peak = self.log_g(peak_t);
        if peak == f64::NEG_INFINITY {
            // the whole interval sits on the determinant root
            return Ok((f64::NEG_INFINITY, 0.0));
        }
        const DROP: f64 = 60.0;
        let left = if peak_t > lo {
            self.cutoff(peak_t, -1.0, lo, peak, DROP)
        } else {
            lo
        };
        let right = if peak_t < hi {
            self.cutoff(peak_t, 1.0, hi, peak, DROP)
        } else {
            hi
        };
        let f = |t: f64| (self.log_g(t) - peak).exp();
        let mut breaks = vec![left];
        if peak_t > left && peak_t < right {
            breaks.push(peak_t);
        }
        breaks.push(right);
        let (value, err) = adaptive_gk(&f, &breaks, 1e-13);
        if !(value > 0.0) {
            return Err(Error::Numerical(format!(
                "pivot quadrature returned {value} on [{lo}, {hi}]"
            )));
        }
        Ok((peak + value.ln(), err / value))
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point Gauss rule.
pub(crate) fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let x = h * XGK[k];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod over consecutive panels `breaks`.
/// Splits the worst panel until the summed error is below `rel_tol · |total|`.
pub(crate) fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], rel_tol: f64) -> (f64, f64) {
    // start from a few equal pieces per panel so narrow features are not skipped
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let pieces = 4;
        for i in 0..pieces {
            let x0 = a + (b - a) * i as f64 / pieces as f64;
            let x1 = if i + 1 == pieces {
                b
            } else {
                a + (b - a) * (i + 1) as f64 / pieces as f64
            };
            let (v, e) = gk15(f, x0, x1);
            panels.push((x0, x1, v, e));
        }
    }
    for _ in 0..4000 {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() || err < f64::MIN_POSITIVE {
            break;
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .expect("at least one panel");
        let (a, b, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
    }
    // sum left to right so the result does not depend on refinement order
    panels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = panels.iter().map(|p| p.2).sum();
    let err = panels.iter().map(|p| p.3).sum();
    (total, err)
}

/// `p = M[λ1, V+] / M[V−, V+]`.
pub fn survival_pivot(inputs: &PivotInputs) -> Result<PivotResult> {
    inputs.check()?;
    let l1 = inputs.lambda1;
    if l1 <= inputs.v_minus {
        let (log_total, err) = m_integral_with_error(inputs, inputs.v_minus, inputs.v_plus)?;
        return Ok(PivotResult {
            p_value: 1.0,
            log_numerator: log_total,
            log_denominator: log_total,
            quadrature_error_estimate: err,
        });
    }
    if l1 >= inputs.v_plus {
        let (log_total, err) = m_integral_with_error(inputs, inputs.v_minus, inputs.v_plus)?;
        return Ok(PivotResult {
            p_value: 0.0,
            log_numerator: f64::NEG_INFINITY,
            log_denominator: log_total,
            quadrature_error_estimate: err,
        });
    }
    let (log_upper, e_upper) = m_integral_with_error(inputs, l1, inputs.v_plus)?;
    let (log_lower, e_lower) = m_integral_with_error(inputs, inputs.v_minus, l1)?;
    // splitting at λ1 keeps p and 1−p accurate and guarantees p ≤ 1
    let log_den = log_add_exp(log_upper, log_lower);
    if log_den == f64::NEG_INFINITY || log_den.is_nan() {
        return Err(Error::Numerical(format!(
            "pivot denominator vanished for lambda1 = {l1}, V = [{}, {}]",
            inputs.v_minus, inputs.v_plus
        )));
    }
    let p = (log_upper - log_den).exp().clamp(0.0, 1.0);
    Ok(PivotResult {
        p_value: p,
        log_numerator: log_upper,
        log_denominator: log_den,
        quadrature_error_estimate: e_upper + e_lower,
    })
}

/// `ln S(δ)` and `ln(1 − S(δ))`, both computed without cancellation.
fn log_survival_pair(inputs: &PivotInputs, delta: f64) -> Result<(f64, f64)> {
    let shifted = inputs.with_mu(delta);
    let log_upper = m_integral(&shifted, inputs.lambda1, inputs.v_plus)?;
    let log_lower = m_integral(&shifted, inputs.v_minus, inputs.lambda1)?;
    let log_den = log_add_exp(log_upper, log_lower);
    if !log_den.is_finite() {
        return Err(Error::Numerical(format!(
            "pivot denominator is {log_den} at delta = {delta}"
        )));
    }
    Ok((log_upper - log_den, log_lower - log_den))
}

/// Exact `1−α` interval for the mean `μ` of the selected statistic: all `δ` with
/// `α/2 < S(δ) < 1 − α/2`, where `S(δ)` is the pivot evaluated at mean `δ`.
pub fn selection_interval(inputs: &PivotInputs, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput {
            field: "alpha",
            detail: format!("{alpha} is not in (0, 1)"),
        });
    }
    inputs.check()?;
    if inputs.lambda1 <= inputs.v_minus || inputs.lambda1 >= inputs.v_plus {
        return Err(Error::InvalidPivot(
            "lambda1 sits on a truncation bound; the pivot is constant in the mean".into(),
        ));
    }
    let sigma = inputs.sigma();
    let tol = 1e-8 * sigma;
    let log_half = (0.5 * alpha).ln();
    // S(δ) = α/2: ln S(δ) − ln(α/2) crosses zero upward
    let lo = invert_monotone(inputs, sigma, tol, |(ls, _)| ls - log_half)?;
    // S(δ) = 1 − α/2, i.e. 1 − S(δ) = α/2: ln(1−S) − ln(α/2) crosses zero downward
    let hi = invert_monotone(inputs, sigma, tol, |(_, lc)| log_half - lc)?;
    Ok((lo, hi))
}

/// Root in `δ` of an increasing function of `(ln S(δ), ln(1 − S(δ)))`, found
/// by bracketing outward from `λ1` and bisecting to `tol`.
fn invert_monotone<F>(inputs: &PivotInputs, sigma: f64, tol: f64, g: F) -> Result<f64>
where
    F: Fn((f64, f64)) -> f64,
{
    let eval = |d: f64| -> Result<(f64, f64)> { log_survival_pair(inputs, d) };
    let start = inputs.lambda1;
    let s0 = eval(start)?;
    let g0 = g(s0);
    if g0 == 0.0 {
        return Ok(start);
    }
    let dir = if g0 > 0.0 { -1.0 } else { 1.0 };
    let mut inner = start;
    let mut inner_pair = s0;
    let mut step = sigma;
    let mut outer;
    let mut rounds = 0;
    loop {
        outer = start + dir * step;
        let pair = eval(outer)?;
        check_monotone(inner, inner_pair, outer, pair)?;
        if g(pair) * g0 <= 0.0 {
            break;
        }
        inner = outer;
        inner_pair = pair;
        step *= 2.0;
        rounds += 1;
        if rounds > 200 {
            return Err(Error::Numerical("could not bracket the selection interval".into()));
        }
    }
    let (mut a, mut b) = if inner < outer { (inner, outer) } else { (outer, inner) };
    let mut ga = g(eval(a)?);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(eval(m)?);
        if (gm <= 0.0) == (ga <= 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// `S` must not decrease as `δ` grows.
fn check_monotone(d1: f64, p1: (f64, f64), d2: f64, p2: (f64, f64)) -> Result<()> {
    let ((pl, ph), dh) = if d1 < d2 { ((p1, p2), d2) } else { ((p2, p1), d1) };
    // compare on whichever side of 1/2 the values live; logs of tiny tails stay meaningful
    let slack = 1e-9;
    let s_drop = pl.0 - ph.0;
    let c_rise = ph.1 - pl.1;
    if s_drop > slack && c_rise > slack {
        return Err(Error::NonMonotone { delta: dh });
    }
    Ok(())
}
