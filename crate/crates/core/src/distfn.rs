//! Special functions used by the p-values: the regularized incomplete beta
//! function (CDF, complement and quantile), chi-squared with one degree of
//! freedom, the standard normal, and the two-sided Student t quantities needed
//! by ordinary least-squares inference.
//!
//! Everything here is a pure function of its arguments and safe to call from
//! any number of threads.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A probability in `[0, 1]`. NaN is rejected.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || !(0.0..=1.0).contains(&value) {
            return domain(format!("probability must lie in [0, 1], got {value}"));
        }
        Ok(Self(value))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Shape parameters of a beta distribution, both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    a: f64,
    b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return domain(format!("beta shapes must be positive and finite, got a={a}, b={b}"));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// The distribution of `1 - X` when `X` has these parameters.
    pub fn swapped(&self) -> Self {
        Self { a: self.b, b: self.a }
    }
}

const CF_MAX_ITER: usize = 20_000;
const CF_TINY: f64 = 1e-300;
const QUANTILE_MAX_ITER: usize = 200;
const QUANTILE_TOL: f64 = 1e-12;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Stirling remainder `ln Γ(x) - [(x - 1/2) ln x - x + ln √(2π)]` for `x >= 10`.
fn stirling_remainder(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
                - r2 * (1.0 / 1680.0
                    - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0 - r2 / 156.0))))))
}

/// `ln Γ(big) - ln Γ(big + small)` without the cancellation of two large log-gammas.
fn ln_gamma_ratio(small: f64, big: f64) -> f64 {
    debug_assert!(big >= 10.0);
    let sum = big + small;
    -(big - 0.5) * (small / big).ln_1p() - small * sum.ln() + small + stirling_remainder(big)
        - stirling_remainder(sum)
}

/// Natural log of the complete beta function B(a, b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, big) = if a <= b { (a, b) } else { (b, a) };
    if big < 10.0 {
        libm::lgamma(small) + libm::lgamma(big) - libm::lgamma(small + big)
    } else {
        libm::lgamma(small) + ln_gamma_ratio(small, big)
    }
}

/// Continued fraction for I_x(a, b) (modified Lentz); converges fast for
/// `x < (a + 1) / (a + b + 2)`.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let clamp = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };

    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + even * d);
        c = clamp(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + odd * d);
        c = clamp(1.0 + odd / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
            return Ok(ln_front.exp() * h / a);
        }
    }
    Err(Error::NonConvergence {
        what: "incomplete beta continued fraction",
        iterations: CF_MAX_ITER,
    })
}

/// Returns `(I_x(a, b), 1 - I_x(a, b))`, each computed without cancellation
/// on the side that is evaluated directly.
fn beta_both_tails(x: f64, p: BetaParams) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("beta argument must lie in [0, 1], got {x}"));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == 1.0 {
        return Ok((1.0, 0.0));
    }
    let (a, b) = (p.a, p.b);
    if x < (a + 1.0) / (a + b + 2.0) {
        let lower = beta_continued_fraction(x, a, b)?.min(1.0);
        Ok((lower, 1.0 - lower))
    } else {
        let upper = beta_continued_fraction(1.0 - x, b, a)?.min(1.0);
        Ok((1.0 - upper, upper))
    }
}

/// Beta distribution function `P(B_{a,b} <= x)`.
pub fn beta_cdf(x: f64, p: BetaParams) -> Result<f64> {
    beta_both_tails(x, p).map(|(lower, _)| lower)
}

/// Upper tail `P(B_{a,b} > x)`, accurate when it is tiny.
pub fn beta_sf(x: f64, p: BetaParams) -> Result<f64> {
    beta_both_tails(x, p).map(|(_, upper)| upper)
}

/// Beta density.
pub fn beta_pdf(x: f64, p: BetaParams) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    ((p.a - 1.0) * x.ln() + (p.b - 1.0) * (-x).ln_1p() - ln_beta(p.a, p.b)).exp()
}

#[derive(Clone, Copy)]
enum Tail {
    Lower,
    Upper,
}

/// Safeguarded Newton on `[0, 1]`: the bracket shrinks on every iteration
/// and a bisection step is taken whenever Newton would leave it.
fn beta_root(target: f64, p: BetaParams, tail: Tail) -> Result<f64> {
    // g(x) is increasing in x for both tails.
    let g = |x: f64| -> Result<f64> {
        let (lower, upper) = beta_both_tails(x, p)?;
        Ok(match tail {
            Tail::Lower => lower - target,
            Tail::Upper => target - upper,
        })
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = (p.a / (p.a + p.b)).clamp(1e-300, 1.0 - 1e-16);
    let mut step_old = 1.0_f64;
    for _ in 0..QUANTILE_MAX_ITER {
        let gx = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = beta_pdf(x, p);
        let newton = if slope > 0.0 && slope.is_finite() {
            Some(gx / slope)
        } else {
            None
        };
        let (next, step) = match newton {
            Some(dx) if (x - dx) > lo && (x - dx) < hi && dx.abs() < 0.5 * step_old.abs() => {
                (x - dx, dx)
            }
            _ => {
                // Bisect geometrically near zero so tiny quantiles are reached quickly.
                let mid = if lo > 0.0 && hi / lo > 4.0 {
                    (lo * hi).sqrt()
                } else if lo == 0.0 && hi < 1e-3 {
                    hi * 1e-3
                } else {
                    0.5 * (lo + hi)
                };
                (mid, x - mid)
            }
        };
        step_old = step;
        // Relative to the nearer endpoint so quantiles close to 1 keep precision in 1 - x.
        let scale = next.min(1.0 - next).max(f64::EPSILON);
        if (next - x).abs() <= QUANTILE_TOL * scale
            || hi - lo <= QUANTILE_TOL * 1e-3 * hi.min(1.0 - lo)
        {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonConvergence {
        what: "beta quantile",
        iterations: QUANTILE_MAX_ITER,
    })
}

/// Quantile function of the beta distribution; endpoints map exactly to 0 and 1.
pub fn beta_quantile(prob: f64, p: BetaParams) -> Result<f64> {
    if prob.is_nan() || !(0.0..=1.0).contains(&prob) {
        return domain(format!("beta quantile probability must lie in [0, 1], got {prob}"));
    }
    if prob == 0.0 {
        return Ok(0.0);
    }
    if prob == 1.0 {
        return Ok(1.0);
    }
    if prob <= 0.5 {
        beta_root(prob, p, Tail::Lower)
    } else {
        beta_root(1.0 - prob, p, Tail::Upper)
    }
}

/// The `x` with `P(B_{a,b} > x) = tail`; keeps full relative precision for tiny tails.
pub fn beta_quantile_upper(tail: f64, p: BetaParams) -> Result<f64> {
    if tail.is_nan() || !(0.0..=1.0).contains(&tail) {
        return domain(format!("tail probability must lie in [0, 1], got {tail}"));
    }
    if tail == 0.0 {
        return Ok(1.0);
    }
    if tail == 1.0 {
        return Ok(0.0);
    }
    if tail <= 0.5 {
        beta_root(tail, p, Tail::Upper)
    } else {
        beta_root(1.0 - tail, p, Tail::Lower)
    }
}

/// `1 - (1 - tail)^count`: the chance that at least one of `count` independent
/// draws lands in a tail of probability `tail`. Evaluated in log space.
pub fn at_least_one(tail: f64, count: f64) -> f64 {
    if tail >= 1.0 {
        return 1.0;
    }
    if tail <= 0.0 {
        return 0.0;
    }
    (-(count * (-tail).ln_1p()).exp_m1()).clamp(0.0, 1.0)
}

/// Per-draw tail probability `t` solving `1 - (1 - t)^count = alpha`.
pub fn per_draw_tail(alpha: f64, count: f64) -> f64 {
    -((-alpha).ln_1p() / count).exp_m1()
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Acklam's rational approximation (relative error about 1e-9) for `p <= 0.5`,
/// polished with two Halley steps against `erfc`.
fn normal_quantile_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_671_464_300_843,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let mut x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let err = normal_cdf(x) - p;
        let u = err * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Standard normal quantile; `p` must lie strictly inside `(0, 1)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("normal quantile needs p in (0, 1), got {p}"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p < 0.5 {
        Ok(normal_quantile_lower(p))
    } else {
        Ok(-normal_quantile_lower(1.0 - p))
    }
}

/// Chi-squared (one degree of freedom) distribution function, `erf(√(x/2))`.
pub fn chisq1_cdf(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return domain(format!("chi-squared argument must be nonnegative, got {x}"));
    }
    Ok(libm::erf((0.5 * x).sqrt()))
}

/// Chi-squared (one degree of freedom) upper tail.
pub fn chisq1_sf(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return domain(format!("chi-squared argument must be nonnegative, got {x}"));
    }
    Ok(libm::erfc((0.5 * x).sqrt()))
}

/// Two-sided p-value `P(|T_df| >= |t|)` for Student's t.
pub fn student_t_two_sided_p(t: f64, df: f64) -> Result<f64> {
    if !(df > 0.0) || t.is_nan() {
        return domain(format!("invalid t statistic {t} or degrees of freedom {df}"));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let t2 = t * t;
    // P(|T| >= t) = I_{df/(df+t^2)}(df/2, 1/2) = P(B_{1/2,df/2} >= t^2/(df+t^2)).
    let params = BetaParams::new(0.5, 0.5 * df)?;
    beta_sf(t2 / (df + t2), params)
}

/// The `t` with `P(|T_df| <= t) = gamma`.
pub fn student_t_two_sided_quantile(gamma: f64, df: f64) -> Result<f64> {
    if !(df > 0.0) {
        return domain(format!("degrees of freedom must be positive, got {df}"));
    }
    if gamma == 1.0 {
        return Ok(f64::INFINITY);
    }
    // T^2/(df + T^2) ~ Beta(1/2, df/2).
    let w = beta_quantile(gamma, BetaParams::new(0.5, 0.5 * df)?)?;
    Ok((df * w / (1.0 - w)).sqrt())
}
