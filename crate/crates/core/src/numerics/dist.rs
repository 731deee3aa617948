//! CDFs, survival functions and quantiles for the normal, chi-square and F
//! distributions. Degrees of freedom may be non-integer.

use super::special::{beta_inc, erfc, gamma_p, gamma_q};
use crate::error::{Error, Result};

fn check_df(df: f64, name: &str) -> Result<()> {
    if df.is_finite() && df > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {df}")))
    }
}

fn check_prob(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability must lie in (0, 1), got {q}")))
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() {
        Err(Error::Domain("argument is NaN".into()))
    } else {
        Ok(())
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile: rational initial guess refined by Newton steps
/// on the erfc-based CDF.
pub fn normal_quantile(q: f64) -> Result<f64> {
    check_prob(q)?;
    let mut x = acklam(q);
    for _ in 0..3 {
        let err = if q < 0.5 {
            normal_cdf(x) - q
        } else {
            (1.0 - q) - 0.5 * erfc(x / std::f64::consts::SQRT_2)
        };
        let step = err / normal_pdf(x);
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    Ok(x)
}

fn acklam(p: f64) -> f64 {
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
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let low = 0.02425;
    if p < low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -acklam(1.0 - p)
    }
}

pub fn chi_square_cdf(x: f64, df: f64) -> Result<f64> {
    check_df(df, "df")?;
    check_x(x)?;
    Ok(if x <= 0.0 { 0.0 } else { gamma_p(0.5 * df, 0.5 * x) })
}

/// `P(X > x)` computed without cancellation.
pub fn chi_square_sf(x: f64, df: f64) -> Result<f64> {
    check_df(df, "df")?;
    check_x(x)?;
    Ok(if x <= 0.0 { 1.0 } else { gamma_q(0.5 * df, 0.5 * x) })
}

pub fn chi_square_quantile(q: f64, df: f64) -> Result<f64> {
    check_df(df, "df")?;
    check_prob(q)?;
    Ok(invert_cdf(|x| gamma_p(0.5 * df, 0.5 * x), q, df.max(1.0)))
}

pub fn f_cdf(x: f64, df1: f64, df2: f64) -> Result<f64> {
    check_df(df1, "df1")?;
    check_df(df2, "df2")?;
    check_x(x)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(beta_inc(0.5 * df1, 0.5 * df2, df1 * x / (df1 * x + df2)))
}

/// `P(F > x)` computed without cancellation.
pub fn f_sf(x: f64, df1: f64, df2: f64) -> Result<f64> {
    check_df(df1, "df1")?;
    check_df(df2, "df2")?;
    check_x(x)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(beta_inc(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * x)))
}

pub fn f_quantile(q: f64, df1: f64, df2: f64) -> Result<f64> {
    check_df(df1, "df1")?;
    check_df(df2, "df2")?;
    check_prob(q)?;
    Ok(invert_cdf(
        |x| beta_inc(0.5 * df1, 0.5 * df2, df1 * x / (df1 * x + df2)),
        q,
        1.0,
    ))
}

/// Bracketed bisection for a continuous nondecreasing CDF on `[0, ∞)`.
fn invert_cdf(cdf: impl Fn(f64) -> f64, q: f64, start: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = start;
    while cdf(hi) < q {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}
