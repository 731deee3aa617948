//! ANOVA-type and Wald-type tests, the Kruskal–Wallis test and confidence
//! intervals for the unweighted effects.
//!
//! The Wald-type test needs the rank of `C V̂ C'` to be estimated
//! consistently, which is fragile in small samples; it tends to be liberal
//! and is provided mainly for comparison.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contrasts::HypothesisSpec;
use crate::covariance::CovarianceEstimate;
use crate::data::Dataset;
use crate::effects::EffectEstimates;
use crate::error::{Error, Result};
use crate::numerics::dist;
use crate::numerics::eigen::symmetric_eigenvalues;
use crate::numerics::linalg::Matrix;
use crate::numerics::rng::RngStream;
use crate::numerics::svd::pseudo_inverse_with_tol;
use crate::ranks::build_rank_tables;

/// Traces at or below this value make the ANOVA-type statistic undefined.
pub const TRACE_TOL: f64 = 1e-12;
/// Relative singular-value cutoff for the rank of `C V̂ C'`.
pub const WALD_RANK_TOL: f64 = 1e-10;
const EIGEN_NEG_TOL: f64 = 1e-10;
pub const DEFAULT_MC_RUNS: usize = 10_000;
pub const MIN_MC_RUNS: usize = 1_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AtsF,
    AtsBox,
    AtsEigen,
    Wald,
    KruskalWallis,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::KruskalWallis,
        Method::Wald,
        Method::AtsEigen,
        Method::AtsBox,
        Method::AtsF,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::AtsF => "ats-f",
            Method::AtsBox => "ats-box",
            Method::AtsEigen => "ats-eigen",
            Method::Wald => "wald",
            Method::KruskalWallis => "kruskal-wallis",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ats-f" | "f" => Ok(Method::AtsF),
            "ats-box" | "box" => Ok(Method::AtsBox),
            "ats-eigen" | "eigen" => Ok(Method::AtsEigen),
            "wald" | "wts" => Ok(Method::Wald),
            "kw" | "kruskal-wallis" => Ok(Method::KruskalWallis),
            other => Err(Error::Domain(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Identity,
    Logit,
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "none" => Ok(Transform::Identity),
            "logit" => Ok(Transform::Logit),
            other => Err(Error::Domain(format!("unknown transform '{other}'"))),
        }
    }
}

/// Degrees of freedom: `f` is the numerator (or chi-square) df, `f1` the
/// denominator df of the F approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Df {
    pub f: f64,
    pub f1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub df: Df,
    pub p_value: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub mc_runs: Option<usize>,
    pub seed: Option<u64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_dims(est: &EffectEstimates, cov: &CovarianceEstimate, h: &HypothesisSpec) -> Result<()> {
    let d = est.d();
    if cov.v.nrows() != d || h.t.nrows() != d || h.c.ncols() != d {
        return Err(Error::Domain(format!(
            "dimension mismatch: {d} effects, V̂ {}×{}, C with {} columns",
            cov.v.nrows(),
            cov.v.ncols(),
            h.c.ncols()
        )));
    }
    Ok(())
}

fn tv(cov: &CovarianceEstimate, h: &HypothesisSpec) -> Matrix {
    h.t.matmul(&cov.v)
}

/// Q_N = N p̂'T p̂ / tr(T V̂).
pub fn anova_type_statistic(est: &EffectEstimates, cov: &CovarianceEstimate, h: &HypothesisSpec) -> Result<f64> {
    check_dims(est, cov, h)?;
    let tr = tv(cov, h).trace();
    if tr <= TRACE_TOL {
        return Err(Error::Degenerate(format!(
            "tr(T V̂) = {tr:e}; the projected effects have no estimated variability"
        )));
    }
    Ok((est.total as f64 * h.t.quad_form(&est.p) / tr).max(0.0))
}

/// f̂ = tr²(T V̂) / tr(T V̂ T V̂).
pub fn box_df(cov: &CovarianceEstimate, h: &HypothesisSpec) -> Result<f64> {
    let m = tv(cov, h);
    let tr = m.trace();
    let tr2 = m.matmul(&m).trace();
    if tr <= TRACE_TOL || tr2 <= TRACE_TOL * TRACE_TOL {
        return Err(Error::Degenerate("degenerate trace in the Box approximation".into()));
    }
    Ok(tr * tr / tr2)
}

pub fn ats_box_test(est: &EffectEstimates, cov: &CovarianceEstimate, h: &HypothesisSpec, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let q = anova_type_statistic(est, cov, h)?;
    let f = box_df(cov, h)?;
    let crit = dist::chi_square_quantile(1.0 - alpha, f)? / f;
    Ok(TestResult {
        method: Method::AtsBox,
        statistic: q,
        df: Df { f, f1: None },
        p_value: dist::chi_square_sf(f * q, f)?,
        critical_value: crit,
        reject: q > crit,
        mc_runs: None,
        seed: None,
    })
}

pub fn ats_f_test(
    est: &EffectEstimates,
    cov: &CovarianceEstimate,
    h: &HypothesisSpec,
    f1: f64,
    alpha: f64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let q = anova_type_statistic(est, cov, h)?;
    let f = box_df(cov, h)?;
    let crit = dist::f_quantile(1.0 - alpha, f, f1)?;
    Ok(TestResult {
        method: Method::AtsF,
        statistic: q,
        df: Df { f, f1: Some(f1) },
        p_value: dist::f_sf(q, f, f1)?,
        critical_value: crit,
        reject: q > crit,
        mc_runs: None,
        seed: None,
    })
}

/// Eigenvalues of T V̂ T divided by their sum, descending, zeros dropped.
pub fn normalized_eigenvalues(cov: &CovarianceEstimate, h: &HypothesisSpec) -> Result<Vec<f64>> {
    let m = h.t.matmul(&cov.v).matmul(&h.t).symmetrize();
    let mut lambda = symmetric_eigenvalues(&m)?;
    let scale = lambda.first().copied().unwrap_or(0.0).abs().max(1.0);
    for l in lambda.iter_mut() {
        if *l < 0.0 {
            if *l >= -EIGEN_NEG_TOL * scale {
                *l = 0.0;
            } else {
                return Err(Error::Internal(format!("T V̂ T has negative eigenvalue {l:e}")));
            }
        }
    }
    let sum: f64 = lambda.iter().sum();
    if sum <= TRACE_TOL {
        return Err(Error::Degenerate("all eigenvalues of T V̂ T are zero".into()));
    }
    // rounding noise in the null space of T
    let cutoff = EIGEN_NEG_TOL * lambda[0];
    Ok(lambda.into_iter().filter(|&l| l > cutoff).map(|l| l / sum).collect())
}

/// Sorted draws of Σ_i w_i C_i² with independent standard normal C_i.
pub fn weighted_chi_square_draws(weights: &[f64], runs: usize, rng: &mut RngStream) -> Vec<f64> {
    let mut draws: Vec<f64> = (0..runs)
        .map(|_| {
            weights
                .iter()
                .map(|w| {
                    let z = rng.standard_normal();
                    w * z * z
                })
                .sum()
        })
        .collect();
    draws.sort_by(f64::total_cmp);
    draws
}

/// Index (0-based) of the ⌈(1−α)·runs⌉-th order statistic.
fn quantile_index(alpha: f64, runs: usize) -> usize {
    let k = ((1.0 - alpha) * runs as f64 - 1e-9).ceil() as usize;
    k.clamp(1, runs) - 1
}

pub fn ats_eigen_test(
    est: &EffectEstimates,
    cov: &CovarianceEstimate,
    h: &HypothesisSpec,
    alpha: f64,
    mc_runs: usize,
    mut rng: RngStream,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    if mc_runs < MIN_MC_RUNS {
        return Err(Error::Domain(format!("mc_runs must be at least {MIN_MC_RUNS}, got {mc_runs}")));
    }
    let q = anova_type_statistic(est, cov, h)?;
    let weights = normalized_eigenvalues(cov, h)?;
    let draws = weighted_chi_square_draws(&weights, mc_runs, &mut rng);
    let crit = draws[quantile_index(alpha, mc_runs)];
    let exceed = draws.len() - draws.partition_point(|&x| x < q);
    Ok(TestResult {
        method: Method::AtsEigen,
        statistic: q,
        df: Df {
            f: weights.len() as f64,
            f1: None,
        },
        p_value: (exceed + 1) as f64 / (mc_runs + 1) as f64,
        critical_value: crit,
        reject: q > crit,
        mc_runs: Some(mc_runs),
        seed: Some(rng.seed()),
    })
}

/// W_N = N (Cp̂)'(C V̂ C')⁺(Cp̂) against χ² with df equal to the estimated rank.
pub fn wald_type_statistic(
    est: &EffectEstimates,
    cov: &CovarianceEstimate,
    h: &HypothesisSpec,
    alpha: f64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    check_dims(est, cov, h)?;
    let m = h.c.matmul(&cov.v).matmul(&h.c.transpose()).symmetrize();
    let (pinv, rank) = pseudo_inverse_with_tol(&m, WALD_RANK_TOL);
    if rank == 0 {
        return Err(Error::Degenerate("C V̂ C' has rank 0".into()));
    }
    let cp = h.c.mat_vec(&est.p);
    let w = (est.total as f64 * pinv.quad_form(&cp)).max(0.0);
    let f = rank as f64;
    let crit = dist::chi_square_quantile(1.0 - alpha, f)?;
    Ok(TestResult {
        method: Method::Wald,
        statistic: w,
        df: Df { f, f1: None },
        p_value: dist::chi_square_sf(w, f)?,
        critical_value: crit,
        reject: w > crit,
        mc_runs: None,
        seed: None,
    })
}

/// Tie-corrected Kruskal–Wallis H against χ²_{d−1}.
pub fn kruskal_wallis(data: &Dataset, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let d = data.d();
    let total = data.total();
    if total < d + 1 {
        return Err(Error::InvalidData(format!("Kruskal–Wallis needs N ≥ d + 1, got N = {total}")));
    }
    let tables = build_rank_tables(data);
    let nf = total as f64;
    let mut h = 0.0;
    for i in 0..d {
        let r = tables.pooled(i);
        let s: f64 = r.iter().sum();
        h += s * s / r.len() as f64;
    }
    h = 12.0 / (nf * (nf + 1.0)) * h - 3.0 * (nf + 1.0);

    let mut all: Vec<f64> = data.groups().iter().flat_map(|g| g.values().iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut k = 0;
    while k < all.len() {
        let mut e = k + 1;
        while e < all.len() && all[e] == all[k] {
            e += 1;
        }
        let t = (e - k) as f64;
        ties += t * t * t - t;
        k = e;
    }
    let corr = 1.0 - ties / (nf * nf * nf - nf);
    if corr <= 0.0 {
        return Err(Error::Degenerate("all observations are tied".into()));
    }
    let stat = (h / corr).max(0.0);
    let f = (d - 1) as f64;
    let crit = dist::chi_square_quantile(1.0 - alpha, f)?;
    Ok(TestResult {
        method: Method::KruskalWallis,
        statistic: stat,
        df: Df { f, f1: None },
        p_value: dist::chi_square_sf(stat, f)?,
        critical_value: crit,
        reject: stat > crit,
        mc_runs: None,
        seed: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub index: usize,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub transform: Transform,
}

/// Pointwise intervals g⁻¹(g(p̂_i) ± z √(v̂_ii/N) g'(p̂_i)).
pub fn confidence_intervals(
    est: &EffectEstimates,
    cov: &CovarianceEstimate,
    alpha: f64,
    transform: Transform,
) -> Result<Vec<ConfidenceInterval>> {
    check_alpha(alpha)?;
    let z = dist::normal_quantile(1.0 - alpha / 2.0)?;
    let nf = est.total as f64;
    est.p
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let se = (cov.v[(i, i)].max(0.0) / nf).sqrt();
            let (lower, upper) = match transform {
                Transform::Identity => ((p - z * se).max(0.0), (p + z * se).min(1.0)),
                Transform::Logit => {
                    if p <= 0.0 || p >= 1.0 {
                        return Err(Error::Domain(format!(
                            "logit interval undefined for effect {} = {p}",
                            i + 1
                        )));
                    }
                    let g = (p / (1.0 - p)).ln();
                    let half = z * se / (p * (1.0 - p));
                    let inv = |x: f64| 1.0 / (1.0 + (-x).exp());
                    (inv(g - half), inv(g + half))
                }
            };
            Ok(ConfidenceInterval {
                index: i,
                estimate: p,
                lower,
                upper,
                level: 1.0 - alpha,
                transform,
            })
        })
        .collect()
}
