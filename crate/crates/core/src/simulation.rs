//! Monte-Carlo studies of the tests in a one-way layout with four groups.
//!
//! Replication `r` draws its data from substream `(seed, r)` and, when the
//! eigenvalue test is run, its Monte-Carlo critical value from
//! `(seed, r, 1)`. Results are therefore independent of the number of worker
//! threads. `RANKFX_THREADS` caps the worker count.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contrasts::one_way;
use crate::covariance::{covariance_from_tables, f1_from_tables};
use crate::data::Dataset;
use crate::effects::effects_from_tables;
use crate::error::{Error, Result};
use crate::inference::{
    ats_box_test, ats_eigen_test, ats_f_test, kruskal_wallis, wald_type_statistic, Method, DEFAULT_MC_RUNS,
};
use crate::numerics::rng::RngStream;
use crate::ranks::build_rank_tables;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Normal,
    DoubleExponential,
    Lognormal,
}

impl Distribution {
    pub fn as_str(&self) -> &'static str {
        match self {
            Distribution::Normal => "normal",
            Distribution::DoubleExponential => "double-exponential",
            Distribution::Lognormal => "lognormal",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(Distribution::Normal),
            "double-exponential" | "dexp" | "laplace" => Ok(Distribution::DoubleExponential),
            "lognormal" | "lnorm" => Ok(Distribution::Lognormal),
            other => Err(Error::Domain(format!("unknown distribution '{other}'"))),
        }
    }
}

const N_SMALL: [usize; 4] = [5, 5, 5, 5];
const N_LARGE: [usize; 4] = [10, 20, 30, 40];

/// Location-scale model X_ik = μ_i + σ_i ε_ik (or exp(μ_i + σ_i Z_ik) for
/// lognormal data).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSetting {
    pub id: Option<u8>,
    pub sizes: Vec<usize>,
    pub sigma: Vec<f64>,
    pub mu: Vec<f64>,
    pub distribution: Distribution,
}

impl SimSetting {
    /// Settings 1–5: base sizes (5,5,5,5) or (10,20,30,40) plus `m` per group,
    /// with homoscedastic, positively or negatively paired scales. μ ≡ 0.
    pub fn standard(id: u8, m: usize, distribution: Distribution) -> Result<SimSetting> {
        let s2 = std::f64::consts::SQRT_2;
        let s5 = 5f64.sqrt();
        let increasing = vec![1.0, s2, 2.0, s5];
        let (base, sigma) = match id {
            1 => (N_SMALL, vec![1.0; 4]),
            2 => (N_LARGE, vec![1.0; 4]),
            3 => (N_SMALL, increasing),
            4 => (N_LARGE, increasing),
            5 => (N_LARGE, vec![s5, 2.0, s2, 1.0]),
            _ => return Err(Error::Domain(format!("setting must be 1-5, got {id}"))),
        };
        Ok(SimSetting {
            id: Some(id),
            sizes: base.iter().map(|n| n + m).collect(),
            sigma,
            mu: vec![0.0; 4],
            distribution,
        })
    }

    pub fn custom(sizes: Vec<usize>, sigma: Vec<f64>, mu: Vec<f64>, distribution: Distribution) -> Result<SimSetting> {
        if sizes.len() < 2 || sizes.len() != sigma.len() || sizes.len() != mu.len() {
            return Err(Error::Domain("sizes, sigma and mu need equal length ≥ 2".into()));
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) || mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::Domain("sigma must be positive and mu finite".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::Domain("group sizes must be positive".into()));
        }
        Ok(SimSetting {
            id: None,
            sizes,
            sigma,
            mu,
            distribution,
        })
    }

    pub fn with_mu(mut self, mu: Vec<f64>) -> Result<SimSetting> {
        if mu.len() != self.sizes.len() || mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::Domain("mu must match the number of groups".into()));
        }
        self.mu = mu;
        Ok(self)
    }
}

pub fn generate_dataset(setting: &SimSetting, rng: &mut RngStream) -> Dataset {
    let groups = setting
        .sizes
        .iter()
        .zip(&setting.sigma)
        .zip(&setting.mu)
        .map(|((&n, &s), &m)| {
            (0..n)
                .map(|_| match setting.distribution {
                    Distribution::Normal => m + s * rng.standard_normal(),
                    Distribution::DoubleExponential => m + s * rng.double_exponential(),
                    Distribution::Lognormal => (m + s * rng.standard_normal()).exp(),
                })
                .collect()
        })
        .collect();
    Dataset::from_values(groups).expect("generated data are finite and nonempty")
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub nsim: usize,
    pub alpha: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub mc_runs: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            nsim: 2000,
            alpha: 0.05,
            seed: 0,
            methods: Method::ALL.to_vec(),
            mc_runs: DEFAULT_MC_RUNS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRate {
    pub method: Method,
    pub rejections: usize,
    /// Replications where the test could not be computed.
    pub failures: usize,
    pub rate: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub setting: SimSetting,
    pub nsim: usize,
    pub alpha: f64,
    pub seed: u64,
    pub mc_runs: usize,
    pub rates: Vec<MethodRate>,
    /// Mean of p̂ over successful replications.
    pub mean_effects: Vec<f64>,
    pub runtime_secs: f64,
}

impl SimulationReport {
    pub fn rate(&self, method: Method) -> Option<f64> {
        self.rates.iter().find(|r| r.method == method).map(|r| r.rate)
    }
}

struct Outcome {
    // per method: Some(reject) or None on failure
    decisions: Vec<Option<bool>>,
    p: Option<Vec<f64>>,
}

fn replicate(setting: &SimSetting, config: &SimConfig, r: u64) -> Outcome {
    let stream = RngStream::new(config.seed).substream(r);
    let mut data_rng = stream.clone();
    let data = generate_dataset(setting, &mut data_rng);
    let tables = build_rank_tables(&data);
    let n = data.sizes();
    let est = effects_from_tables(&tables, &data);
    let cov = covariance_from_tables(&tables, &n, false);
    let h = one_way(data.d()).expect("d ≥ 2");
    let decisions = config
        .methods
        .iter()
        .map(|m| {
            let res = match m {
                Method::KruskalWallis => kruskal_wallis(&data, config.alpha),
                _ => {
                    let cov = match &cov {
                        Ok(c) => c,
                        Err(_) => return None,
                    };
                    match m {
                        Method::AtsF => f1_from_tables(&tables, &n)
                            .and_then(|(_, f1)| ats_f_test(&est, cov, &h, f1, config.alpha)),
                        Method::AtsBox => ats_box_test(&est, cov, &h, config.alpha),
                        Method::AtsEigen => {
                            ats_eigen_test(&est, cov, &h, config.alpha, config.mc_runs, stream.substream(1))
                        }
                        Method::Wald => wald_type_statistic(&est, cov, &h, config.alpha),
                        Method::KruskalWallis => unreachable!(),
                    }
                }
            };
            res.ok().map(|t| t.reject)
        })
        .collect();
    Outcome {
        decisions,
        p: Some(est.p),
    }
}

/// Runs `f` on a pool limited by `RANKFX_THREADS` when that is set.
pub fn with_thread_limit<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let limit = std::env::var("RANKFX_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    match limit {
        Some(k) if k > 0 => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

fn validate(config: &SimConfig) -> Result<()> {
    if config.nsim < 1 {
        return Err(Error::Domain("nsim must be positive".into()));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {}", config.alpha)));
    }
    if config.methods.is_empty() {
        return Err(Error::Domain("no method selected".into()));
    }
    Ok(())
}

/// Rejection rates of each method over `config.nsim` replications.
pub fn rejection_rates(setting: &SimSetting, config: &SimConfig) -> Result<SimulationReport> {
    validate(config)?;
    let start = Instant::now();
    let outcomes: Vec<Outcome> = with_thread_limit(|| {
        (0..config.nsim as u64)
            .into_par_iter()
            .map(|r| replicate(setting, config, r))
            .collect()
    });
    let rates = config
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let rejections = outcomes.iter().filter(|o| o.decisions[k] == Some(true)).count();
            let failures = outcomes.iter().filter(|o| o.decisions[k].is_none()).count();
            let valid = config.nsim - failures;
            let rate = if valid > 0 { rejections as f64 / valid as f64 } else { 0.0 };
            let se = if valid > 0 { (rate * (1.0 - rate) / valid as f64).sqrt() } else { 0.0 };
            MethodRate {
                method,
                rejections,
                failures,
                rate,
                se,
            }
        })
        .collect();
    let d = setting.sizes.len();
    let mut mean_effects = vec![0.0; d];
    let mut count = 0usize;
    for p in outcomes.iter().filter_map(|o| o.p.as_ref()) {
        for (m, v) in mean_effects.iter_mut().zip(p) {
            *m += v;
        }
        count += 1;
    }
    mean_effects.iter_mut().for_each(|m| *m /= count.max(1) as f64);
    Ok(SimulationReport {
        setting: setting.clone(),
        nsim: config.nsim,
        alpha: config.alpha,
        seed: config.seed,
        mc_runs: config.mc_runs,
        rates,
        mean_effects,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Type-I error study; the setting's μ must be constant for the null to hold.
pub fn type_one_error(setting: &SimSetting, config: &SimConfig) -> Result<SimulationReport> {
    if setting.mu.iter().any(|&m| m != setting.mu[0]) {
        return Err(Error::Domain("type-I error study needs equal locations".into()));
    }
    if config.nsim < 100 {
        return Err(Error::Domain(format!("nsim must be at least 100, got {}", config.nsim)));
    }
    rejection_rates(setting, config)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    OnePoint,
    Trend,
}

impl Alternative {
    pub fn mu(&self, delta: f64) -> Vec<f64> {
        match self {
            Alternative::OnePoint => vec![0.0, 0.0, 0.0, delta],
            Alternative::Trend => vec![delta / 4.0, delta / 2.0, 3.0 * delta / 4.0, delta],
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Alternative::OnePoint => "one-point",
            Alternative::Trend => "trend",
        }
    }
}

impl FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "one-point" | "onepoint" | "one" => Ok(Alternative::OnePoint),
            "trend" => Ok(Alternative::Trend),
            other => Err(Error::Domain(format!("unknown alternative '{other}'"))),
        }
    }
}

/// δ = 0.0, 0.1, …, 1.6.
pub fn default_delta_grid() -> Vec<f64> {
    (0..=16).map(|k| k as f64 / 10.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub delta: f64,
    pub rates: Vec<MethodRate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub alternative: Alternative,
    pub n: usize,
    pub nsim: usize,
    pub alpha: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub rows: Vec<PowerRow>,
    pub runtime_secs: f64,
}

/// Power of each method for normal data with `n` per group over a δ grid.
/// Every δ reuses the same replication streams.
pub fn power_curve(alternative: Alternative, deltas: &[f64], n: usize, config: &SimConfig) -> Result<PowerTable> {
    if deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::Domain("δ values must be finite and nonnegative".into()));
    }
    let start = Instant::now();
    let rows = deltas
        .iter()
        .map(|&delta| {
            let setting = SimSetting::custom(vec![n; 4], vec![1.0; 4], alternative.mu(delta), Distribution::Normal)?;
            let rep = rejection_rates(&setting, config)?;
            Ok(PowerRow { delta, rates: rep.rates })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerTable {
        alternative,
        n,
        nsim: config.nsim,
        alpha: config.alpha,
        seed: config.seed,
        methods: config.methods.clone(),
        rows,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Unweighted and weighted effects of one large sample from N(1,1), N(0,1),
/// N(−1,1) with the given group sizes.
pub fn effect_consistency_check(sizes: [usize; 3], seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if sizes.iter().any(|&n| n < 2) {
        return Err(Error::Domain("group sizes must be at least 2".into()));
    }
    let setting = SimSetting::custom(sizes.to_vec(), vec![1.0; 3], vec![1.0, 0.0, -1.0], Distribution::Normal)?;
    let data = generate_dataset(&setting, &mut RngStream::new(seed));
    let tables = build_rank_tables(&data);
    let est = effects_from_tables(&tables, &data);
    Ok((est.p, est.r.unwrap_or_default()))
}
