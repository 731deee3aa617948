//! End-to-end analysis of a dataset: effects, covariance, tests and
//! confidence intervals collected into a serializable report.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contrasts::{one_way, projection_from_contrast, two_way_hypotheses, HypothesisLabel, HypothesisSpec};
use crate::covariance::{covariance_from_tables, f1_from_tables};
use crate::data::{Dataset, Layout};
use crate::effects::{additive_decomposition, effects_from_tables, AdditiveDecomposition};
use crate::error::{Error, Result};
use crate::inference::{
    ats_box_test, ats_eigen_test, ats_f_test, confidence_intervals, kruskal_wallis, wald_type_statistic,
    ConfidenceInterval, Method, TestResult, Transform, DEFAULT_MC_RUNS,
};
use crate::numerics::linalg::Matrix;
use crate::numerics::rng::RngStream;
use crate::ranks::build_rank_tables;

#[derive(Clone, Debug, PartialEq)]
pub enum HypothesisRequest {
    OneWay,
    MainA,
    MainB,
    InteractionAb,
    Custom(Matrix),
}

impl FromStr for HypothesisRequest {
    type Err = Error;

    /// Parses `oneway`, `A`, `B` or `AB`; custom matrices are supplied directly.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "oneway" | "one-way" => Ok(HypothesisRequest::OneWay),
            "A" | "a" => Ok(HypothesisRequest::MainA),
            "B" | "b" => Ok(HypothesisRequest::MainB),
            "AB" | "ab" => Ok(HypothesisRequest::InteractionAb),
            other => Err(Error::Domain(format!("unknown hypothesis '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    /// Empty selects all main effects and the interaction for two-way
    /// layouts, and the one-way hypothesis otherwise.
    pub hypotheses: Vec<HypothesisRequest>,
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub transform: Transform,
    pub mc_runs: usize,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            hypotheses: Vec::new(),
            methods: vec![Method::AtsF, Method::AtsBox, Method::AtsEigen, Method::Wald],
            alpha: 0.05,
            transform: Transform::Logit,
            mc_runs: DEFAULT_MC_RUNS,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectRow {
    pub index: usize,
    pub label: String,
    pub n: usize,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportTest {
    pub hypothesis: String,
    pub label: HypothesisLabel,
    pub result: TestResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub mc_runs: usize,
    pub alpha: f64,
    pub transform: Transform,
    pub total: usize,
    pub versions: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub layout: Option<Layout>,
    pub effects: Vec<EffectRow>,
    pub weighted_effects: Vec<f64>,
    /// Entry `[l][i]` is ŵ_li.
    pub pairwise: Vec<Vec<f64>>,
    pub covariance: Vec<Vec<f64>>,
    /// Rank dispersions and the F-approximation denominator df, when defined.
    pub rank_dispersion: Option<Vec<f64>>,
    pub f1: Option<f64>,
    pub decomposition: Option<AdditiveDecomposition>,
    pub tests: Vec<ReportTest>,
    pub cis: Vec<ConfidenceInterval>,
    pub metadata: Metadata,
}

impl Report {
    /// First test matching a hypothesis name and method.
    pub fn test(&self, hypothesis: &str, method: Method) -> Option<&TestResult> {
        self.tests
            .iter()
            .find(|t| t.hypothesis == hypothesis && t.result.method == method)
            .map(|t| &t.result)
    }
}

fn resolve_hypotheses(data: &Dataset, requests: &[HypothesisRequest]) -> Result<Vec<(String, HypothesisSpec)>> {
    let d = data.d();
    let two_way = match data.layout() {
        Some(Layout::TwoWay { factors, levels_a, levels_b }) => {
            Some((factors.clone(), levels_a.len(), levels_b.len()))
        }
        _ => None,
    };
    let one_way_name = match data.layout() {
        Some(Layout::OneWay { factor, .. }) => factor.clone(),
        _ => "one-way".to_string(),
    };
    let defaults;
    let requests = if requests.is_empty() {
        defaults = if two_way.is_some() {
            vec![HypothesisRequest::MainA, HypothesisRequest::MainB, HypothesisRequest::InteractionAb]
        } else {
            vec![HypothesisRequest::OneWay]
        };
        &defaults[..]
    } else {
        requests
    };

    let mut out = Vec::new();
    let mut customs = 0;
    for req in requests {
        let need_two_way = || {
            two_way.clone().ok_or_else(|| {
                Error::Layout("main effects and interaction need a two-way layout".into())
            })
        };
        let item = match req {
            HypothesisRequest::OneWay => (one_way_name.clone(), one_way(d)?),
            HypothesisRequest::MainA => {
                let (f, a, b) = need_two_way()?;
                (f[0].clone(), two_way_hypotheses(a, b)?.0)
            }
            HypothesisRequest::MainB => {
                let (f, a, b) = need_two_way()?;
                (f[1].clone(), two_way_hypotheses(a, b)?.1)
            }
            HypothesisRequest::InteractionAb => {
                let (f, a, b) = need_two_way()?;
                (format!("{}:{}", f[0], f[1]), two_way_hypotheses(a, b)?.2)
            }
            HypothesisRequest::Custom(c) => {
                if c.ncols() != d {
                    return Err(Error::InvalidContrast(format!(
                        "contrast has {} columns but there are {d} groups",
                        c.ncols()
                    )));
                }
                customs += 1;
                let name = if customs == 1 { "custom".to_string() } else { format!("custom{customs}") };
                (name, projection_from_contrast(c, HypothesisLabel::Custom)?)
            }
        };
        out.push(item);
    }
    Ok(out)
}

pub fn analyze(data: &Dataset, options: &AnalysisOptions) -> Result<Report> {
    data.require_replication().map_err(|e| e.context("validating data"))?;
    if options.methods.is_empty() {
        return Err(Error::Domain("no test method selected".into()));
    }
    let tables = build_rank_tables(data);
    let n = data.sizes();
    let est = effects_from_tables(&tables, data);
    let cov = covariance_from_tables(&tables, &n, false).map_err(|e| e.context("covariance estimate"))?;
    let f1 = f1_from_tables(&tables, &n);
    let hypotheses = resolve_hypotheses(data, &options.hypotheses)?;

    let mut tests = Vec::new();
    let base = RngStream::new(options.seed);
    for (k, (name, h)) in hypotheses.iter().enumerate() {
        for &m in &options.methods {
            let ctx = || format!("hypothesis {name}, method {m}");
            let result = match m {
                Method::AtsF => {
                    let f1 = f1.as_ref().map_err(|e| Error::Degenerate(e.to_string()).context(ctx()))?.1;
                    ats_f_test(&est, &cov, h, f1, options.alpha)
                }
                Method::AtsBox => ats_box_test(&est, &cov, h, options.alpha),
                Method::AtsEigen => ats_eigen_test(&est, &cov, h, options.alpha, options.mc_runs, base.substream(k as u64)),
                Method::Wald => wald_type_statistic(&est, &cov, h, options.alpha),
                Method::KruskalWallis => continue,
            }
            .map_err(|e| e.context(ctx()))?;
            tests.push(ReportTest {
                hypothesis: name.clone(),
                label: h.label,
                result,
            });
        }
    }
    if options.methods.contains(&Method::KruskalWallis) {
        let result = kruskal_wallis(data, options.alpha).map_err(|e| e.context("Kruskal–Wallis"))?;
        let name = match data.layout() {
            Some(Layout::OneWay { factor, .. }) => factor.clone(),
            _ => "one-way".into(),
        };
        tests.push(ReportTest {
            hypothesis: name,
            label: HypothesisLabel::OneWay,
            result,
        });
    }

    let cis = confidence_intervals(&est, &cov, options.alpha, options.transform)
        .map_err(|e| e.context("confidence intervals"))?;
    let decomposition = match data.layout().and_then(Layout::dims) {
        Some((a, b)) => Some(additive_decomposition(&est.p, a, b)?),
        None => None,
    };
    let effects = est
        .p
        .iter()
        .enumerate()
        .map(|(i, &p)| EffectRow {
            index: i,
            label: data.group_label(i),
            n: n[i],
            estimate: p,
        })
        .collect();
    let mut versions = BTreeMap::new();
    versions.insert("rankfx".to_string(), env!("CARGO_PKG_VERSION").to_string());
    let (rank_dispersion, f1_value) = match f1 {
        Ok((s2, f)) => (Some(s2), Some(f)),
        Err(_) => (None, None),
    };
    Ok(Report {
        layout: data.layout().cloned(),
        effects,
        weighted_effects: est.r.clone().unwrap_or_default(),
        pairwise: est.w.w.to_rows(),
        covariance: cov.v.to_rows(),
        rank_dispersion,
        f1: f1_value,
        decomposition,
        tests,
        cis,
        metadata: Metadata {
            seed: options.seed,
            mc_runs: options.mc_runs,
            alpha: options.alpha,
            transform: options.transform,
            total: data.total(),
            versions,
        },
    })
}
