//! Pairwise, unweighted and weighted relative effects.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::linalg::Matrix;
use crate::ranks::{build_rank_tables, midranks_finite, RankTables};

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// `P(X_l < X_i) + P(X_l = X_i) / 2` estimated from two samples.
pub fn pairwise_effect(sample_l: &[f64], sample_i: &[f64]) -> Result<f64> {
    if sample_l.is_empty() || sample_i.is_empty() {
        return Err(Error::InvalidData("pairwise effect needs two nonempty samples".into()));
    }
    let mut pool = sample_l.to_vec();
    pool.extend_from_slice(sample_i);
    if pool.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite value in sample".into()));
    }
    let r = midranks_finite(&pool);
    let ni = sample_i.len() as f64;
    Ok((mean(&r[sample_l.len()..]) - (ni + 1.0) / 2.0) / sample_l.len() as f64)
}

/// Matrix of pairwise effects, entry `(l, i)` = ŵ_li.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseEffects {
    pub w: Matrix,
}

impl PairwiseEffects {
    pub fn get(&self, l: usize, i: usize) -> f64 {
        self.w[(l, i)]
    }

    /// Stacked vector with ŵ_li at position `i * d + l`.
    pub fn stacked(&self) -> Vec<f64> {
        let d = self.w.nrows();
        (0..d * d).map(|k| self.w[(k % d, k / d)]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct EffectEstimates {
    /// Unweighted effects p̂.
    pub p: Vec<f64>,
    /// Weighted effects r̂ (descriptive).
    pub r: Option<Vec<f64>>,
    pub w: PairwiseEffects,
    pub n: Vec<usize>,
    pub total: usize,
}

impl EffectEstimates {
    pub fn d(&self) -> usize {
        self.p.len()
    }
}

pub(crate) fn pairwise_from_tables(tables: &RankTables, n: &[usize]) -> PairwiseEffects {
    let d = n.len();
    let w = Matrix::from_fn(d, d, |l, i| {
        if l == i {
            0.5
        } else {
            (mean(tables.pairwise(l, i)) - (n[i] as f64 + 1.0) / 2.0) / n[l] as f64
        }
    });
    PairwiseEffects { w }
}

pub(crate) fn weighted_from_tables(tables: &RankTables, total: usize) -> Vec<f64> {
    (0..tables.d())
        .map(|i| (mean(tables.pooled(i)) - 0.5) / total as f64)
        .collect()
}

pub(crate) fn effects_from_tables(tables: &RankTables, data: &Dataset) -> EffectEstimates {
    let n = data.sizes();
    let total = data.total();
    let w = pairwise_from_tables(tables, &n);
    let d = n.len();
    let p = (0..d)
        .map(|i| (0..d).map(|l| w.get(l, i)).sum::<f64>() / d as f64)
        .collect();
    EffectEstimates {
        p,
        r: Some(weighted_from_tables(tables, total)),
        w,
        n,
        total,
    }
}

/// p̂_i = (1/d) Σ_l ŵ_li, always from pairwise rankings.
pub fn unweighted_effects(data: &Dataset) -> EffectEstimates {
    effects_from_tables(&build_rank_tables(data), data)
}

/// r̂_i = (R̄_i − ½) / N; depends on the sample sizes and is never used for tests.
pub fn weighted_effects(data: &Dataset) -> Vec<f64> {
    weighted_from_tables(&build_rank_tables(data), data.total())
}

/// `I_d ⊗ (1/d) 1'_d`, mapping stacked pairwise effects to p̂.
pub fn averaging_matrix(d: usize) -> Matrix {
    Matrix::from_fn(d, d * d, |i, k| if k / d == i { 1.0 / d as f64 } else { 0.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditiveDecomposition {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
}

/// Main effects and interaction of row-major cell effects in an `a × b` layout.
pub fn additive_decomposition(p: &[f64], a: usize, b: usize) -> Result<AdditiveDecomposition> {
    if a * b != p.len() || a == 0 || b == 0 {
        return Err(Error::Layout(format!(
            "{} effects cannot form a {a}×{b} layout",
            p.len()
        )));
    }
    let row: Vec<f64> = (0..a)
        .map(|i| p[i * b..(i + 1) * b].iter().sum::<f64>() / b as f64)
        .collect();
    let col: Vec<f64> = (0..b)
        .map(|j| (0..a).map(|i| p[i * b + j]).sum::<f64>() / a as f64)
        .collect();
    let gamma = (0..a)
        .map(|i| (0..b).map(|j| p[i * b + j] - row[i] - col[j] + 0.5).collect())
        .collect();
    Ok(AdditiveDecomposition {
        alpha: row.iter().map(|r| r - 0.5).collect(),
        beta: col.iter().map(|c| c - 0.5).collect(),
        gamma,
    })
}

/// Normalized empirical distribution function (half weight at ties).
pub fn normalized_ecdf(sample: &[f64], x: f64) -> f64 {
    let mut c = 0.0;
    for &v in sample {
        if v < x {
            c += 1.0;
        } else if v == x {
            c += 0.5;
        }
    }
    c / sample.len() as f64
}

/// Evaluates Σ_i c_i F̂_i(x) on each grid point.
pub fn empirical_effect_function(
    data: &Dataset,
    coeffs: &[f64],
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if coeffs.len() != data.d() {
        return Err(Error::InvalidData(format!(
            "{} coefficients for {} groups",
            coeffs.len(),
            data.d()
        )));
    }
    Ok(grid
        .iter()
        .map(|&x| {
            let v = coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| c * normalized_ecdf(data.group(i), x))
                .sum();
            (x, v)
        })
        .collect())
}

/// Sorted distinct observed values, optionally with `refine` evenly spaced
/// points inserted between neighbours.
pub fn effect_function_grid(data: &Dataset, refine: usize) -> Vec<f64> {
    let mut v: Vec<f64> = data.groups().iter().flat_map(|g| g.values().iter().copied()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if refine == 0 {
        return v;
    }
    let mut out = Vec::with_capacity(v.len() * (refine + 1));
    for w in v.windows(2) {
        out.push(w[0]);
        for k in 1..=refine {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / (refine + 1) as f64);
        }
    }
    out.extend(v.last());
    out
}
