//! Mid-ranks and the rank tables consumed by every estimator.

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Mid-ranks of `values`: tied values share the mean of the ranks they occupy.
pub fn midranks(values: &[f64]) -> Result<Vec<f64>> {
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!(
            "non-finite value {} at position {}",
            values[k], k
        )));
    }
    Ok(midranks_finite(values))
}

pub(crate) fn midranks_finite(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let v = values[order[start]];
        let mut end = start + 1;
        // exact equality; -0.0 and 0.0 tie
        while end < n && values[order[end]] == v {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = r;
        }
        start = end;
    }
    ranks
}

/// Pooled, within-group and pairwise mid-ranks of a dataset.
#[derive(Clone, Debug)]
pub struct RankTables {
    d: usize,
    pooled: Vec<Vec<f64>>,
    within: Vec<Vec<f64>>,
    // index l * d + i: ranks of group i in the pool of groups l and i; empty when l == i
    pairwise: Vec<Vec<f64>>,
}

impl RankTables {
    pub fn d(&self) -> usize {
        self.d
    }

    /// Ranks `R_ik` of group `i` among all observations.
    pub fn pooled(&self, i: usize) -> &[f64] {
        &self.pooled[i]
    }

    /// Ranks `R_ik^(i)` of group `i` within itself.
    pub fn within(&self, i: usize) -> &[f64] {
        &self.within[i]
    }

    /// Ranks `R_ik^(li)` of group `i` in the combined sample of groups `l` and `i`.
    ///
    /// # Panics
    /// If `l == i`.
    pub fn pairwise(&self, l: usize, i: usize) -> &[f64] {
        assert_ne!(l, i, "pairwise ranks need two distinct groups");
        &self.pairwise[l * self.d + i]
    }
}

pub fn build_rank_tables(data: &Dataset) -> RankTables {
    let d = data.d();
    let sizes = data.sizes();

    let split = |ranks: Vec<f64>, parts: &[usize]| -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(parts.len());
        let mut off = 0;
        for &n in parts {
            out.push(ranks[off..off + n].to_vec());
            off += n;
        }
        out
    };

    let all: Vec<f64> = data.groups().iter().flat_map(|g| g.values().iter().copied()).collect();
    let pooled = split(midranks_finite(&all), &sizes);
    let within = (0..d).map(|i| midranks_finite(data.group(i))).collect();

    let mut pairwise = vec![Vec::new(); d * d];
    for l in 0..d {
        for i in (l + 1)..d {
            let mut pool = data.group(l).to_vec();
            pool.extend_from_slice(data.group(i));
            let mut parts = split(midranks_finite(&pool), &[sizes[l], sizes[i]]);
            pairwise[l * d + i] = parts.pop().unwrap();
            pairwise[i * d + l] = parts.pop().unwrap();
        }
    }
    RankTables {
        d,
        pooled,
        within,
        pairwise,
    }
}
