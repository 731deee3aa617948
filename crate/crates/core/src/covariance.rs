//! Rank-based estimate of the covariance matrix of √N(p̂ − p).
//!
//! Everything is expressed through the centered placements
//! `D_rk(s) = F̂_s(X_rk) − ŵ_sr`, which are computed from rank differences and
//! combined into the τ̂ table. The covariance of the stacked pairwise effects
//! (ŵ_li at position `i·d + l`) is
//!
//! ```text
//! s((l,i),(l',i')) = [i=i'] τ_i(l,l') − [i=l'] τ_i(l,i') − [l=i'] τ_l(i,l') + [l=l'] τ_l(i,i')
//! ```
//!
//! for `l ≠ i`, `l' ≠ i'` and zero otherwise.

use log::warn;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::linalg::Matrix;
use crate::ranks::{build_rank_tables, RankTables};

/// Largest `d` for which the full `d² × d²` matrix Ŝ is stored.
pub const MAX_MATERIALIZED_D: usize = 16;

const CLAMP_TOL: f64 = 1e-12;

pub(crate) fn placements_from_tables(tables: &RankTables, n: &[usize], r: usize, s: usize) -> Vec<f64> {
    let pair = tables.pairwise(s, r);
    let within = tables.within(r);
    let nr = n[r] as f64;
    let shift = pair.iter().sum::<f64>() / nr - (nr + 1.0) / 2.0;
    let ns = n[s] as f64;
    pair.iter()
        .zip(within)
        .map(|(a, b)| ((a - b) - shift) / ns)
        .collect()
}

/// `D_rk(s)`, `k = 1..n_r`.
pub fn centered_placement(data: &Dataset, r: usize, s: usize) -> Result<Vec<f64>> {
    let d = data.d();
    if r >= d || s >= d {
        return Err(Error::Domain(format!("group index out of range (d = {d})")));
    }
    if r == s {
        return Err(Error::Domain("centered placement needs r ≠ s".into()));
    }
    Ok(placements_from_tables(&build_rank_tables(data), &data.sizes(), r, s))
}

/// τ̂_r(s, t) for all `r` and `s, t ≠ r`.
#[derive(Clone, Debug)]
pub struct TauTable {
    d: usize,
    tau: Vec<f64>,
}

impl TauTable {
    pub fn d(&self) -> usize {
        self.d
    }

    /// τ̂_r(s, t); zero when `s == r` or `t == r`.
    pub fn get(&self, r: usize, s: usize, t: usize) -> f64 {
        self.tau[(r * self.d + s) * self.d + t]
    }

    pub fn from_tables(tables: &RankTables, n: &[usize]) -> Result<TauTable> {
        let d = n.len();
        let small: Vec<usize> = (0..d).filter(|&i| n[i] < 2).map(|i| i + 1).collect();
        if !small.is_empty() {
            return Err(Error::InsufficientReplication { groups: small });
        }
        let total: usize = n.iter().sum();
        let mut tau = vec![0.0; d * d * d];
        for r in 0..d {
            let dr: Vec<Option<Vec<f64>>> = (0..d)
                .map(|s| (s != r).then(|| placements_from_tables(tables, n, r, s)))
                .collect();
            let c = total as f64 / (n[r] * (n[r] - 1)) as f64;
            for s in 0..d {
                let Some(ds) = &dr[s] else { continue };
                for t in s..d {
                    let Some(dt) = &dr[t] else { continue };
                    let v = c * ds.iter().zip(dt).map(|(a, b)| a * b).sum::<f64>();
                    tau[(r * d + s) * d + t] = v;
                    tau[(r * d + t) * d + s] = v;
                }
            }
        }
        Ok(TauTable { d, tau })
    }

    /// Covariance of the scaled pairwise effects ŵ_li and ŵ_l'i'.
    pub fn s_entry(&self, l: usize, i: usize, lp: usize, ip: usize) -> f64 {
        if l == i || lp == ip {
            return 0.0;
        }
        let mut v = 0.0;
        if i == ip {
            v += self.get(i, l, lp);
        }
        if i == lp {
            v -= self.get(i, l, ip);
        }
        if l == ip {
            v -= self.get(l, i, lp);
        }
        if l == lp {
            v += self.get(l, i, ip);
        }
        v
    }
}

pub fn tau_hat(data: &Dataset, r: usize, s: usize, t: usize) -> Result<f64> {
    let d = data.d();
    if r >= d || s >= d || t >= d {
        return Err(Error::Domain(format!("group index out of range (d = {d})")));
    }
    if s == r || t == r {
        return Err(Error::Domain("τ̂_r(s, t) needs s ≠ r and t ≠ r".into()));
    }
    let n = data.sizes();
    if n[r] < 2 {
        return Err(Error::InsufficientReplication { groups: vec![r + 1] });
    }
    let tables = build_rank_tables(data);
    let dr = placements_from_tables(&tables, &n, r, s);
    let dt = placements_from_tables(&tables, &n, r, t);
    let c = data.total() as f64 / (n[r] * (n[r] - 1)) as f64;
    Ok(c * dr.iter().zip(&dt).map(|(a, b)| a * b).sum::<f64>())
}

#[derive(Clone, Debug)]
pub struct CovarianceEstimate {
    /// Ŝ, stored only when `d ≤ MAX_MATERIALIZED_D`.
    pub s: Option<Matrix>,
    /// V̂, the estimated covariance of √N(p̂ − p).
    pub v: Matrix,
    pub total: usize,
}

pub(crate) fn covariance_from_tables(tables: &RankTables, n: &[usize], materialize: bool) -> Result<CovarianceEstimate> {
    let d = n.len();
    let tau = TauTable::from_tables(tables, n)?;
    let total: usize = n.iter().sum();
    let s = (materialize && d <= MAX_MATERIALIZED_D).then(|| {
        Matrix::from_fn(d * d, d * d, |a, b| tau.s_entry(a % d, a / d, b % d, b / d))
    });
    let d2 = (d * d) as f64;
    let mut v = Matrix::zeros(d, d);
    for i in 0..d {
        for ip in i..d {
            let mut acc = 0.0;
            for l in 0..d {
                for lp in 0..d {
                    acc += tau.s_entry(l, i, lp, ip);
                }
            }
            v[(i, ip)] = acc / d2;
            v[(ip, i)] = acc / d2;
        }
    }
    for i in 0..d {
        let x = v[(i, i)];
        if x < 0.0 {
            if x >= -CLAMP_TOL {
                warn!("clamping diagonal covariance entry {i} from {x:e} to 0");
                v[(i, i)] = 0.0;
            } else {
                return Err(Error::Internal(format!("negative variance estimate {x:e} for group {}", i + 1)));
            }
        }
    }
    Ok(CovarianceEstimate { s, v, total })
}

pub fn covariance_estimate(data: &Dataset) -> Result<CovarianceEstimate> {
    data.require_replication()?;
    covariance_from_tables(&build_rank_tables(data), &data.sizes(), true)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSampleVariance {
    pub sigma2_1: f64,
    pub sigma2_2: f64,
    /// N (σ̂₁²/n₁ + σ̂₂²/n₂).
    pub sigma_n2: f64,
}

/// Two-sample variance of the rank statistic for ŵ₁₂.
pub fn two_sample_variance(data: &Dataset) -> Result<TwoSampleVariance> {
    if data.d() != 2 {
        return Err(Error::Domain(format!("two samples required, got {}", data.d())));
    }
    data.require_replication()?;
    let tables = build_rank_tables(data);
    let n = data.sizes();
    let total = data.total() as f64;
    let comp = |j: usize| {
        let other = 1 - j;
        let denom = (total - n[j] as f64).max(1.0);
        let z: Vec<f64> = tables
            .pairwise(other, j)
            .iter()
            .zip(tables.within(j))
            .map(|(a, b)| (a - b) / denom)
            .collect();
        let m = z.iter().sum::<f64>() / z.len() as f64;
        z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (z.len() - 1) as f64
    };
    let (s1, s2) = (comp(0), comp(1));
    Ok(TwoSampleVariance {
        sigma2_1: s1,
        sigma2_2: s2,
        sigma_n2: total * (s1 / n[0] as f64 + s2 / n[1] as f64),
    })
}

pub(crate) fn f1_from_tables(tables: &RankTables, n: &[usize]) -> Result<(Vec<f64>, f64)> {
    let total: usize = n.iter().sum();
    let mut s2 = Vec::with_capacity(n.len());
    for (i, &ni) in n.iter().enumerate() {
        if ni < 2 {
            return Err(Error::InsufficientReplication { groups: vec![i + 1] });
        }
        let z: Vec<f64> = tables.pooled(i).iter().zip(tables.within(i)).map(|(a, b)| a - b).collect();
        let m = z.iter().sum::<f64>() / ni as f64;
        s2.push(z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (ni - 1) as f64);
    }
    if s2.iter().all(|&s| s == 0.0) {
        return Err(Error::Degenerate("all rank dispersions S_i² are zero".into()));
    }
    let terms: Vec<f64> = s2.iter().zip(n).map(|(s, &ni)| s / (total - ni) as f64).collect();
    let num = terms.iter().sum::<f64>().powi(2);
    let den: f64 = terms.iter().zip(n).map(|(t, &ni)| t * t / (ni - 1) as f64).sum();
    Ok((s2, num / den))
}

/// Rank dispersions `S_i²` and the denominator degrees of freedom f̂₁.
pub fn f1_components(data: &Dataset) -> Result<(Vec<f64>, f64)> {
    data.require_replication()?;
    f1_from_tables(&build_rank_tables(data), &data.sizes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::normalized_ecdf;
    use crate::effects::unweighted_effects;
    use proptest::prelude::*;

    fn data(groups: Vec<Vec<f64>>) -> Dataset {
        Dataset::from_values(groups).unwrap()
    }

    #[test]
    fn separated_placements_vanish() {
        let ds = data(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(centered_placement(&ds, 1, 0).unwrap(), vec![0.0, 0.0]);
        assert_eq!(centered_placement(&ds, 0, 0).unwrap_err().kind(), "domain");
    }

    #[test]
    fn constant_data_zero_covariance() {
        let ds = data(vec![vec![1.0; 3], vec![1.0; 4], vec![1.0; 2]]);
        let c = covariance_estimate(&ds).unwrap();
        assert_eq!(c.v.max_abs(), 0.0);
        assert_eq!(tau_hat(&ds, 0, 1, 2).unwrap(), 0.0);
        assert_eq!(f1_components(&ds).unwrap_err().kind(), "degenerate");
        let tv = two_sample_variance(&data(vec![vec![1.0; 3], vec![1.0; 3]])).unwrap();
        assert_eq!(tv.sigma_n2, 0.0);
    }

    #[test]
    fn separation_two_sample_variance() {
        let tv = two_sample_variance(&data(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]])).unwrap();
        assert_eq!((tv.sigma2_1, tv.sigma2_2), (0.0, 0.0));
    }

    #[test]
    fn replication_errors() {
        let ds = data(vec![vec![1.0], vec![2.0, 3.0]]);
        assert_eq!(covariance_estimate(&ds).unwrap_err().kind(), "insufficient-replication");
        assert_eq!(tau_hat(&ds, 0, 1, 1).unwrap_err().kind(), "insufficient-replication");
    }

    #[test]
    fn equal_dispersion_f1() {
        // interleaved groups share the same rank dispersion: f1 = d (n - 1)
        let ds = data(vec![vec![1.0, 4.0, 7.0], vec![2.0, 5.0, 8.0], vec![3.0, 6.0, 9.0]]);
        let (_, f1) = f1_components(&ds).unwrap();
        assert!((f1 - 6.0).abs() < 1e-12, "f1 = {f1}");
    }

    fn groups_strategy(max_d: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(
            prop::collection::vec((0i32..10).prop_map(|x| x as f64), 2..=max_n),
            2..=max_d,
        )
    }

    proptest! {
        #[test]
        fn placements_match_direct_cdf(groups in groups_strategy(4, 6)) {
            let ds = data(groups.clone());
            let e = unweighted_effects(&ds);
            for r in 0..groups.len() {
                for s in 0..groups.len() {
                    if r == s { continue; }
                    let dvec = centered_placement(&ds, r, s).unwrap();
                    let m: f64 = dvec.iter().sum::<f64>() / dvec.len() as f64;
                    prop_assert!(m.abs() < 1e-12);
                    for (k, &x) in groups[r].iter().enumerate() {
                        let want = normalized_ecdf(&groups[s], x) - e.w.get(s, r);
                        prop_assert!((dvec[k] - want).abs() < 1e-12);
                    }
                }
            }
        }

        #[test]
        fn v_structure(groups in groups_strategy(5, 7)) {
            let ds = data(groups);
            let c = covariance_estimate(&ds).unwrap();
            prop_assert!(c.v.asymmetry() <= 1e-12);
            let total: f64 = c.v.as_slice().iter().sum();
            prop_assert!(total.abs() <= 1e-10);
            for i in 0..ds.d() {
                prop_assert!(c.v[(i, i)] >= 0.0);
            }
            let tau = TauTable::from_tables(&build_rank_tables(&ds), &ds.sizes()).unwrap();
            for r in 0..ds.d() {
                for s in 0..ds.d() {
                    for t in 0..ds.d() {
                        prop_assert_eq!(tau.get(r, s, t), tau.get(r, t, s));
                    }
                    prop_assert!(tau.get(r, s, s) >= 0.0);
                }
            }
        }

        #[test]
        fn scale_and_monotone_invariance(groups in groups_strategy(4, 6)) {
            let ds = data(groups);
            let base = covariance_estimate(&ds).unwrap();
            let scaled = covariance_estimate(&ds.map_values(|x| 3.5 * x).unwrap()).unwrap();
            let moved = covariance_estimate(&ds.map_values(|x| (0.3 * x).exp()).unwrap()).unwrap();
            prop_assert_eq!(&base.v, &scaled.v);
            prop_assert_eq!(&base.v, &moved.v);
        }

        #[test]
        fn two_sample_variance_matches_v(groups in groups_strategy(2, 9)) {
            let ds = data(groups);
            let c = covariance_estimate(&ds).unwrap();
            // with d = 2, ŵ₁₂ = p̂₂ − p̂₁ + ½
            let var_diff = c.v[(0, 0)] + c.v[(1, 1)] - 2.0 * c.v[(0, 1)];
            let tv = two_sample_variance(&ds).unwrap();
            prop_assert!((var_diff - tv.sigma_n2).abs() <= 1e-10 * (1.0 + tv.sigma_n2));
        }
    }
}
