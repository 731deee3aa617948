#![allow(dead_code)]

use nalgebra::DMatrix;
use rankfx::{Dataset, RngStream};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn counting_effect(l: &[f64], i: &[f64]) -> f64 {
    let mut c = 0.0;
    for &x in i {
        for &y in l {
            if y < x {
                c += 1.0;
            } else if y == x {
                c += 0.5;
            }
        }
    }
    c / (l.len() * i.len()) as f64
}

pub fn ecdf(sample: &[f64], x: f64) -> f64 {
    sample
        .iter()
        .map(|&v| if v < x { 1.0 } else if v == x { 0.5 } else { 0.0 })
        .sum::<f64>()
        / sample.len() as f64
}

/// Covariance of the stacked pairwise effects by direct expansion: each
/// √N(ŵ_li − w_li) is linear in per-group placement vectors.
pub fn direct_s(groups: &[Vec<f64>]) -> DMatrix<f64> {
    let d = groups.len();
    let n: Vec<usize> = groups.iter().map(Vec::len).collect();
    let total: usize = n.iter().sum();
    let w = |l: usize, i: usize| if l == i { 0.5 } else { counting_effect(&groups[l], &groups[i]) };
    // coefficients[(l, i)][g] = vector over group g
    let coeffs = |l: usize, i: usize| -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = n.iter().map(|&ng| vec![0.0; ng]).collect();
        if l != i {
            for (k, &x) in groups[i].iter().enumerate() {
                out[i][k] = ecdf(&groups[l], x) - w(l, i);
            }
            for (k, &x) in groups[l].iter().enumerate() {
                out[l][k] = -(ecdf(&groups[i], x) - w(i, l));
            }
        }
        out
    };
    let all: Vec<Vec<Vec<f64>>> = (0..d * d).map(|k| coeffs(k % d, k / d)).collect();
    DMatrix::from_fn(d * d, d * d, |a, b| {
        let mut s = 0.0;
        for g in 0..d {
            let dot: f64 = all[a][g].iter().zip(&all[b][g]).map(|(x, y)| x * y).sum();
            s += dot / (n[g] * (n[g] - 1)) as f64;
        }
        total as f64 * s
    })
}

pub fn averaging(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d * d, |i, k| if k / d == i { 1.0 / d as f64 } else { 0.0 })
}

fn midranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let eq = v.iter().filter(|&&y| y == x).count() as f64;
            less + (eq + 1.0) / 2.0
        })
        .collect()
}

pub struct BrunnerMunzel {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Two-sided Brunner–Munzel test with the t approximation.
pub fn brunner_munzel(x: &[f64], y: &[f64]) -> BrunnerMunzel {
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let mut pool = x.to_vec();
    pool.extend_from_slice(y);
    let r = midranks(&pool);
    let (rcx, rcy) = r.split_at(x.len());
    let (rx, ry) = (midranks(x), midranks(y));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |rc: &[f64], rw: &[f64], n: f64| {
        let (mc, mw) = (mean(rc), mean(rw));
        rc.iter().zip(rw).map(|(a, b)| (a - b - mc + mw).powi(2)).sum::<f64>() / (n - 1.0)
    };
    let sx = var(rcx, &rx, nx);
    let sy = var(rcy, &ry, ny);
    let statistic = nx * ny * (mean(rcy) - mean(rcx)) / ((nx + ny) * (nx * sx + ny * sy).sqrt());
    let df = (nx * sx + ny * sy).powi(2) / ((nx * sx).powi(2) / (nx - 1.0) + (ny * sy).powi(2) / (ny - 1.0));
    let t = StudentsT::new(0.0, 1.0, df).unwrap();
    let p_value = 2.0 * t.sf(statistic.abs());
    BrunnerMunzel { statistic, df, p_value }
}

/// Random groups: `d` in 2..=max_d, sizes in 2..=max_n, optionally drawn
/// from a small integer set to force ties.
pub fn random_groups(rng: &mut RngStream, max_d: usize, max_n: usize, ties: bool) -> Vec<Vec<f64>> {
    let d = 2 + (rng.next_u64() % (max_d as u64 - 1)) as usize;
    (0..d)
        .map(|_| {
            let n = 2 + (rng.next_u64() % (max_n as u64 - 1)) as usize;
            (0..n)
                .map(|_| {
                    if ties {
                        (rng.next_u64() % 5) as f64
                    } else {
                        rng.standard_normal()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn dataset(groups: Vec<Vec<f64>>) -> Dataset {
    Dataset::from_values(groups).unwrap()
}

pub fn to_na(m: &rankfx::Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}
