mod common;

use common::*;
use nalgebra::DMatrix;
use rankfx::analysis::{analyze, AnalysisOptions};
use rankfx::contrasts::one_way;
use rankfx::covariance::{covariance_estimate, f1_components};
use rankfx::data::datasets;
use rankfx::effects::{empirical_effect_function, unweighted_effects};
use rankfx::inference::{ats_f_test, Method};
use rankfx::numerics::{dist, symmetric_eigenvalues};
use rankfx::{Dataset, Matrix, RngStream};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal};

#[test]
fn effects_and_covariance_match_direct_expansion() {
    let mut rng = RngStream::new(101);
    for case in 0..300 {
        let groups = random_groups(&mut rng, 4, 6, case % 2 == 0);
        let data = dataset(groups.clone());
        let d = groups.len();
        let est = unweighted_effects(&data);
        for l in 0..d {
            for i in 0..d {
                let want = if l == i { 0.5 } else { counting_effect(&groups[l], &groups[i]) };
                assert!((est.w.get(l, i) - want).abs() <= 1e-10);
            }
        }
        let cov = covariance_estimate(&data).unwrap();
        let s = to_na(cov.s.as_ref().unwrap());
        let oracle = direct_s(&groups);
        assert!((&s - &oracle).amax() <= 1e-10, "case {case}: {}", (&s - &oracle).amax());
        let e = averaging(d);
        let v_oracle = &e * &oracle * e.transpose();
        assert!((to_na(&cov.v) - v_oracle).amax() <= 1e-10);
    }
}

#[test]
fn two_sample_ats_f_is_brunner_munzel() {
    let mut rng = RngStream::new(202);
    let mut checked = 0;
    while checked < 300 {
        let n1 = 5 + (rng.next_u64() % 11) as usize;
        let n2 = 5 + (rng.next_u64() % 11) as usize;
        let ties = checked % 3 == 0;
        let draw = |rng: &mut RngStream, n: usize, shift: f64| -> Vec<f64> {
            (0..n)
                .map(|_| if ties { (rng.next_u64() % 6) as f64 } else { shift + rng.standard_normal() })
                .collect()
        };
        let x = draw(&mut rng, n1, 0.0);
        let y = draw(&mut rng, n2, 0.4);
        let data = dataset(vec![x.clone(), y.clone()]);
        let est = unweighted_effects(&data);
        let cov = covariance_estimate(&data).unwrap();
        let Ok((_, f1)) = f1_components(&data) else { continue };
        let Ok(r) = ats_f_test(&est, &cov, &one_way(2).unwrap(), f1, 0.05) else { continue };
        let bm = brunner_munzel(&x, &y);
        assert!((r.statistic - bm.statistic.powi(2)).abs() <= 1e-10 * r.statistic.max(1.0));
        assert!((r.df.f - 1.0).abs() <= 1e-10);
        assert!((r.df.f1.unwrap() - bm.df).abs() <= 1e-10 * bm.df);
        assert!((r.p_value - bm.p_value).abs() <= 1e-10, "{} vs {}", r.p_value, bm.p_value);
        checked += 1;
    }
}

#[test]
fn distribution_functions_match_reference_library() {
    for &df in &[0.5, 1.0, 2.5, 7.0, 26.492, 150.0] {
        let chi = ChiSquared::new(df).unwrap();
        for &x in &[0.01, 0.3, 1.0, 3.84, 10.0, 60.0] {
            assert!((dist::chi_square_cdf(x, df).unwrap() - chi.cdf(x)).abs() <= 1e-10);
        }
        for &df1 in &[1.0, 2.0, 3.7] {
            let f = FisherSnedecor::new(df1, df).unwrap();
            for &x in &[0.05, 0.5, 1.0, 4.2, 30.0] {
                assert!((dist::f_cdf(x, df1, df).unwrap() - f.cdf(x)).abs() <= 1e-10);
            }
        }
    }
    let n = Normal::new(0.0, 1.0).unwrap();
    for &x in &[-8.0, -3.0, -1.0, 0.0, 0.7, 2.5, 6.0] {
        let got = dist::normal_cdf(x);
        assert!((got - n.cdf(x)).abs() <= 1e-10 * n.cdf(x).max(1e-5));
    }
}

#[test]
fn eigenvalues_sum_and_product() {
    let mut rng = RngStream::new(303);
    for _ in 0..50 {
        let a = DMatrix::from_fn(6, 6, |_, _| rng.standard_normal());
        let s = &a + a.transpose();
        let m = Matrix::from_fn(6, 6, |i, j| s[(i, j)]);
        let ev = symmetric_eigenvalues(&m).unwrap();
        let tr = s.trace();
        let det = s.clone().lu().determinant();
        assert!((ev.iter().sum::<f64>() - tr).abs() <= 1e-9 * tr.abs().max(1.0));
        let prod: f64 = ev.iter().product();
        assert!((prod - det).abs() <= 1e-8 * det.abs().max(1.0));
        assert!(ev.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn leucocyte_effect_function_matches_counting() {
    let data = datasets::leucocyte();
    let c = [0.25, -0.25, -0.25, 0.25];
    let got = empirical_effect_function(&data, &c, &[7.0]).unwrap()[0].1;
    let want: f64 = (0..4).map(|i| c[i] * ecdf(data.group(i), 7.0)).sum();
    assert!((got - want).abs() < 1e-15);
}

// Values computed by an independent script from the bundled table.
#[test]
fn leucocyte_bundled_values() {
    let r = analyze(&datasets::leucocyte(), &AnalysisOptions::default()).unwrap();
    let p: Vec<f64> = r.effects.iter().map(|e| e.estimate).collect();
    for (a, b) in p.iter().zip([0.46125, 0.855, 0.20875, 0.475]) {
        assert!((a - b).abs() < 1e-12);
    }
    let ab = r.test("food:treatment", Method::AtsF).unwrap();
    assert!((ab.statistic - 1.8676).abs() < 5e-4);
    assert!((ab.p_value - 0.18324).abs() < 5e-5);
    assert!((ab.df.f1.unwrap() - 26.4839).abs() < 5e-4);
    assert!((r.test("food", Method::AtsF).unwrap().statistic - 42.844).abs() < 5e-3);
    assert!((r.test("treatment", Method::AtsF).unwrap().statistic - 32.817).abs() < 5e-3);
}

// One of the two tied 6.0 readings in the reduced/drug cell nudged upward.
#[test]
fn leucocyte_untied_variant() {
    let base = datasets::leucocyte();
    let mut groups: Vec<Vec<f64>> = (0..4).map(|i| base.group(i).to_vec()).collect();
    let k = groups[3].iter().position(|&v| v == 6.0).unwrap();
    groups[3][k] = 6.05;
    let data = Dataset::from_values(groups).unwrap().with_layout(base.layout().unwrap().clone()).unwrap();
    let r = analyze(&data, &AnalysisOptions::default()).unwrap();
    let p: Vec<f64> = r.effects.iter().map(|e| e.estimate).collect();
    for (a, b) in p.iter().zip([0.460, 0.855, 0.209, 0.476]) {
        assert!((a - b).abs() <= 1e-3);
    }
    let limits = [(0.355, 0.568), (0.818, 0.885), (0.140, 0.301), (0.375, 0.579)];
    for (ci, (lo, hi)) in r.cis.iter().zip(limits) {
        assert!((ci.lower - lo).abs() <= 1e-3 && (ci.upper - hi).abs() <= 1e-3, "{ci:?}");
    }
    let b = r.test("treatment", Method::AtsF).unwrap();
    let ab = r.test("food:treatment", Method::AtsF).unwrap();
    assert!((b.statistic - 33.191).abs() <= 1e-3);
    assert!((ab.statistic - 1.868).abs() <= 1e-3);
    assert!((ab.df.f1.unwrap() - 26.492).abs() <= 1e-3);
    assert!((ab.p_value - 0.1832).abs() <= 5e-4);
    // the food statistic still differs: 42.4997
    let a = r.test("food", Method::AtsF).unwrap();
    assert!((a.statistic - 42.4997).abs() <= 1e-3);
}

#[test]
fn v_from_oracle_is_psd_structure() {
    // E Ŝ E' annihilates the ones vector for any data
    let mut rng = RngStream::new(404);
    for _ in 0..50 {
        let groups = random_groups(&mut rng, 4, 6, true);
        let d = groups.len();
        let e = averaging(d);
        let v = &e * direct_s(&groups) * e.transpose();
        let ones = DMatrix::from_element(d, 1, 1.0);
        assert!((ones.transpose() * &v * &ones)[(0, 0)].abs() <= 1e-10);
    }
}
