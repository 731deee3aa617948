//! Contrast matrices and the projections used by the quadratic-form tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::Matrix;
use crate::numerics::svd;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisLabel {
    OneWay,
    MainA,
    MainB,
    InteractionAb,
    Custom,
}

impl HypothesisLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            HypothesisLabel::OneWay => "one-way",
            HypothesisLabel::MainA => "main-A",
            HypothesisLabel::MainB => "main-B",
            HypothesisLabel::InteractionAb => "interaction-AB",
            HypothesisLabel::Custom => "custom",
        }
    }
}

/// A linear hypothesis `C p = 0` together with its projection
/// `T = C'(CC')⁺C`.
#[derive(Clone, Debug)]
pub struct HypothesisSpec {
    pub c: Matrix,
    pub t: Matrix,
    pub label: HypothesisLabel,
}

/// `P_a = I_a − J_a / a`.
pub fn centering_matrix(a: usize) -> Result<Matrix> {
    if a < 1 {
        return Err(Error::Domain("centering matrix needs a ≥ 1".into()));
    }
    let inv = 1.0 / a as f64;
    Ok(Matrix::from_fn(a, a, |i, j| if i == j { 1.0 - inv } else { -inv }))
}

fn averaging(a: usize) -> Matrix {
    Matrix::from_fn(a, a, |_, _| 1.0 / a as f64)
}

/// Moore–Penrose inverse with the default relative singular-value cutoff.
pub fn moore_penrose(m: &Matrix) -> Matrix {
    svd::pseudo_inverse(m)
}

/// Builds the projection onto the row space of `c`.
pub fn projection_from_contrast(c: &Matrix, label: HypothesisLabel) -> Result<HypothesisSpec> {
    if c.nrows() == 0 || c.ncols() == 0 {
        return Err(Error::InvalidContrast("empty contrast matrix".into()));
    }
    if !c.is_finite() {
        return Err(Error::InvalidContrast("contrast matrix has non-finite entries".into()));
    }
    for (k, s) in c.row_sums().into_iter().enumerate() {
        let scale = c.row(k).iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if s.abs() > 1e-10 * scale {
            return Err(Error::InvalidContrast(format!(
                "row {} sums to {s}, contrasts must annihilate the vector of ones",
                k + 1
            )));
        }
    }
    let ct = c.transpose();
    let t = ct.matmul(&moore_penrose(&c.matmul(&ct))).matmul(c).symmetrize();
    Ok(HypothesisSpec {
        c: c.clone(),
        t,
        label,
    })
}

/// Hypothesis of no effect differences among `d` groups.
pub fn one_way(d: usize) -> Result<HypothesisSpec> {
    if d < 2 {
        return Err(Error::Domain("one-way hypothesis needs d ≥ 2".into()));
    }
    let p = centering_matrix(d)?;
    Ok(HypothesisSpec {
        c: p.clone(),
        t: p,
        label: HypothesisLabel::OneWay,
    })
}

/// Main effects A, B and interaction AB of a row-major `a × b` layout.
pub fn two_way_hypotheses(a: usize, b: usize) -> Result<(HypothesisSpec, HypothesisSpec, HypothesisSpec)> {
    if a < 2 || b < 2 {
        return Err(Error::Domain(format!("two-way layout needs a, b ≥ 2, got {a}×{b}")));
    }
    let (pa, pb) = (centering_matrix(a)?, centering_matrix(b)?);
    let spec = |t: Matrix, label| HypothesisSpec {
        c: t.clone(),
        t,
        label,
    };
    Ok((
        spec(pa.kron(&averaging(b)), HypothesisLabel::MainA),
        spec(averaging(a).kron(&pb), HypothesisLabel::MainB),
        spec(pa.kron(&pb), HypothesisLabel::InteractionAb),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_projection(t: &Matrix) {
        assert!(t.asymmetry() <= 1e-10);
        assert!(t.matmul(t).max_abs_diff(t) <= 1e-10);
    }

    #[test]
    fn centering_examples() {
        let p2 = centering_matrix(2).unwrap();
        assert_eq!(p2.to_rows(), vec![vec![0.5, -0.5], vec![-0.5, 0.5]]);
        assert_eq!(centering_matrix(1).unwrap().to_rows(), vec![vec![0.0]]);
        assert!(centering_matrix(0).is_err());
        let p4 = centering_matrix(4).unwrap();
        assert!(p4.mat_vec(&[1.0; 4]).iter().all(|v| v.abs() < 1e-15));
        assert_projection(&p4);
    }

    #[test]
    fn two_way_structure() {
        for (a, b) in [(2, 2), (3, 4), (2, 5)] {
            let (ta, tb, tab) = two_way_hypotheses(a, b).unwrap();
            let d = a * b;
            let mut sum = &(&ta.t + &tb.t) + &tab.t;
            sum = &sum + &Matrix::from_fn(d, d, |_, _| 1.0 / d as f64);
            assert!(sum.max_abs_diff(&Matrix::identity(d)) < 1e-12);
            for t in [&ta.t, &tb.t, &tab.t] {
                assert_projection(t);
            }
            assert!(ta.t.matmul(&tb.t).max_abs() < 1e-12);
            assert!(ta.t.matmul(&tab.t).max_abs() < 1e-12);
            assert!(tb.t.matmul(&tab.t).max_abs() < 1e-12);
            assert!((ta.t.trace() - (a - 1) as f64).abs() < 1e-12);
            assert!((tb.t.trace() - (b - 1) as f64).abs() < 1e-12);
            assert!((tab.t.trace() - ((a - 1) * (b - 1)) as f64).abs() < 1e-12);
        }
        let (_, _, tab) = two_way_hypotheses(2, 2).unwrap();
        assert!(tab.t.as_slice().iter().all(|v| (v.abs() - 0.25).abs() < 1e-15));
        assert!(two_way_hypotheses(1, 3).is_err());
    }

    #[test]
    fn projection_examples() {
        let p3 = centering_matrix(3).unwrap();
        let h = projection_from_contrast(&p3, HypothesisLabel::Custom).unwrap();
        assert!(h.t.max_abs_diff(&p3) < 1e-12);

        let c = Matrix::row_vector(&[1.0, -1.0, 0.0, 0.0]);
        let h = projection_from_contrast(&c, HypothesisLabel::Custom).unwrap();
        let want = c.transpose().matmul(&c).scale(0.5);
        assert!(h.t.max_abs_diff(&want) < 1e-12);

        let dup = Matrix::from_rows(&[vec![1.0, -1.0, 0.0, 0.0], vec![1.0, -1.0, 0.0, 0.0]]);
        let h2 = projection_from_contrast(&dup, HypothesisLabel::Custom).unwrap();
        assert!(h2.t.max_abs_diff(&h.t) < 1e-12);

        let bad = Matrix::row_vector(&[1.0, 1.0, 0.0]);
        assert_eq!(
            projection_from_contrast(&bad, HypothesisLabel::Custom).unwrap_err().kind(),
            "invalid-contrast"
        );
    }

    #[test]
    fn penrose_identities_rank_deficient() {
        // 5×5 of rank 3
        let a = Matrix::from_fn(5, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let b = Matrix::from_fn(3, 5, |i, j| ((i * 2 + j * 5) % 7) as f64 * 0.3 - 0.8);
        let m = a.matmul(&b);
        let x = moore_penrose(&m);
        let tol = 1e-9 * m.max_abs().max(1.0);
        assert!(m.matmul(&x).matmul(&m).max_abs_diff(&m) < tol);
        assert!(x.matmul(&m).matmul(&x).max_abs_diff(&x) < 1e-9 * x.max_abs().max(1.0));
        assert!(m.matmul(&x).asymmetry() < 1e-9);
        assert!(x.matmul(&m).asymmetry() < 1e-9);
    }

    proptest! {
        #[test]
        fn row_space_invariance(raw in prop::collection::vec(-3.0f64..3.0, 8), mix in prop::collection::vec(-2.0f64..2.0, 4)) {
            // 2×4 contrast with zero row sums
            let mut rows: Vec<Vec<f64>> = raw.chunks(4).map(|r| r.to_vec()).collect();
            for r in rows.iter_mut() {
                let m = r.iter().sum::<f64>() / 4.0;
                r.iter_mut().for_each(|v| *v -= m);
            }
            let c = Matrix::from_rows(&rows);
            let a = Matrix::from_rows(&[vec![mix[0], mix[1]], vec![mix[2], mix[3]]]);
            let det = mix[0] * mix[3] - mix[1] * mix[2];
            prop_assume!(det.abs() > 0.1);
            let h = projection_from_contrast(&c, HypothesisLabel::Custom).unwrap();
            let h2 = projection_from_contrast(&a.matmul(&c), HypothesisLabel::Custom).unwrap();
            prop_assert!(h.t.max_abs_diff(&h2.t) < 1e-8);
            prop_assert!(h.t.asymmetry() <= 1e-10);
            prop_assert!(h.t.matmul(&h.t).max_abs_diff(&h.t) <= 1e-10);
            // C p = 0 iff T p = 0 on a vector in the null space and one outside it
            let p_out = vec![1.0, 0.0, 0.0, 0.0];
            let cp = c.mat_vec(&p_out);
            let tp = h.t.mat_vec(&p_out);
            let cn = cp.iter().map(|v| v.abs()).fold(0.0, f64::max) > 1e-8;
            let tn = tp.iter().map(|v| v.abs()).fold(0.0, f64::max) > 1e-8;
            prop_assert_eq!(cn, tn);
            let p_in = vec![0.5; 4];
            prop_assert!(h.t.mat_vec(&p_in).iter().all(|v| v.abs() < 1e-12));
        }
    }
}
