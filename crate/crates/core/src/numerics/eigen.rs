//! Cyclic Jacobi eigenvalue solver for small dense symmetric matrices.

use super::linalg::Matrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix in descending order.
///
/// Input must satisfy `‖M − M'‖∞ ≤ 1e-10·‖M‖∞`; the symmetric part is used.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let mut a = m.symmetrize();
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum();
        if off.sqrt() <= f64::EPSILON * scale * 1e-3 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, p, q, c, s);
            }
        }
    }

    let mut values: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Applies the similarity transform `J' A J` for the Jacobi rotation in the
/// (p, q) plane, zeroing `A[p][q]`.
fn rotate(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}

fn check_symmetric(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Domain(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let asym = m.asymmetry();
    if asym > 1e-10 * m.inf_norm() {
        return Err(Error::Domain(format!("matrix is not symmetric (‖M − M'‖∞ = {asym:e})")));
    }
    Ok(())
}
