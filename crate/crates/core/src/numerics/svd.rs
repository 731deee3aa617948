//! One-sided Jacobi singular value decomposition and the Moore–Penrose inverse.

use super::linalg::Matrix;

const MAX_SWEEPS: usize = 75;

/// Thin SVD `A = U·diag(s)·V'` with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn new(a: &Matrix) -> Svd {
        if a.nrows() >= a.ncols() {
            one_sided_jacobi(a)
        } else {
            let t = one_sided_jacobi(&a.transpose());
            Svd {
                u: t.v,
                s: t.s,
                v: t.u,
            }
        }
    }

    /// Default rank cutoff: `max(rows, cols)·ε·σ_max`.
    pub fn default_tolerance(&self) -> f64 {
        let dim = self.u.nrows().max(self.v.nrows()) as f64;
        dim * f64::EPSILON * self.s.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.s.iter().filter(|&&s| s > tol).count()
    }

    /// `V·diag(1/s)·U'`, dropping singular values at or below `tol`.
    pub fn pseudo_inverse(&self, tol: f64) -> Matrix {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let mut out = Matrix::zeros(n, m);
        for (k, &s) in self.s.iter().enumerate() {
            if s <= tol {
                continue;
            }
            let inv = 1.0 / s;
            for i in 0..n {
                let vik = self.v[(i, k)] * inv;
                if vik == 0.0 {
                    continue;
                }
                for j in 0..m {
                    out[(i, j)] += vik * self.u[(j, k)];
                }
            }
        }
        out
    }
}

/// Moore–Penrose inverse with the default relative cutoff.
pub fn pseudo_inverse(a: &Matrix) -> Matrix {
    let svd = Svd::new(a);
    svd.pseudo_inverse(svd.default_tolerance())
}

/// Moore–Penrose inverse treating singular values `≤ rel_tol·σ_max` as zero.
/// Returns the inverse and the retained rank.
pub fn pseudo_inverse_with_tol(a: &Matrix, rel_tol: f64) -> (Matrix, usize) {
    let svd = Svd::new(a);
    let tol = svd
        .default_tolerance()
        .max(rel_tol * svd.s.first().copied().unwrap_or(0.0));
    (svd.pseudo_inverse(tol), svd.rank(tol))
}

/// Requires `rows ≥ cols`.
fn one_sided_jacobi(a: &Matrix) -> Svd {
    let (m, n) = (a.nrows(), a.ncols());
    let mut u = a.clone();
    let mut v = Matrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| u[(i, j)] * u[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u_sorted = Matrix::from_fn(m, n, |i, k| {
        let j = order[k];
        if norms[j] > 0.0 {
            u[(i, j)] / norms[j]
        } else {
            0.0
        }
    });
    let v_sorted = Matrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Svd {
        u: u_sorted,
        s,
        v: v_sorted,
    }
}
