//! Thin singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! For an `n×m` input with `k = min(n, m)` the result holds `U` (`n×k`),
//! `σ` (length `k`, descending) and `V` (`m×k`). One-sided Jacobi keeps full
//! relative accuracy on small singular values, which matters for the
//! ε-floored channels that show up in PCA on real feeder data.

use serde::{Deserialize, Serialize};

use super::matrix::{canonical_sign, dot, norm, Matrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvdResult {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    /// `U · diag(σ) · Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, s) in self.singular_values.iter().enumerate() {
                us[(i, j)] *= s;
            }
        }
        us.matmul(&self.v.transpose())
            .expect("U and V share the inner dimension")
    }
}

pub fn svd(a: &Matrix) -> Result<SvdResult> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::invalid("svd of an empty matrix"));
    }
    if !a.all_finite() {
        return Err(Error::invalid("svd input has non-finite entries"));
    }
    if a.rows() < a.cols() {
        let t = svd_tall(&a.transpose());
        let SvdResult {
            u,
            singular_values,
            v,
        } = t;
        let mut out = SvdResult {
            u: v,
            singular_values,
            v: u,
        };
        apply_sign_convention(&mut out);
        return Ok(out);
    }
    let mut out = svd_tall(a);
    apply_sign_convention(&mut out);
    Ok(out)
}

/// Column-major working copy, so rotations touch contiguous memory.
fn columns(a: &Matrix) -> Vec<Vec<f64>> {
    (0..a.cols()).map(|j| a.col(j)).collect()
}

fn svd_tall(a: &Matrix) -> SvdResult {
    let n = a.rows();
    let m = a.cols();
    let mut w = columns(a);
    let mut v: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();

    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    let sigma: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let sigma_max = order.first().map(|&i| sigma[i]).unwrap_or(0.0);
    let negligible = sigma_max * (n.max(m) as f64) * eps;

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut singular_values = Vec::with_capacity(m);
    let mut v_out = Matrix::zeros(m, m);
    for (k, &j) in order.iter().enumerate() {
        let s = sigma[j];
        singular_values.push(s);
        v_out.set_col(k, &v[j]);
        if s > negligible && s > 0.0 {
            u_cols.push(w[j].iter().map(|x| x / s).collect());
        } else {
            u_cols.push(Vec::new());
        }
    }
    complete_orthonormal(&mut u_cols, n);

    let mut u = Matrix::zeros(n, m);
    for (k, c) in u_cols.iter().enumerate() {
        u.set_col(k, c);
    }
    SvdResult {
        u,
        singular_values,
        v: v_out,
    }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *x;
        let b = *y;
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills empty entries of `cols` with unit vectors orthogonal to all others,
/// by Gram-Schmidt against the standard basis.
fn complete_orthonormal(cols: &mut [Vec<f64>], n: usize) {
    let mut basis = 0;
    for k in 0..cols.len() {
        if !cols[k].is_empty() {
            continue;
        }
        loop {
            assert!(basis < n, "ran out of basis vectors completing U");
            let mut cand = vec![0.0; n];
            cand[basis] = 1.0;
            basis += 1;
            // two passes of Gram-Schmidt for numerical orthogonality
            for _ in 0..2 {
                for other in cols.iter().filter(|c| !c.is_empty()) {
                    let d = dot(&cand, other);
                    for (c, o) in cand.iter_mut().zip(other) {
                        *c -= d * o;
                    }
                }
            }
            let nrm = norm(&cand);
            if nrm > 1e-8 {
                cand.iter_mut().for_each(|c| *c /= nrm);
                cols[k] = cand;
                break;
            }
        }
    }
}

fn apply_sign_convention(r: &mut SvdResult) {
    for j in 0..r.v.cols() {
        let mut vj = r.v.col(j);
        if canonical_sign(&mut vj, 1e-14) {
            r.v.set_col(j, &vj);
            let uj: Vec<f64> = r.u.col(j).iter().map(|x| -x).collect();
            r.u.set_col(j, &uj);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::RngState;

    fn orthonormality_error(q: &Matrix) -> f64 {
        let qtq = q.transpose().matmul(q).unwrap();
        qtq.sub(&Matrix::identity(q.cols())).unwrap().max_abs()
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let r = svd(&Matrix::identity(3)).unwrap();
        assert_eq!(r.singular_values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_input_keeps_axes() {
        let r = svd(&Matrix::from_diag(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(r.singular_values, vec![3.0, 2.0, 1.0]);
        assert_eq!(r.u, Matrix::identity(3));
        assert_eq!(r.v, Matrix::identity(3));
    }

    #[test]
    fn random_six_by_four_reconstructs() {
        let mut rng = RngState::seeded(11);
        let data: Vec<f64> = (0..24).map(|_| rng.uniform(-1.0, 1.0).unwrap()).collect();
        let a = Matrix::new(6, 4, data).unwrap();
        let r = svd(&a).unwrap();
        let err = r.reconstruct().sub(&a).unwrap().frobenius_norm();
        assert!(err <= 1e-10 * a.frobenius_norm().max(1.0), "err {err}");
        assert!(orthonormality_error(&r.u) <= 1e-10);
        assert!(orthonormality_error(&r.v) <= 1e-10);
        assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn wide_and_rank_deficient_inputs() {
        // rank 1, wide
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0]]).unwrap();
        let r = svd(&a).unwrap();
        assert_eq!(r.u.rows(), 2);
        assert_eq!(r.v.rows(), 4);
        assert!(r.singular_values[1].abs() < 1e-12);
        assert!(r.reconstruct().sub(&a).unwrap().frobenius_norm() < 1e-12);
        assert!(orthonormality_error(&r.u) <= 1e-10);
        assert!(orthonormality_error(&r.v) <= 1e-10);

        let z = svd(&Matrix::zeros(3, 2)).unwrap();
        assert_eq!(z.singular_values, vec![0.0, 0.0]);
        assert!(orthonormality_error(&z.u) <= 1e-12);
    }

    #[test]
    fn rejects_empty() {
        assert!(svd(&Matrix::zeros(0, 3)).is_err());
    }
}
