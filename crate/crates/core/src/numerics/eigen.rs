//! Symmetric and symmetric-definite generalized eigensolvers.

use serde::{Deserialize, Serialize};

use super::matrix::{back_substitute_transposed, canonical_sign, cholesky, forward_substitute, Matrix};
use crate::error::{Error, Result};

/// Relative shift added to the diagonal of a singular `S_w`.
pub const SW_REGULARIZATION: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenpairs sorted by descending eigenvalue, one eigenvector per column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenEigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
    /// Diagonal shift that was added to the right-hand matrix (0 if none).
    pub regularization: f64,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn eig_symmetric(a: &Matrix) -> Result<GenEigResult> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::invalid(format!(
            "eig_symmetric needs a non-empty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.all_finite() {
        return Err(Error::invalid("eig_symmetric input has non-finite entries"));
    }
    if !a.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::invalid("eig_symmetric input is not symmetric"));
    }
    let n = a.rows();
    let mut m = a.clone();
    m.symmetrize();
    let mut v = Matrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum();
        if off == 0.0 || off <= (f64::EPSILON * f64::EPSILON) * diag * 1e-2 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let values: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    Ok(sorted_pairs(&values, &v, 0.0))
}

fn sorted_pairs(values: &[f64], vectors: &Matrix, regularization: f64) -> GenEigResult {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut eigenvectors = Matrix::zeros(vectors.rows(), n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        eigenvalues.push(values[j]);
        let mut col = vectors.col(j);
        let scale = col.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        canonical_sign(&mut col, 1e-12 * scale);
        eigenvectors.set_col(k, &col);
    }
    GenEigResult {
        eigenvalues,
        eigenvectors,
        regularization,
    }
}

/// Solves `S_b ν = λ S_w ν` for symmetric `S_b` and symmetric positive
/// (semi-)definite `S_w`.
///
/// `S_w` is Cholesky-factored directly when it is numerically positive
/// definite. Otherwise `ε·trace(S_w)/m·I` with `ε = 1e-8` is added first and
/// the shift is reported in [`GenEigResult::regularization`]. Eigenvectors are
/// `S_w`-orthonormal (`νᵀ S_w ν = 1`).
pub fn eig_generalized(s_b: &Matrix, s_w: &Matrix) -> Result<GenEigResult> {
    for (name, mat) in [("S_b", s_b), ("S_w", s_w)] {
        if !mat.is_square() || mat.rows() == 0 {
            return Err(Error::invalid(format!("{name} must be a non-empty square matrix")));
        }
        if !mat.all_finite() {
            return Err(Error::invalid(format!("{name} has non-finite entries")));
        }
        if !mat.is_symmetric(SYMMETRY_TOL) {
            return Err(Error::invalid(format!("{name} is not symmetric")));
        }
    }
    if s_b.rows() != s_w.rows() {
        return Err(Error::invalid(format!(
            "S_b is {0}x{0} but S_w is {1}x{1}",
            s_b.rows(),
            s_w.rows()
        )));
    }
    let m = s_w.rows();
    let mean_diag = s_w.trace() / m as f64;
    if !(mean_diag > 0.0) {
        return Err(Error::IllConditioned {
            matrix: "S_w".into(),
            detail: format!("trace is {:.3e}; cannot regularize", s_w.trace()),
        });
    }

    let mut regularization = 0.0;
    let lower = match cholesky(s_w, mean_diag * 1e-13) {
        Some(l) => l,
        None => {
            regularization = SW_REGULARIZATION * mean_diag;
            let mut reg = s_w.clone();
            for i in 0..m {
                reg[(i, i)] += regularization;
            }
            cholesky(&reg, 0.0).ok_or_else(|| Error::IllConditioned {
                matrix: "S_w".into(),
                detail: format!(
                    "not positive definite after adding {regularization:.3e}·I"
                ),
            })?
        }
    };

    // C = L⁻¹ S_b L⁻ᵀ
    let mut half = Matrix::zeros(m, m); // L⁻¹ S_b
    for j in 0..m {
        let col = forward_substitute(&lower, &s_b.col(j));
        half.set_col(j, &col);
    }
    let mut c = Matrix::zeros(m, m);
    for i in 0..m {
        let row = forward_substitute(&lower, half.row(i));
        c.row_mut(i).copy_from_slice(&row);
    }
    c.symmetrize();

    let reduced = eig_symmetric(&c)?;
    let mut vectors = Matrix::zeros(m, m);
    for k in 0..m {
        let nu = back_substitute_transposed(&lower, &reduced.eigenvectors.col(k));
        vectors.set_col(k, &nu);
    }
    Ok(sorted_pairs(&reduced.eigenvalues, &vectors, regularization))
}
