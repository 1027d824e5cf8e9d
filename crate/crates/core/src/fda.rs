//! Fisher discriminant analysis: scatter matrices, discriminant directions,
//! per-class T² and quadratic discriminant classification in the reduced
//! space.

use serde::{Deserialize, Serialize};

use crate::dataio::{ClassCode, DataMatrix};
use crate::error::{Error, Result};
use crate::numerics::{eig_generalized, Matrix, SpdFactor};
use crate::pca::t2_limit;

/// Shift `ε·trace/dim` added to projected class covariances before inversion.
pub const COVARIANCE_REGULARIZATION: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdaModel {
    /// Ascending class codes; every per-class field follows this order.
    pub class_codes: Vec<ClassCode>,
    /// q×m.
    pub class_means: Matrix,
    pub total_mean: Vec<f64>,
    pub within_scatter: Matrix,
    pub between_scatter: Matrix,
    pub class_scatter: Vec<Matrix>,
    /// m×(q−1).
    pub fda_vectors: Matrix,
    pub eigenvalues: Vec<f64>,
    pub class_counts: Vec<usize>,
    pub priors: Vec<f64>,
    /// `V_qᵀ S_k V_q / (n_k − 1)` per class.
    pub projected_covariances: Vec<Matrix>,
    /// Diagonal shift applied to `S_w` before the eigen solve (0 if none).
    pub regularization: f64,
}

fn outer_add(acc: &mut Matrix, v: &[f64], w: f64) {
    let m = v.len();
    for i in 0..m {
        let vi = v[i] * w;
        for j in 0..m {
            acc[(i, j)] += vi * v[j];
        }
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Fits on labeled rows from at least two classes, each with at least two
/// rows.
pub fn fit_fda(x: &DataMatrix) -> Result<FdaModel> {
    let labels = x.require_labels()?;
    let counts = x.class_counts();
    if counts.len() < 2 {
        return Err(Error::invalid(format!(
            "FDA needs at least 2 classes, found {}",
            counts.len()
        )));
    }
    if let Some((c, n)) = counts.iter().find(|(_, &n)| n < 2) {
        return Err(Error::invalid(format!("class {c} has {n} row(s); FDA needs at least 2")));
    }
    let m = x.n_cols();
    let n = x.n_rows();
    if m + 1 < counts.len() {
        return Err(Error::invalid(format!(
            "{} classes need at least {} channels for their discriminant directions, got {m}",
            counts.len(),
            counts.len() - 1
        )));
    }
    let class_codes: Vec<ClassCode> = counts.keys().copied().collect();
    let class_counts: Vec<usize> = counts.values().copied().collect();
    let q = class_codes.len();
    let slot = |c: ClassCode| class_codes.binary_search(&c).expect("class listed");

    let mut class_means = Matrix::zeros(q, m);
    let mut total_mean = vec![0.0; m];
    for (i, &l) in labels.iter().enumerate() {
        let k = slot(l);
        for (j, v) in x.row(i).iter().enumerate() {
            class_means[(k, j)] += v;
            total_mean[j] += v;
        }
    }
    for k in 0..q {
        for v in class_means.row_mut(k) {
            *v /= class_counts[k] as f64;
        }
    }
    for v in &mut total_mean {
        *v /= n as f64;
    }

    let mut class_scatter = vec![Matrix::zeros(m, m); q];
    for (i, &l) in labels.iter().enumerate() {
        let k = slot(l);
        let d = sub(x.row(i), class_means.row(k));
        outer_add(&mut class_scatter[k], &d, 1.0);
    }
    let mut within_scatter = Matrix::zeros(m, m);
    let mut between_scatter = Matrix::zeros(m, m);
    for k in 0..q {
        class_scatter[k].symmetrize();
        within_scatter = within_scatter.add(&class_scatter[k])?;
        let d = sub(class_means.row(k), &total_mean);
        outer_add(&mut between_scatter, &d, class_counts[k] as f64);
    }
    within_scatter.symmetrize();
    between_scatter.symmetrize();

    let eig = eig_generalized(&between_scatter, &within_scatter)?;
    let r = q - 1;
    let fda_vectors = eig.eigenvectors.leading_cols(r);
    let eigenvalues = eig.eigenvalues[..r].to_vec();

    let mut projected_covariances = Vec::with_capacity(q);
    for k in 0..q {
        let mut cov = fda_vectors
            .transpose()
            .matmul(&class_scatter[k])?
            .matmul(&fda_vectors)?
            .scale(1.0 / (class_counts[k] - 1) as f64);
        cov.symmetrize();
        projected_covariances.push(cov);
    }

    Ok(FdaModel {
        priors: class_counts.iter().map(|&c| c as f64 / n as f64).collect(),
        class_codes,
        class_means,
        total_mean,
        within_scatter,
        between_scatter,
        class_scatter,
        fda_vectors,
        eigenvalues,
        class_counts,
        projected_covariances,
        regularization: eig.regularization,
    })
}

impl FdaModel {
    pub fn dim(&self) -> usize {
        self.total_mean.len()
    }

    /// Number of discriminant directions, `q − 1`.
    pub fn directions(&self) -> usize {
        self.fda_vectors.cols()
    }

    fn slot(&self, k: ClassCode) -> Result<usize> {
        self.class_codes
            .binary_search(&k)
            .map_err(|_| Error::invalid(format!("class {k} is not part of this model")))
    }

    fn check_row(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "row has {} values, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Factor of `V_aᵀ S_k V_a / (n_k − 1)` for the leading `a` directions.
    fn covariance_factor(&self, k: usize, a: usize) -> Result<SpdFactor> {
        let full = &self.projected_covariances[k];
        let data: Vec<f64> = (0..a)
            .flat_map(|i| (0..a).map(move |j| full[(i, j)]))
            .collect();
        let cov = Matrix::new(a, a, data)?;
        SpdFactor::regularized(
            &cov,
            COVARIANCE_REGULARIZATION,
            &format!("projected covariance of class {}", self.class_codes[k]),
        )
    }
}

/// `z = V_qᵀ x`.
pub fn fda_project(model: &FdaModel, x: &[f64]) -> Result<Vec<f64>> {
    model.check_row(x)?;
    model.fda_vectors.tr_mul_vec(x)
}

/// `T²_k = dᵀ V_a (V_aᵀ S_k V_a / (n_k − 1))⁻¹ V_aᵀ d` with `d = x − x̄_k`,
/// using the leading `a ≤ q − 1` directions.
pub fn fda_t2(model: &FdaModel, x: &[f64], k: ClassCode, a: usize) -> Result<f64> {
    model.check_row(x)?;
    if a == 0 || a > model.directions() {
        return Err(Error::invalid(format!(
            "retained direction count must lie in 1..={}, got {a}",
            model.directions()
        )));
    }
    let s = model.slot(k)?;
    let d = sub(x, model.class_means.row(s));
    let z = model.fda_vectors.leading_cols(a).tr_mul_vec(&d)?;
    Ok(model.covariance_factor(s, a)?.inv_quad_form(&z))
}

/// Control limit for [`fda_t2`] against class `k`, using `n_k` rows and `a`
/// directions.
pub fn fda_t2_threshold(model: &FdaModel, k: ClassCode, a: usize, alpha: f64) -> Result<f64> {
    let s = model.slot(k)?;
    t2_limit(a, model.class_counts[s], alpha)
}

/// Discriminant scores `g_k(x)` in class-code order.
pub fn discriminant(model: &FdaModel, x: &[f64]) -> Result<Vec<f64>> {
    model.check_row(x)?;
    let r = model.directions();
    (0..model.class_codes.len())
        .map(|k| {
            let f = model.covariance_factor(k, r)?;
            let d = sub(x, model.class_means.row(k));
            let z = model.fda_vectors.tr_mul_vec(&d)?;
            Ok(-0.5 * f.inv_quad_form(&z) + model.priors[k].ln() - 0.5 * f.ln_det())
        })
        .collect()
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Class with the largest discriminant score, ties to the lowest code.
pub fn classify(model: &FdaModel, x: &[f64]) -> Result<ClassCode> {
    let g = discriminant(model, x)?;
    Ok(model.class_codes[argmax(&g)])
}
