//! Principal component model of normal operation and Hotelling's T² chart.

use serde::{Deserialize, Serialize};

use crate::dataio::{DataMatrix, Normalizer};
use crate::error::{Error, Result};
use crate::numerics::{f_quantile, svd, Matrix};

/// Degrees of freedom used for the T² control limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdDof {
    /// `a` retained components (default).
    #[default]
    Retained,
    /// All `m` channels.
    AllChannels,
}

/// Outcome of a single-observation test against the control limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flag {
    Normal,
    Fault,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub normalizer: Normalizer,
    /// m×a, orthonormal columns.
    pub loadings: Matrix,
    /// Retained singular values of the normalized data scaled by 1/√(n−1).
    pub singular_values: Vec<f64>,
    pub a: usize,
    pub n_train: usize,
    pub variance_captured: f64,
    #[serde(default)]
    pub threshold_dof: ThresholdDof,
}

const SINGULAR_FLOOR: f64 = 1e-12;

/// Fits on normal-condition rows. `a` is the smallest number of components
/// whose squared singular values reach `variance_target` of the total.
pub fn fit_pca(x_normal: &DataMatrix, variance_target: f64) -> Result<PcaModel> {
    if !(variance_target > 0.0 && variance_target <= 1.0) {
        return Err(Error::invalid(format!(
            "variance target must lie in (0, 1], got {variance_target}"
        )));
    }
    if let Some(labels) = x_normal.labels() {
        if let Some(l) = labels.iter().find(|l| l.is_fault()) {
            return Err(Error::invalid(format!(
                "PCA must be fitted on normal rows only, found a row labeled {l}"
            )));
        }
    }
    let n = x_normal.n_rows();
    if n < 2 {
        return Err(Error::invalid(format!("PCA needs at least 2 rows, got {n}")));
    }
    let normalizer = Normalizer::fit(x_normal.observations())?;
    let xn = normalizer.apply_matrix(x_normal.observations())?;
    let dec = svd(&xn.scale(1.0 / ((n - 1) as f64).sqrt()))?;

    let sq: Vec<f64> = dec.singular_values.iter().map(|s| s * s).collect();
    let total: f64 = sq.iter().sum();
    if total <= 0.0 {
        return Err(Error::IllConditioned {
            matrix: "normal data".into(),
            detail: "every channel is constant".into(),
        });
    }
    let goal = variance_target * total - 1e-12 * total;
    let mut cum = 0.0;
    let mut a = 0;
    for &s in &sq {
        cum += s;
        a += 1;
        if cum >= goal {
            break;
        }
    }
    Ok(PcaModel {
        normalizer,
        loadings: dec.v.leading_cols(a),
        singular_values: dec.singular_values[..a].to_vec(),
        a,
        n_train: n,
        variance_captured: (cum / total).min(1.0),
        threshold_dof: ThresholdDof::Retained,
    })
}

impl PcaModel {
    /// Number of raw channels.
    pub fn dim(&self) -> usize {
        self.normalizer.dim()
    }

    pub fn with_threshold_dof(mut self, dof: ThresholdDof) -> Self {
        self.threshold_dof = dof;
        self
    }
}

/// Scores `t = Pᵀ·normalize(x)`.
pub fn project(model: &PcaModel, x: &[f64]) -> Result<Vec<f64>> {
    let xn = model.normalizer.apply_row(x)?;
    model.loadings.tr_mul_vec(&xn)
}

/// `T² = Σ t_i² / σ_i²` over the retained components.
pub fn t2_statistic(model: &PcaModel, x: &[f64]) -> Result<f64> {
    if let Some((i, s)) = model
        .singular_values
        .iter()
        .enumerate()
        .find(|(_, &s)| s < SINGULAR_FLOOR)
    {
        return Err(Error::IllConditioned {
            matrix: "retained singular values".into(),
            detail: format!("component {} has singular value {s:e}", i + 1),
        });
    }
    let t = project(model, x)?;
    Ok(t.iter()
        .zip(&model.singular_values)
        .map(|(t, s)| (t / s).powi(2))
        .sum())
}

/// Control limit `d(n−1)(n+1) / (n(n−d)) · F(1−α; d, n−d)` with `d = a`, or
/// `d = m` when the model uses [`ThresholdDof::AllChannels`].
pub fn t2_threshold(model: &PcaModel, alpha: f64) -> Result<f64> {
    let d = match model.threshold_dof {
        ThresholdDof::Retained => model.a,
        ThresholdDof::AllChannels => model.dim(),
    };
    t2_limit(d, model.n_train, alpha)
}

/// The T² control limit for `d` degrees of freedom and `n` training rows.
pub fn t2_limit(d: usize, n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if n <= d {
        return Err(Error::invalid(format!(
            "T² limit needs more training rows than degrees of freedom ({n} <= {d})"
        )));
    }
    let (d, n) = (d as f64, n as f64);
    let coef = d * (n - 1.0) * (n + 1.0) / (n * (n - d));
    Ok(coef * f_quantile(1.0 - alpha, d, n - d)?)
}

/// Fault iff T² strictly exceeds the limit.
pub fn detect(model: &PcaModel, x: &[f64], alpha: f64) -> Result<Flag> {
    let t2 = t2_statistic(model, x)?;
    Ok(if t2 > t2_threshold(model, alpha)? {
        Flag::Fault
    } else {
        Flag::Normal
    })
}
