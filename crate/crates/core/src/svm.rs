//! Soft-margin kernel SVM trained by sequential minimal optimization, with
//! one-vs-one / one-vs-all multiclass wrappers and grid cross-validation of
//! the penalty factor.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{ClassCode, DataMatrix};
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, dot, Matrix, RngState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    /// `(xᵀy + coef)^degree`
    Polynomial { degree: u32, coef: f64 },
    /// `exp(−‖x − y‖² / (2σ²))`
    Rbf { sigma: f64 },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Rbf { sigma: 0.5 }
    }
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree, coef } => {
                if degree < 1 || !coef.is_finite() {
                    return Err(Error::invalid(format!(
                        "polynomial kernel needs degree >= 1 and finite coef, got ({degree}, {coef})"
                    )));
                }
                Ok(())
            }
            KernelSpec::Rbf { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::invalid(format!("RBF sigma must be positive, got {sigma}")));
                }
                Ok(())
            }
        }
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Polynomial { degree, coef } => (dot(x, y) + coef).powi(degree as i32),
            KernelSpec::Rbf { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    /// Gram matrix `K_ij = k(row_i, row_j)`.
    pub fn gram(&self, x: &Matrix) -> Matrix {
        let n = x.rows();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| self.eval(x.row(i), x.row(j))).collect())
            .collect();
        Matrix::new(n, n, rows.concat()).expect("finite kernel values")
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "kernel arguments have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    spec.validate()?;
    Ok(spec.eval(x, y))
}

/// Solver settings shared by binary and multiclass training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub kernel: KernelSpec,
    pub c: f64,
    /// KKT tolerance; training stops once the maximal violating pair gap is
    /// below it.
    pub tol: f64,
    /// Added to the Gram diagonal during training.
    pub ridge: f64,
    pub max_iter: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            kernel: KernelSpec::default(),
            c: 10.0,
            tol: 1e-3,
            ridge: 0.0,
            max_iter: 100_000,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid(format!("penalty factor C must be positive, got {}", self.c)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::invalid(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmClassifier {
    pub support_vectors: Matrix,
    /// `α_i·y_i` for each support vector.
    pub coefficients: Vec<f64>,
    /// Training-row index of each support vector.
    pub support_indices: Vec<usize>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    pub kkt_tolerance: f64,
    #[serde(default)]
    pub ridge: f64,
    pub iterations: usize,
}

impl SvmClassifier {
    pub fn dim(&self) -> usize {
        self.support_vectors.cols()
    }

    pub fn n_support(&self) -> usize {
        self.coefficients.len()
    }

    /// Dual objective `Σα − ½ ΣΣ α_i α_j y_i y_j K_ij` at the solution.
    pub fn dual_objective(&self) -> f64 {
        let sv = &self.support_vectors;
        let mut quad = 0.0;
        for i in 0..self.n_support() {
            for j in 0..self.n_support() {
                let mut k = self.kernel.eval(sv.row(i), sv.row(j));
                if i == j {
                    k += self.ridge;
                }
                quad += self.coefficients[i] * self.coefficients[j] * k;
            }
        }
        self.coefficients.iter().map(|c| c.abs()).sum::<f64>() - 0.5 * quad
    }
}

struct DualSolution {
    alpha: Vec<f64>,
    bias: f64,
    iterations: usize,
}

const TAU: f64 = 1e-12;

/// `−y_t G_t` index sets: maximum over the "up" set and minimum over the
/// "low" set, with their arg-indices.
fn violating_pair(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> (Option<(usize, f64)>, Option<(usize, f64)>) {
    let mut up: Option<(usize, f64)> = None;
    let mut low: Option<(usize, f64)> = None;
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        let in_up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
        let in_low = (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0);
        if in_up && up.is_none_or(|(_, m)| v > m) {
            up = Some((t, v));
        }
        if in_low && low.is_none_or(|(_, m)| v < m) {
            low = Some((t, v));
        }
    }
    (up, low)
}

fn full_gradient(gram: &Matrix, y: &[f64], alpha: &[f64], ridge: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|t| {
            let mut s = 0.0;
            for (u, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let k = gram[(t, u)] + if t == u { ridge } else { 0.0 };
                    s += a * y[u] * k;
                }
            }
            y[t] * s - 1.0
        })
        .collect()
}

/// SMO with maximal-violating-pair selection on a precomputed Gram matrix.
fn solve_dual(gram: &Matrix, y: &[f64], p: &TrainParams) -> Result<DualSolution> {
    let n = y.len();
    let c = p.c;
    let k = |i: usize, j: usize| gram[(i, j)] + if i == j { p.ridge } else { 0.0 };
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    // stop slightly inside the tolerance so the recomputed KKT audit passes
    let stop = p.tol * (1.0 - 1e-6);
    let mut iterations = 0;
    let mut refreshed = false;
    loop {
        let (up, low) = violating_pair(&alpha, &grad, y, c);
        let (Some((i, m_up)), Some((j, m_low))) = (up, low) else {
            break;
        };
        let gap = m_up - m_low;
        if gap <= stop {
            if refreshed {
                break;
            }
            // guard against drift in the incrementally updated gradient
            grad = full_gradient(gram, y, &alpha, p.ridge);
            refreshed = true;
            continue;
        }
        refreshed = false;
        if iterations >= p.max_iter {
            return Err(Error::Convergence {
                iterations,
                gap,
                tolerance: p.tol,
                n,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
        }
    }

    let free: Vec<f64> = (0..n)
        .filter(|&t| alpha[t] > 0.0 && alpha[t] < c)
        .map(|t| -y[t] * grad[t])
        .collect();
    let bias = if !free.is_empty() {
        free.iter().sum::<f64>() / free.len() as f64
    } else {
        let (up, low) = violating_pair(&alpha, &grad, y, c);
        match (up, low) {
            (Some((_, a)), Some((_, b))) => 0.5 * (a + b),
            (Some((_, a)), None) | (None, Some((_, a))) => a,
            (None, None) => 0.0,
        }
    };
    Ok(DualSolution {
        alpha,
        bias,
        iterations,
    })
}

fn signed_labels(y: &[i8]) -> Result<Vec<f64>> {
    let mut pos = false;
    let mut neg = false;
    let out = y
        .iter()
        .map(|&l| match l {
            1 => {
                pos = true;
                Ok(1.0)
            }
            -1 => {
                neg = true;
                Ok(-1.0)
            }
            other => Err(Error::invalid(format!("binary labels must be ±1, got {other}"))),
        })
        .collect::<Result<Vec<f64>>>()?;
    if !(pos && neg) {
        return Err(Error::invalid("binary training needs both +1 and −1 labels"));
    }
    Ok(out)
}

/// Trains a binary classifier on rows of `x` with labels `y ∈ {−1, +1}`.
pub fn train_binary(x: &Matrix, y: &[i8], params: &TrainParams) -> Result<SvmClassifier> {
    params.validate()?;
    if x.rows() != y.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    let ys = signed_labels(y)?;
    let gram = params.kernel.gram(x);
    let sol = solve_dual(&gram, &ys, params)?;
    Ok(assemble(x, &ys, sol, params))
}

fn assemble(x: &Matrix, y: &[f64], sol: DualSolution, p: &TrainParams) -> SvmClassifier {
    let support_indices: Vec<usize> = (0..y.len()).filter(|&t| sol.alpha[t] > 0.0).collect();
    SvmClassifier {
        support_vectors: x.select_rows(&support_indices),
        coefficients: support_indices.iter().map(|&t| sol.alpha[t] * y[t]).collect(),
        support_indices,
        bias: sol.bias,
        kernel: p.kernel,
        c: p.c,
        kkt_tolerance: p.tol,
        ridge: p.ridge,
        iterations: sol.iterations,
    }
}

/// `f(x) = b + Σ α_l y_l k(x_l, x)`.
pub fn decision_value(clf: &SvmClassifier, x: &[f64]) -> Result<f64> {
    if x.len() != clf.dim() {
        return Err(Error::invalid(format!(
            "row has {} values, classifier expects {}",
            x.len(),
            clf.dim()
        )));
    }
    Ok(clf.bias
        + clf
            .coefficients
            .iter()
            .enumerate()
            .map(|(l, a)| a * clf.kernel.eval(clf.support_vectors.row(l), x))
            .sum::<f64>())
}

/// Sign of the decision value; exactly 0 maps to +1.
pub fn predict_binary(clf: &SvmClassifier, x: &[f64]) -> Result<i8> {
    Ok(if decision_value(clf, x)? >= 0.0 { 1 } else { -1 })
}

/// Largest KKT violation over the training set, measured on `y·f(x)` against
/// the margin condition for each point's α class.
pub fn kkt_violation(clf: &SvmClassifier, x: &Matrix, y: &[i8]) -> Result<f64> {
    let ys = signed_labels(y)?;
    let mut alpha = vec![0.0; ys.len()];
    for (l, &t) in clf.support_indices.iter().enumerate() {
        alpha[t] = clf.coefficients[l].abs();
    }
    let mut worst: f64 = 0.0;
    for t in 0..ys.len() {
        let mut f = decision_value(clf, x.row(t))?;
        f += clf.ridge * alpha[t] * ys[t];
        let yf = ys[t] * f;
        let v = if alpha[t] <= 0.0 {
            (1.0 - yf).max(0.0)
        } else if alpha[t] >= clf.c {
            (yf - 1.0).max(0.0)
        } else {
            (yf - 1.0).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    OneVsOne,
    OneVsAll,
}

/// One binary member of a multiclass model. `positive` is the +1 side; the
/// −1 side is `negative`, or every other class when `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub positive: ClassCode,
    pub negative: Option<ClassCode>,
    pub classifier: SvmClassifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassSvm {
    pub strategy: Strategy,
    pub label_map: Vec<ClassCode>,
    pub members: Vec<Member>,
}

/// One-vs-one members pair classes `(lo, hi)` with `hi` as +1; one-vs-all
/// members are ordered by class code.
pub fn train_multiclass(x: &DataMatrix, strategy: Strategy, params: &TrainParams) -> Result<MulticlassSvm> {
    params.validate()?;
    let labels = x.require_labels()?;
    let classes: Vec<ClassCode> = x.class_counts().into_keys().collect();
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "multiclass training needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    let jobs: Vec<(ClassCode, Option<ClassCode>)> = match strategy {
        Strategy::OneVsOne => classes
            .iter()
            .enumerate()
            .flat_map(|(i, &lo)| classes[i + 1..].iter().map(move |&hi| (hi, Some(lo))))
            .collect(),
        Strategy::OneVsAll => classes.iter().map(|&c| (c, None)).collect(),
    };
    let members = jobs
        .into_par_iter()
        .map(|(positive, negative)| {
            let idx: Vec<usize> = (0..labels.len())
                .filter(|&i| negative.is_none_or(|n| labels[i] == n) || labels[i] == positive)
                .collect();
            let y: Vec<i8> = idx
                .iter()
                .map(|&i| if labels[i] == positive { 1 } else { -1 })
                .collect();
            let sub = x.observations().select_rows(&idx);
            train_binary(&sub, &y, params)
                .map(|classifier| Member {
                    positive,
                    negative,
                    classifier,
                })
                .map_err(|e| Error::PairTraining {
                    first: negative.unwrap_or(positive),
                    second: positive,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MulticlassSvm {
        strategy,
        label_map: classes,
        members,
    })
}

/// Votes and summed winning |decision| per class, for one row.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteTally {
    pub votes: BTreeMap<ClassCode, usize>,
    pub strength: BTreeMap<ClassCode, f64>,
}

pub fn tally(model: &MulticlassSvm, x: &[f64]) -> Result<VoteTally> {
    let mut votes: BTreeMap<ClassCode, usize> = model.label_map.iter().map(|&c| (c, 0)).collect();
    let mut strength: BTreeMap<ClassCode, f64> = model.label_map.iter().map(|&c| (c, 0.0)).collect();
    for m in &model.members {
        let f = decision_value(&m.classifier, x)?;
        let winner = match (f >= 0.0, m.negative) {
            (true, _) => m.positive,
            (false, Some(neg)) => neg,
            (false, None) => continue,
        };
        *votes.get_mut(&winner).expect("class in label map") += 1;
        *strength.get_mut(&winner).expect("class in label map") += f.abs();
    }
    Ok(VoteTally { votes, strength })
}

/// One-vs-one: majority vote, then the larger summed |decision| of the
/// winning votes, then the lower class code. One-vs-all: the largest
/// decision value, ties to the lower class code.
pub fn predict_multiclass(model: &MulticlassSvm, x: &[f64]) -> Result<ClassCode> {
    match model.strategy {
        Strategy::OneVsOne => {
            let t = tally(model, x)?;
            let mut best = model.label_map[0];
            for &c in &model.label_map[1..] {
                let better = t.votes[&c] > t.votes[&best]
                    || (t.votes[&c] == t.votes[&best] && t.strength[&c] > t.strength[&best]);
                if better {
                    best = c;
                }
            }
            Ok(best)
        }
        Strategy::OneVsAll => {
            let scores = model
                .members
                .iter()
                .map(|m| decision_value(&m.classifier, x))
                .collect::<Result<Vec<f64>>>()?;
            Ok(model.members[crate::fda::argmax(&scores)].positive)
        }
    }
}

/// Probability that a random positive scores above a random negative, ties
/// counted as one half.
pub fn auc(scores: &[f64], labels: &[i8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    signed_labels(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // midranks (1-based) over tie groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &t in &order[i..=j] {
            if labels[t] == 1 {
                rank_sum_pos += mid;
            }
        }
        i = j + 1;
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    Ok((rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg))
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && count >= 1) {
        return Err(Error::invalid(format!("bad grid ({lo}, {hi}, {count})")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_c: f64,
    /// `(C, mean AUC over folds)` in grid order.
    pub curve: Vec<(f64, f64)>,
    pub folds: usize,
    /// Refolding attempts used (1 when the first assignment worked).
    pub attempts: usize,
}

const MAX_FOLD_ATTEMPTS: usize = 10;

fn assign_folds(y: &[f64], folds: usize, seed: u64, attempt: usize) -> Vec<usize> {
    let mut fold_of = vec![0; y.len()];
    for (cls, sign) in [(0u64, -1.0), (1u64, 1.0)] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&t| y[t] == sign).collect();
        let mut rng = RngState::seeded(derive_seed(seed, "cv-fold", attempt as u64 * 2 + cls));
        rng.shuffle(&mut idx);
        let offset = rng.index(folds);
        for (p, &t) in idx.iter().enumerate() {
            fold_of[t] = (p + offset) % folds;
        }
    }
    fold_of
}

/// Stratified k-fold selection of C by mean held-out AUC. The best C is the
/// first grid value attaining the maximum; `params.c` is ignored.
pub fn cross_validate_c(
    x: &Matrix,
    y: &[i8],
    params: &TrainParams,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::invalid("C grid is empty"));
    }
    if folds < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds}")));
    }
    if x.rows() != y.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    for &c in grid {
        TrainParams { c, ..*params }.validate()?;
    }
    let ys = signed_labels(y)?;

    let mut chosen = None;
    for attempt in 0..MAX_FOLD_ATTEMPTS {
        let f = assign_folds(&ys, folds, seed, attempt);
        let ok = (0..folds).all(|k| {
            let has = |inside: bool, s: f64| (0..ys.len()).any(|t| (f[t] == k) == inside && ys[t] == s);
            has(true, 1.0) && has(true, -1.0) && has(false, 1.0) && has(false, -1.0)
        });
        if ok {
            chosen = Some((f, attempt + 1));
            break;
        }
    }
    let (fold_of, attempts) = chosen.ok_or_else(|| {
        Error::invalid(format!(
            "could not build {folds} folds containing both classes after {MAX_FOLD_ATTEMPTS} attempts"
        ))
    })?;

    let gram = params.kernel.gram(x);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|k| {
            let train = (0..ys.len()).filter(|&t| fold_of[t] != k).collect();
            let test = (0..ys.len()).filter(|&t| fold_of[t] == k).collect();
            (train, test)
        })
        .collect();
    let prepared: Vec<(Matrix, Vec<f64>, Matrix, Vec<i8>)> = splits
        .iter()
        .map(|(train, test)| {
            let sub = sub_matrix(&gram, train, train);
            let cross = sub_matrix(&gram, test, train);
            let ytr = train.iter().map(|&t| ys[t]).collect();
            let yte = test.iter().map(|&t| y[t]).collect();
            (sub, ytr, cross, yte)
        })
        .collect();

    let curve = grid
        .par_iter()
        .map(|&c| {
            let p = TrainParams { c, ..*params };
            let mut total = 0.0;
            for (sub, ytr, cross, yte) in &prepared {
                let sol = solve_dual(sub, ytr, &p)?;
                let scores: Vec<f64> = (0..cross.rows())
                    .map(|i| {
                        sol.bias
                            + cross
                                .row(i)
                                .iter()
                                .zip(&sol.alpha)
                                .zip(ytr)
                                .map(|((k, a), yy)| a * yy * k)
                                .sum::<f64>()
                    })
                    .collect();
                total += auc(&scores, yte)?;
            }
            Ok((c, total / folds as f64))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let mut best = 0;
    for (i, &(c, s)) in curve.iter().enumerate() {
        let (bc, bs) = curve[best];
        if s > bs || (s == bs && c < bc) {
            best = i;
        }
    }
    Ok(CvResult {
        best_c: curve[best].0,
        curve,
        folds,
        attempts,
    })
}

fn sub_matrix(m: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    let data = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| m[(i, j)]))
        .collect();
    Matrix::new(rows.len(), cols.len(), data).expect("finite entries")
}
