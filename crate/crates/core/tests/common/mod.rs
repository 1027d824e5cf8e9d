//! Reference implementations used only by the tests. None of them share code
//! with the library routines they check.
#![allow(dead_code)]

use hif_core::numerics::{Matrix, RngState};

pub fn random_matrix(rng: &mut RngState, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0).unwrap()).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// `Bᵀ B`, positive semidefinite.
pub fn random_psd(rng: &mut RngState, n: usize, rank: usize) -> Matrix {
    let b = random_matrix(rng, rank, n);
    b.transpose().matmul(&b).unwrap()
}

// ---------------------------------------------------------------------------
// F distribution by quadrature

/// `∫₀^z t^(a−1) (1−t)^(b−1) dt` by tanh-sinh quadrature on `[0, z]`, with the
/// complement `zc = 1 − z` passed in so `1 − t` keeps full precision.
fn beta_partial(a: f64, b: f64, z: f64, zc: f64) -> f64 {
    let h = 1.0 / 32.0;
    let n = (5.0 / h) as i64;
    let mut sum = 0.0;
    for k in -n..=n {
        let u = k as f64 * h;
        let s = std::f64::consts::PI * u.sinh();
        let (sig, rest) = if s >= 0.0 {
            let e = (-s).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            let e = s.exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        let t = z * sig;
        let tc = zc + z * rest;
        let w = z * sig * rest * std::f64::consts::PI * u.cosh();
        if t <= 0.0 || w == 0.0 {
            continue;
        }
        sum += w * ((a - 1.0) * t.ln() + (b - 1.0) * tc.ln()).exp();
    }
    sum * h
}

/// Complete beta integral `B(d1/2, d2/2)`.
fn beta_total(d1: f64, d2: f64) -> f64 {
    let (a, b) = (d1 / 2.0, d2 / 2.0);
    beta_partial(a, b, 0.5, 0.5) + beta_partial(b, a, 0.5, 0.5)
}

fn cdf_pair_with(x: f64, d1: f64, d2: f64, total: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    let (a, b) = (d1 / 2.0, d2 / 2.0);
    let z = d1 * x / (d1 * x + d2);
    let zc = d2 / (d1 * x + d2);
    if z <= 0.5 {
        let lo = beta_partial(a, b, z, zc) / total;
        (lo, 1.0 - lo)
    } else {
        let hi = beta_partial(b, a, zc, z) / total;
        (1.0 - hi, hi)
    }
}

/// `(P(F ≤ x), P(F > x))` for `F ~ F(d1, d2)`, each side integrated over the
/// shorter half of the unit interval.
pub fn f_cdf_pair(x: f64, d1: f64, d2: f64) -> (f64, f64) {
    cdf_pair_with(x, d1, d2, beta_total(d1, d2))
}

pub fn oracle_f_cdf(x: f64, d1: f64, d2: f64) -> f64 {
    f_cdf_pair(x, d1, d2).0
}

/// Bisection on the quadrature CDF, using the upper tail above the median.
pub fn oracle_f_quantile(p: f64, d1: f64, d2: f64) -> f64 {
    let upper = p > 0.5;
    let total = beta_total(d1, d2);
    let g = |x: f64| {
        let (lo, hi) = cdf_pair_with(x, d1, d2, total);
        if upper {
            (1.0 - p) - hi
        } else {
            lo - p
        }
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The probability grid used by the quantile comparisons: 100 points over
/// [0.001, 0.999].
pub fn quantile_grid() -> Vec<f64> {
    (0..100).map(|i| 0.001 + 0.998 * i as f64 / 99.0).collect()
}

pub const DOF_GRID: [f64; 4] = [1.0, 5.0, 10.0, 55.0];

/// Largest normalized disagreement between the library quantile and the
/// oracle over the grid: max of `|x − x_o| / max(1, x_o)` and
/// `|cdf_o(x) − p|`.
pub fn quantile_disagreement(f: impl Fn(f64, f64, f64) -> f64) -> (f64, String) {
    let mut worst = (0.0, String::new());
    for &d1 in &DOF_GRID {
        for &d2 in &DOF_GRID {
            for &p in &quantile_grid() {
                let x = f(p, d1, d2);
                let xo = oracle_f_quantile(p, d1, d2);
                let (lo, hi) = f_cdf_pair(x, d1, d2);
                let cdf_err = if p > 0.5 { (hi - (1.0 - p)).abs() } else { (lo - p).abs() };
                let err = ((x - xo).abs() / xo.max(1.0)).max(cdf_err);
                if err > worst.0 {
                    worst = (err, format!("p={p} d1={d1} d2={d2}: {x} vs {xo}"));
                }
            }
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// SVM dual by active-set enumeration

pub fn kernel(kind: &hif_core::svm::KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    use hif_core::svm::KernelSpec::*;
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    match *kind {
        Linear => dot,
        Polynomial { degree, coef } => (dot + coef).powi(degree as i32),
        Rbf { sigma } => {
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
            (-d2 / (2.0 * sigma * sigma)).exp()
        }
    }
}

pub struct DualOracle {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Exact soft-margin dual optimum for up to ~10 points: every assignment of
/// points to {α = 0, α = C, free} is tried; the free block is solved from its
/// stationarity system and the best feasible point wins.
pub fn brute_force_dual(x: &[Vec<f64>], y: &[f64], c: f64, k: &hif_core::svm::KernelSpec) -> DualOracle {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * kernel(k, &x[i], &x[j])).collect())
        .collect();
    let objective = |a: &[f64]| {
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * a[j] * q[i][j];
            }
        }
        a.iter().sum::<f64>() - 0.5 * quad
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut state = vec![0u8; n];
    loop {
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        let feasible = if free.is_empty() {
            (y.iter().zip(&alpha).map(|(y, a)| y * a).sum::<f64>()).abs() < 1e-12 * c.max(1.0)
        } else {
            // [Q_FF y_F; y_Fᵀ 0][α_F; ν] = [1 − Q_FB α_B; −y_Bᵀ α_B]
            let m = free.len();
            let mut sys = vec![vec![0.0; m + 1]; m + 1];
            let mut rhs = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (cc, &j) in free.iter().enumerate() {
                    sys[r][cc] = q[i][j];
                }
                sys[r][m] = y[i];
                sys[m][r] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|&j| state[j] == 1).map(|j| q[i][j] * c).sum::<f64>();
            }
            rhs[m] = -(0..n).filter(|&j| state[j] == 1).map(|j| y[j] * c).sum::<f64>();
            match solve_linear(sys, rhs) {
                Some(sol) => {
                    let tol = 1e-12 * c.max(1.0);
                    let ok = free.iter().enumerate().all(|(r, _)| sol[r] >= -tol && sol[r] <= c + tol);
                    for (r, &i) in free.iter().enumerate() {
                        alpha[i] = sol[r].clamp(0.0, c);
                    }
                    ok
                }
                None => false,
            }
        };
        if feasible {
            let obj = objective(&alpha);
            if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                best = Some((obj, alpha));
            }
        }
        // next assignment in base 3
        let mut i = 0;
        while i < n && state[i] == 2 {
            state[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        state[i] += 1;
    }
    let (objective, alpha) = best.expect("α = 0 is always feasible");

    // bias: mean over free points, else the midpoint of the feasible interval
    let grad: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| q[i][j] * alpha[j]).sum::<f64>() - 1.0)
        .collect();
    let eps = 1e-9 * c;
    let free: Vec<f64> = (0..n)
        .filter(|&i| alpha[i] > eps && alpha[i] < c - eps)
        .map(|i| -y[i] * grad[i])
        .collect();
    let bias = if !free.is_empty() {
        free.iter().sum::<f64>() / free.len() as f64
    } else {
        let up = (0..n)
            .filter(|&t| (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0))
            .map(|t| -y[t] * grad[t])
            .fold(f64::NEG_INFINITY, f64::max);
        let low = (0..n)
            .filter(|&t| (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0))
            .map(|t| -y[t] * grad[t])
            .fold(f64::INFINITY, f64::min);
        0.5 * (up + low)
    };
    DualOracle { alpha, bias, objective }
}

pub fn oracle_decision(o: &DualOracle, x: &[Vec<f64>], y: &[f64], k: &hif_core::svm::KernelSpec, at: &[f64]) -> f64 {
    o.bias + (0..y.len()).map(|i| o.alpha[i] * y[i] * kernel(k, &x[i], at)).sum::<f64>()
}

pub struct Problem {
    pub name: String,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub c: f64,
    pub kernel: hif_core::svm::KernelSpec,
}

/// 25 small problems: separable clusters, overlapping clusters, XOR layouts
/// and sets with a duplicated point carrying both labels.
pub fn svm_corpus() -> Vec<Problem> {
    use hif_core::svm::KernelSpec::*;
    let kernels = [
        Linear,
        Rbf { sigma: 1.0 },
        Polynomial { degree: 2, coef: 1.0 },
        Rbf { sigma: 0.5 },
    ];
    let cs = [1.0, 10.0, 100.0, 0.5];
    let mut out = Vec::new();
    let mut rng = RngState::seeded(2024);
    for (family, shift, spread) in [("separable", 2.0, 0.4), ("overlapping", 0.4, 1.0)] {
        for i in 0..7 {
            let n = 3 + i % 6;
            let mut x = Vec::new();
            let mut y = Vec::new();
            for p in 0..n {
                let label = if p % 2 == 0 { -1.0 } else { 1.0 };
                x.push(vec![label * shift + spread * rng.normal(), spread * rng.normal()]);
                y.push(label);
            }
            out.push(Problem {
                name: format!("{family}-{i}"),
                x,
                y,
                c: cs[i % 4],
                kernel: kernels[i % 4],
            });
        }
    }
    let xor = |jitter: f64, rng: &mut RngState, reps: usize| {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for r in 0..reps {
            for (a, b) in [(-1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (1.0, -1.0)] {
                let j = if r == 0 { 0.0 } else { jitter };
                x.push(vec![a + j * rng.normal(), b + j * rng.normal()]);
                y.push(if a * b > 0.0 { 1.0 } else { -1.0 });
            }
        }
        (x, y)
    };
    for (i, (k, c, reps)) in [
        (Rbf { sigma: 0.5 }, 10.0, 1),
        (Rbf { sigma: 1.0 }, 1.0, 1),
        (Polynomial { degree: 2, coef: 1.0 }, 10.0, 1),
        (Rbf { sigma: 0.7 }, 5.0, 2),
        (Polynomial { degree: 3, coef: 0.5 }, 2.0, 2),
    ]
    .into_iter()
    .enumerate()
    {
        let (x, y) = xor(0.2, &mut rng, reps);
        out.push(Problem {
            name: format!("xor-{i}"),
            x,
            y,
            c,
            kernel: k,
        });
    }
    for i in 0..6 {
        let n = 4 + i % 4;
        let mut x = vec![vec![0.3, -0.2], vec![0.3, -0.2]];
        let mut y = vec![1.0, -1.0];
        for p in 2..n {
            let label = if p % 2 == 0 { 1.0 } else { -1.0 };
            x.push(vec![label * 1.5 + 0.3 * rng.normal(), 0.5 + 0.3 * rng.normal()]);
            y.push(label);
        }
        out.push(Problem {
            name: format!("conflict-{i}"),
            x,
            y,
            c: [0.5, 1.0, 3.0][i % 3],
            kernel: kernels[i % 4],
        });
    }
    assert_eq!(out.len(), 25);
    out
}

/// Area under the ROC curve by counting every positive/negative pair.
pub fn pair_count_auc(scores: &[f64], labels: &[i8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1 && labels[j] == -1 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}
