//! ε-support-vector regression with an RBF kernel, solved by sequential
//! minimal optimization.
//!
//! The dual is handled in the doubled form over `2·l` variables
//! `β = [α; α*]` with labels `[+1; −1]`:
//!
//! ```text
//! min ½·βᵀQβ + pᵀβ   s.t.  yᵀβ = 0,  0 ≤ β ≤ C
//! Q_ts = y_t·y_s·K(x_t, x_s),  p = [ε − z; ε + z]
//! ```
//!
//! Pairs are picked with second-order working-set selection and the solver
//! stops once the maximal KKT violation drops below the tolerance.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl SvrParams {
    pub fn new(c: f64, epsilon: f64, gamma: f64) -> Self {
        Self {
            c,
            epsilon,
            gamma,
            tol: 1e-6,
            max_iter: 10_000_000,
        }
    }

    /// `c = 10`, `ε = 0.01`, `γ = 1/dim`.
    pub fn defaults_for(dim: usize) -> Self {
        Self::new(10.0, 0.01, 1.0 / dim.max(1) as f64)
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.epsilon >= 0.0 && self.gamma >= 0.0 && self.tol > 0.0) {
            return Err(Error::Config(format!("invalid SVR parameters {self:?}")));
        }
        Ok(())
    }
}

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i − α*_i` for each support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub epsilon: f64,
    /// Final dual objective.
    pub objective: f64,
    pub iterations: usize,
}

impl SvrModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    /// `Σ coef_i·K(sv_i, x) + bias`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if let Some(sv) = self.support_vectors.first() {
            if sv.len() != x.len() {
                return Err(Error::Dimension {
                    expected: sv.len(),
                    actual: x.len(),
                });
            }
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, a)| a * rbf(self.gamma, sv, x))
            .sum::<f64>()
            + self.bias)
    }
}

/// Solved dual for `l` samples.
#[derive(Debug, Clone)]
pub struct DualSolution {
    /// `β = [α; α*]`, length `2·l`.
    pub beta: Vec<f64>,
    pub rho: f64,
    pub objective: f64,
    pub iterations: usize,
    pub gap: f64,
}

impl DualSolution {
    pub fn coefficients(&self) -> Vec<f64> {
        let l = self.beta.len() / 2;
        (0..l).map(|i| self.beta[i] - self.beta[i + l]).collect()
    }
}

pub fn kernel_matrix(x: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| x.iter().map(|b| rbf(gamma, a, b)).collect())
        .collect()
}

/// SMO on the doubled ε-SVR dual for a precomputed kernel matrix.
pub fn solve_dual(kernel: &[Vec<f64>], z: &[f64], params: &SvrParams) -> Result<DualSolution> {
    params.validate()?;
    let l = z.len();
    if l == 0 || kernel.len() != l {
        return Err(Error::Dimension {
            expected: l,
            actual: kernel.len(),
        });
    }
    let n = 2 * l;
    let c = params.c;
    let y = |t: usize| if t < l { 1.0 } else { -1.0 };
    let k = |t: usize, s: usize| kernel[t % l][s % l];
    let q = |t: usize, s: usize| y(t) * y(s) * k(t, s);
    let p: Vec<f64> = (0..n)
        .map(|t| if t < l { params.epsilon - z[t] } else { params.epsilon + z[t - l] })
        .collect();
    let qd: Vec<f64> = (0..n).map(|t| k(t, t)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = p.clone();
    let mut iterations = 0usize;
    let mut gap;

    loop {
        // Maximal violating i, then second-order choice of j.
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if y(t) > 0.0 {
                if alpha[t] < c && -grad[t] >= g_max {
                    g_max = -grad[t];
                    i_sel = Some(t);
                }
            } else if alpha[t] > 0.0 && grad[t] >= g_max {
                g_max = grad[t];
                i_sel = Some(t);
            }
        }
        let mut g_max2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut obj_min = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if y(t) > 0.0 {
                    if alpha[t] > 0.0 {
                        let grad_diff = g_max + grad[t];
                        g_max2 = g_max2.max(grad[t]);
                        if grad_diff > 0.0 {
                            let quad = qd[i] + qd[t] - 2.0 * y(i) * q(i, t);
                            let obj = -grad_diff * grad_diff / if quad > 0.0 { quad } else { TAU };
                            if obj <= obj_min {
                                obj_min = obj;
                                j_sel = Some(t);
                            }
                        }
                    }
                } else if alpha[t] < c {
                    let grad_diff = g_max - grad[t];
                    g_max2 = g_max2.max(-grad[t]);
                    if grad_diff > 0.0 {
                        let quad = qd[i] + qd[t] + 2.0 * y(i) * q(i, t);
                        let obj = -grad_diff * grad_diff / if quad > 0.0 { quad } else { TAU };
                        if obj <= obj_min {
                            obj_min = obj;
                            j_sel = Some(t);
                        }
                    }
                }
            }
        }
        gap = g_max + g_max2;
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break;
        };
        if gap < params.tol {
            break;
        }
        if iterations >= params.max_iter {
            return Err(Error::SvrNonConvergence { iterations, gap });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let q_ij = q(i, j);
        if y(i) != y(j) {
            let quad = (qd[i] + qd[j] + 2.0 * q_ij).max(TAU);
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
            let quad = (qd[i] + qd[j] - 2.0 * q_ij).max(TAU);
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
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    // Offset from free variables, else the midpoint of the feasible range.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut n_free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y(t) * grad[t];
        if alpha[t] >= c {
            if y(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    let objective = (0..n).map(|t| alpha[t] * (grad[t] + p[t])).sum::<f64>() / 2.0;
    Ok(DualSolution {
        beta: alpha,
        rho,
        objective,
        iterations,
        gap,
    })
}

fn check_data(x: &[Vec<f64>], z: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::Training("SVR needs at least one sample".into()));
    }
    if x.len() != z.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: z.len(),
        });
    }
    let dim = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            actual: bad.len(),
        });
    }
    Ok(dim)
}

/// Fit an ε-SVR on rows `x` with targets `z`.
pub fn train_svr(x: &[Vec<f64>], z: &[f64], params: &SvrParams) -> Result<SvrModel> {
    check_data(x, z)?;
    let kernel = kernel_matrix(x, params.gamma);
    let sol = solve_dual(&kernel, z, params)?;
    let coef = sol.coefficients();
    let (mut svs, mut coefs) = (Vec::new(), Vec::new());
    for (row, a) in x.iter().zip(coef) {
        if a != 0.0 {
            svs.push(row.clone());
            coefs.push(a);
        }
    }
    Ok(SvrModel {
        support_vectors: svs,
        coefficients: coefs,
        bias: -sol.rho,
        gamma: params.gamma,
        c: params.c,
        epsilon: params.epsilon,
        objective: sol.objective,
        iterations: sol.iterations,
    })
}

/// Hyper-parameter grid; `gamma_factors` are multiplied by `1/dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrGrid {
    pub cs: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub gamma_factors: Vec<f64>,
    pub folds: usize,
}

impl Default for SvrGrid {
    fn default() -> Self {
        Self {
            cs: vec![1.0, 10.0, 100.0],
            epsilons: vec![0.005, 0.01, 0.05],
            gamma_factors: vec![0.5, 1.0, 2.0],
            folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: SvrParams,
    pub cv_mse: f64,
}

/// Fold index of every sample: a seeded shuffle dealt round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (k, &i) in order.iter().enumerate() {
        fold[i] = k % folds.max(1);
    }
    fold
}

/// Cross-validated grid search; returns every grid point and the index of
/// the best (lowest CV MSE, first on ties).
pub fn grid_search(x: &[Vec<f64>], z: &[f64], grid: &SvrGrid, seed: u64) -> Result<(Vec<GridPoint>, usize)> {
    let dim = check_data(x, z)?;
    let folds = grid.folds.clamp(2, x.len().max(2));
    let assign = fold_assignment(x.len(), folds, seed);
    let mut points = Vec::new();
    for &c in &grid.cs {
        for &eps in &grid.epsilons {
            for &gf in &grid.gamma_factors {
                let params = SvrParams::new(c, eps, gf / dim.max(1) as f64);
                let mut sq = 0.0;
                let mut count = 0usize;
                for f in 0..folds {
                    let (mut xt, mut zt, mut xv, mut zv) = (vec![], vec![], vec![], vec![]);
                    for i in 0..x.len() {
                        if assign[i] == f {
                            xv.push(x[i].clone());
                            zv.push(z[i]);
                        } else {
                            xt.push(x[i].clone());
                            zt.push(z[i]);
                        }
                    }
                    if xv.is_empty() || xt.is_empty() {
                        continue;
                    }
                    let model = train_svr(&xt, &zt, &params)?;
                    for (row, t) in xv.iter().zip(&zv) {
                        let e = model.predict(row)? - t;
                        sq += e * e;
                        count += 1;
                    }
                }
                points.push(GridPoint {
                    params,
                    cv_mse: sq / count.max(1) as f64,
                });
            }
        }
    }
    let best = points
        .iter()
        .enumerate()
        .fold(0, |best, (k, p)| if p.cv_mse < points[best].cv_mse { k } else { best });
    Ok((points, best))
}
