use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::net::{Batch, CascadeNet, Jacobian};
use super::optim;
use crate::{Error, Result};

/// Largest parameter count the Levenberg-Marquardt trainer accepts.
pub const LM_MAX_WEIGHTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Levenberg-Marquardt.
    Lm,
    /// Conjugate gradient with Powell/Beale restarts.
    Cgb,
    /// Scaled conjugate gradient.
    Scg,
    /// One-step secant.
    Oss,
    /// Gradient descent with momentum and adaptive learning rate.
    Gdx,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Lm => "trainlm",
            Algorithm::Cgb => "traincgb",
            Algorithm::Scg => "trainscg",
            Algorithm::Oss => "trainoss",
            Algorithm::Gdx => "traingdx",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().trim_start_matches("train") {
            "lm" => Ok(Algorithm::Lm),
            "cgb" => Ok(Algorithm::Cgb),
            "scg" => Ok(Algorithm::Scg),
            "oss" => Ok(Algorithm::Oss),
            "gdx" => Ok(Algorithm::Gdx),
            other => Err(Error::Config(format!("unknown trainer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub max_epochs: usize,
    /// Initial learning rate of GDX; the other trainers ignore it.
    pub learning_rate: f64,
    pub goal_mse: f64,
    pub min_grad: f64,
    pub seed: u64,
    pub lm_mu0: f64,
    pub lm_mu_inc: f64,
    pub lm_mu_dec: f64,
    pub lm_mu_max: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Lm,
            max_epochs: 1000,
            learning_rate: 0.9,
            goal_mse: 1e-5,
            min_grad: 1e-10,
            seed: 1,
            lm_mu0: 1e-3,
            lm_mu_inc: 10.0,
            lm_mu_dec: 0.1,
            lm_mu_max: 1e10,
        }
    }
}

impl TrainConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.lm_mu0 > 0.0 && self.lm_mu_inc > 1.0 && self.lm_mu_dec > 0.0 && self.lm_mu_dec < 1.0) {
            return Err(Error::Config("LM damping controls out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Goal,
    MaxEpochs,
    MinGradient,
    MaxMu,
    LineSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mse: f64,
    /// LM damping after the epoch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub algorithm: Algorithm,
    pub initial_mse: f64,
    pub epochs: Vec<EpochRecord>,
    pub stop: StopReason,
    pub final_mse: f64,
}

/// Check that `algorithm` can handle a net with `param_count` weights.
pub fn check_memory_contract(algorithm: Algorithm, param_count: usize) -> Result<()> {
    if algorithm == Algorithm::Lm && param_count > LM_MAX_WEIGHTS {
        return Err(Error::Training(format!(
            "Levenberg-Marquardt supports at most {LM_MAX_WEIGHTS} weights, this net has {param_count}; \
             use a smaller feature layout or a conjugate-gradient trainer"
        )));
    }
    Ok(())
}

/// Train a copy of `net` on `data` (targets already normalized).
pub fn train(net: &CascadeNet, data: &Batch, cfg: &TrainConfig) -> Result<(CascadeNet, TrainLog)> {
    cfg.validate()?;
    check_memory_contract(cfg.algorithm, net.param_count())?;
    let mut net = net.clone();
    let initial_mse = net.mse(data)?;
    if !initial_mse.is_finite() {
        return Err(Error::Training("initial loss is not finite".into()));
    }
    let (epochs, stop) = match cfg.algorithm {
        Algorithm::Lm => train_lm(&mut net, data, cfg)?,
        Algorithm::Cgb => optim::train_cgb(&mut net, data, cfg)?,
        Algorithm::Scg => optim::train_scg(&mut net, data, cfg)?,
        Algorithm::Oss => optim::train_oss(&mut net, data, cfg)?,
        Algorithm::Gdx => optim::train_gdx(&mut net, data, cfg)?,
    };
    let final_mse = net.mse(data)?;
    Ok((
        net,
        TrainLog {
            algorithm: cfg.algorithm,
            initial_mse,
            epochs,
            stop,
            final_mse,
        },
    ))
}

/// Solve `(JᵀJ + μI)·δ = −Jᵀr`. When there are fewer residuals than
/// parameters the equivalent `δ = −Jᵀ(JJᵀ + μI)⁻¹r` is used.
pub fn lm_step(jac: &Jacobian, r: &[f64], mu: f64) -> Option<Vec<f64>> {
    let (m, p) = (jac.rows, jac.cols);
    if m < p {
        let mut a = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v: f64 = jac.row(i).iter().zip(jac.row(j)).map(|(x, y)| x * y).sum();
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
            a[(i, i)] += mu;
        }
        let z = a.cholesky()?.solve(&DVector::from_column_slice(r));
        let mut delta = jac.transpose_mul(z.as_slice());
        delta.iter_mut().for_each(|d| *d = -*d);
        Some(delta)
    } else {
        let mut a = DMatrix::<f64>::zeros(p, p);
        for i in 0..m {
            let row = jac.row(i);
            for a_col in 0..p {
                let rv = row[a_col];
                if rv == 0.0 {
                    continue;
                }
                for b_row in a_col..p {
                    a[(b_row, a_col)] += row[b_row] * rv;
                }
            }
        }
        for c in 0..p {
            for rr in (c + 1)..p {
                a[(c, rr)] = a[(rr, c)];
            }
            a[(c, c)] += mu;
        }
        let g = jac.transpose_mul(r);
        let rhs = DVector::from_iterator(p, g.iter().map(|v| -v));
        Some(a.cholesky()?.solve(&rhs).as_slice().to_vec())
    }
}

fn train_lm(net: &mut CascadeNet, data: &Batch, cfg: &TrainConfig) -> Result<(Vec<EpochRecord>, StopReason)> {
    let mut mu = cfg.lm_mu0;
    let mut log = Vec::new();
    let n = (data.len() * net.topology().output_dim) as f64;
    for epoch in 1..=cfg.max_epochs {
        let (jac, r) = net.jacobian(data)?;
        let mse = r.iter().map(|v| v * v).sum::<f64>() / n;
        if mse <= cfg.goal_mse {
            return Ok((log, StopReason::Goal));
        }
        let grad = jac.transpose_mul(&r);
        if grad.iter().map(|g| g * g).sum::<f64>().sqrt() < cfg.min_grad {
            return Ok((log, StopReason::MinGradient));
        }
        let base = net.params().to_vec();
        loop {
            if mu > cfg.lm_mu_max {
                return Ok((log, StopReason::MaxMu));
            }
            let Some(delta) = lm_step(&jac, &r, mu) else {
                mu *= cfg.lm_mu_inc;
                continue;
            };
            for ((w, b), d) in net.params_mut().iter_mut().zip(&base).zip(&delta) {
                *w = b + d;
            }
            let trial = net.mse(data)?;
            if !trial.is_finite() && !mse.is_finite() {
                return Err(Error::Training(format!("non-finite loss at epoch {epoch}")));
            }
            if trial < mse {
                mu = (mu * cfg.lm_mu_dec).max(1e-20);
                log.push(EpochRecord {
                    epoch,
                    mse: trial,
                    mu: Some(mu),
                });
                break;
            }
            net.params_mut().copy_from_slice(&base);
            mu *= cfg.lm_mu_inc;
        }
        if log.last().is_some_and(|e| e.mse <= cfg.goal_mse) {
            return Ok((log, StopReason::Goal));
        }
    }
    Ok((log, StopReason::MaxEpochs))
}
