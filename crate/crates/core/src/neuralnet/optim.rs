//! First-order trainers on the mean squared error: conjugate gradient with
//! Powell/Beale restarts, scaled conjugate gradient, one-step secant and
//! adaptive-rate gradient descent with momentum.

use super::net::{Batch, CascadeNet};
use super::train::{EpochRecord, StopReason, TrainConfig};
use crate::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(base: &[f64], alpha: f64, dir: &[f64]) -> Vec<f64> {
    base.iter().zip(dir).map(|(b, d)| b + alpha * d).collect()
}

/// MSE and its gradient as a function of the flat parameter vector.
struct Objective<'a> {
    net: &'a mut CascadeNet,
    data: &'a Batch,
    scale: f64,
}

impl<'a> Objective<'a> {
    fn new(net: &'a mut CascadeNet, data: &'a Batch) -> Self {
        let scale = 2.0 / (data.len() * net.topology().output_dim) as f64;
        Self { net, data, scale }
    }

    fn value(&mut self, w: &[f64]) -> Result<f64> {
        self.net.params_mut().copy_from_slice(w);
        self.net.mse(self.data)
    }

    fn value_grad(&mut self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.net.params_mut().copy_from_slice(w);
        let f = self.net.mse(self.data)?;
        let mut g = self.net.gradient(self.data)?;
        g.iter_mut().for_each(|v| *v *= self.scale);
        Ok((f, g))
    }

    fn finish(&mut self, w: &[f64]) {
        self.net.params_mut().copy_from_slice(w);
    }
}

fn ensure_finite(f: f64, epoch: usize) -> Result<()> {
    if f.is_finite() {
        Ok(())
    } else {
        Err(Error::Training(format!("non-finite loss at epoch {epoch}")))
    }
}

struct LineResult {
    alpha: f64,
    w: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

/// Strong-Wolfe line search along the descent direction `d`.
fn line_search(
    obj: &mut Objective<'_>,
    w: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    alpha_init: f64,
) -> Result<Option<LineResult>> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.1;
    const MAX_EVALS: usize = 30;
    let dphi0 = dot(g0, d);
    if !(dphi0 < 0.0) {
        return Ok(None);
    }
    let mut evals = 0;
    let mut best: Option<LineResult> = None;
    let eval = |obj: &mut Objective<'_>, alpha: f64, best: &mut Option<LineResult>| -> Result<(f64, f64, Vec<f64>, Vec<f64>)> {
        let wn = axpy(w, alpha, d);
        let (f, g) = obj.value_grad(&wn)?;
        let dphi = dot(&g, d);
        if f.is_finite() && f < f0 && best.as_ref().is_none_or(|b| f < b.f) {
            *best = Some(LineResult {
                alpha,
                w: wn.clone(),
                f,
                g: g.clone(),
            });
        }
        Ok((f, dphi, wn, g))
    };

    let mut a_prev = 0.0;
    let mut f_prev = f0;
    let mut dphi_prev = dphi0;
    let mut alpha = alpha_init;
    let (mut lo, mut hi, mut f_lo, mut dphi_lo, mut f_hi);
    loop {
        let (f, dphi, wn, g) = eval(obj, alpha, &mut best)?;
        evals += 1;
        if !f.is_finite() || f > f0 + C1 * alpha * dphi0 || (evals > 1 && f >= f_prev) {
            lo = a_prev;
            f_lo = f_prev;
            dphi_lo = dphi_prev;
            hi = alpha;
            f_hi = if f.is_finite() { f } else { f64::MAX };
            break;
        }
        if dphi.abs() <= -C2 * dphi0 {
            return Ok(Some(LineResult { alpha, w: wn, f, g }));
        }
        if dphi >= 0.0 {
            lo = alpha;
            f_lo = f;
            dphi_lo = dphi;
            hi = a_prev;
            f_hi = f_prev;
            break;
        }
        if evals >= MAX_EVALS {
            return Ok(best);
        }
        a_prev = alpha;
        f_prev = f;
        dphi_prev = dphi;
        alpha *= 2.0;
    }

    // Zoom between lo (satisfies sufficient decrease) and hi.
    while evals < MAX_EVALS {
        let width = hi - lo;
        let denom = 2.0 * (f_hi - f_lo - dphi_lo * width);
        let mut a = if denom > 0.0 && f_hi < f64::MAX {
            lo - dphi_lo * width * width / denom
        } else {
            lo + 0.5 * width
        };
        let (a_min, a_max) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let margin = 0.1 * (a_max - a_min);
        if !(a > a_min + margin && a < a_max - margin) {
            a = 0.5 * (lo + hi);
        }
        if (a_max - a_min) < 1e-16 * a_max.abs().max(1e-300) {
            break;
        }
        let (f, dphi, wn, g) = eval(obj, a, &mut best)?;
        evals += 1;
        if !f.is_finite() || f > f0 + C1 * a * dphi0 || f >= f_lo {
            hi = a;
            f_hi = if f.is_finite() { f } else { f64::MAX };
        } else {
            if dphi.abs() <= -C2 * dphi0 {
                return Ok(Some(LineResult { alpha: a, w: wn, f, g }));
            }
            if dphi * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = a;
            f_lo = f;
            dphi_lo = dphi;
        }
    }
    Ok(best)
}

/// Initial trial step: reuse the previous step's first-order decrease.
fn next_alpha(prev: Option<(f64, f64)>, slope: f64, g_norm: f64) -> f64 {
    match prev {
        Some((alpha, prev_slope)) if slope < 0.0 => {
            (alpha * prev_slope / slope).clamp(1e-12, 1e6)
        }
        _ => (1.0 / g_norm.max(1e-12)).min(1.0),
    }
}

/// Polak-Ribière conjugate gradient with the Powell/Beale restart test
/// `|g_kᵀ·g_{k−1}| ≥ 0.2·|g_k|²`.
pub(crate) fn train_cgb(net: &mut CascadeNet, data: &Batch, cfg: &TrainConfig) -> Result<(Vec<EpochRecord>, StopReason)> {
    let n_params = net.param_count();
    let mut obj = Objective::new(net, data);
    let mut w = obj.net.params().to_vec();
    let (mut f, mut g) = obj.value_grad(&w)?;
    ensure_finite(f, 0)?;
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut prev: Option<(f64, f64)> = None;
    let mut since_restart = 0usize;
    let mut log = Vec::new();
    let mut stop = StopReason::MaxEpochs;
    for epoch in 1..=cfg.max_epochs {
        if f <= cfg.goal_mse {
            stop = StopReason::Goal;
            break;
        }
        let g_norm = dot(&g, &g).sqrt();
        if g_norm < cfg.min_grad {
            stop = StopReason::MinGradient;
            break;
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            slope = -g_norm * g_norm;
            since_restart = 0;
        }
        let alpha0 = next_alpha(prev, slope, g_norm);
        let step = match line_search(&mut obj, &w, f, &g, &d, alpha0)? {
            Some(s) => s,
            None if since_restart > 0 => {
                // Retry once along steepest descent.
                d = g.iter().map(|v| -v).collect();
                since_restart = 0;
                slope = -g_norm * g_norm;
                match line_search(&mut obj, &w, f, &g, &d, next_alpha(None, slope, g_norm))? {
                    Some(s) => s,
                    None => {
                        stop = StopReason::LineSearch;
                        break;
                    }
                }
            }
            None => {
                stop = StopReason::LineSearch;
                break;
            }
        };
        prev = Some((step.alpha, slope));
        let g_old = std::mem::replace(&mut g, step.g);
        w = step.w;
        f = step.f;
        ensure_finite(f, epoch)?;
        log.push(EpochRecord { epoch, mse: f, mu: None });

        since_restart += 1;
        let gg = dot(&g, &g);
        let restart = dot(&g, &g_old).abs() >= 0.2 * gg || since_restart >= n_params;
        if restart {
            d = g.iter().map(|v| -v).collect();
            since_restart = 0;
        } else {
            let beta = (dot(&g, &g) - dot(&g, &g_old)) / dot(&g_old, &g_old);
            let beta = beta.max(0.0);
            d = g.iter().zip(&d).map(|(gi, di)| -gi + beta * di).collect();
        }
    }
    obj.finish(&w);
    Ok((log, stop))
}

/// Møller's scaled conjugate gradient: a Levenberg-Marquardt style
/// scaling of a finite-difference curvature estimate replaces the line search.
pub(crate) fn train_scg(net: &mut CascadeNet, data: &Batch, cfg: &TrainConfig) -> Result<(Vec<EpochRecord>, StopReason)> {
    const SIGMA0: f64 = 1e-4;
    let n_params = net.param_count();
    let mut obj = Objective::new(net, data);
    let mut w = obj.net.params().to_vec();
    let (mut f_old, mut g_new) = obj.value_grad(&w)?;
    ensure_finite(f_old, 0)?;
    let mut g_old = g_new.clone();
    let mut d: Vec<f64> = g_new.iter().map(|v| -v).collect();
    let mut success = true;
    let mut n_success = 0usize;
    let mut lambda = 1.0f64;
    let (mut mu, mut kappa, mut theta) = (0.0, 0.0, 0.0);
    let mut log = Vec::new();
    let mut stop = StopReason::MaxEpochs;
    for epoch in 1..=cfg.max_epochs {
        if f_old <= cfg.goal_mse {
            stop = StopReason::Goal;
            break;
        }
        if dot(&g_new, &g_new).sqrt() < cfg.min_grad {
            stop = StopReason::MinGradient;
            break;
        }
        if success {
            mu = dot(&d, &g_new);
            if mu >= 0.0 {
                d = g_new.iter().map(|v| -v).collect();
                mu = dot(&d, &g_new);
            }
            kappa = dot(&d, &d);
            if kappa < f64::EPSILON {
                stop = StopReason::MinGradient;
                break;
            }
            let sigma = SIGMA0 / kappa.sqrt();
            let (_, g_plus) = obj.value_grad(&axpy(&w, sigma, &d))?;
            theta = d
                .iter()
                .zip(g_plus.iter().zip(&g_new))
                .map(|(di, (gp, gn))| di * (gp - gn))
                .sum::<f64>()
                / sigma;
        }
        let mut delta = theta + lambda * kappa;
        if delta <= 0.0 {
            delta = lambda * kappa;
            lambda -= theta / kappa;
        }
        let alpha = -mu / delta;
        let w_new = axpy(&w, alpha, &d);
        let f_new = obj.value(&w_new)?;
        let comparison = 2.0 * (f_new - f_old) / (alpha * mu);
        if comparison >= 0.0 && f_new.is_finite() {
            success = true;
            n_success += 1;
            w = w_new;
            f_old = f_new;
            g_old = std::mem::replace(&mut g_new, obj.value_grad(&w)?.1);
        } else {
            success = false;
        }
        ensure_finite(f_old, epoch)?;
        log.push(EpochRecord { epoch, mse: f_old, mu: None });
        if comparison < 0.25 || !comparison.is_finite() {
            lambda = (4.0 * lambda).min(1e100);
        }
        if comparison > 0.75 {
            lambda = (0.5 * lambda).max(1e-15);
        }
        if n_success == n_params {
            d = g_new.iter().map(|v| -v).collect();
            n_success = 0;
        } else if success {
            let gamma = g_old
                .iter()
                .zip(&g_new)
                .map(|(go, gn)| (go - gn) * gn)
                .sum::<f64>()
                / mu;
            d = d.iter().zip(&g_new).map(|(di, gn)| gamma * di - gn).collect();
        }
    }
    obj.finish(&w);
    Ok((log, stop))
}

/// One-step secant (memoryless BFGS) with line search.
pub(crate) fn train_oss(net: &mut CascadeNet, data: &Batch, cfg: &TrainConfig) -> Result<(Vec<EpochRecord>, StopReason)> {
    let mut obj = Objective::new(net, data);
    let mut w = obj.net.params().to_vec();
    let (mut f, mut g) = obj.value_grad(&w)?;
    ensure_finite(f, 0)?;
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut prev = None;
    let mut log = Vec::new();
    let mut stop = StopReason::MaxEpochs;
    for epoch in 1..=cfg.max_epochs {
        if f <= cfg.goal_mse {
            stop = StopReason::Goal;
            break;
        }
        let g_norm = dot(&g, &g).sqrt();
        if g_norm < cfg.min_grad {
            stop = StopReason::MinGradient;
            break;
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            slope = -g_norm * g_norm;
        }
        let Some(step) = line_search(&mut obj, &w, f, &g, &d, next_alpha(prev, slope, g_norm))? else {
            stop = StopReason::LineSearch;
            break;
        };
        prev = Some((step.alpha, slope));
        let s: Vec<f64> = step.w.iter().zip(&w).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        w = step.w;
        f = step.f;
        g = step.g;
        ensure_finite(f, epoch)?;
        log.push(EpochRecord { epoch, mse: f, mu: None });
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let sg = dot(&s, &g);
            let yg = dot(&y, &g);
            let b = sg / sy;
            let a = -(1.0 + dot(&y, &y) / sy) * b + yg / sy;
            d = g
                .iter()
                .zip(s.iter().zip(&y))
                .map(|(gi, (si, yi))| -gi + a * si + b * yi)
                .collect();
        } else {
            d = g.iter().map(|v| -v).collect();
        }
    }
    obj.finish(&w);
    Ok((log, stop))
}

/// Batch gradient descent with momentum 0.9 and an adaptive learning rate
/// starting from `cfg.learning_rate`.
pub(crate) fn train_gdx(net: &mut CascadeNet, data: &Batch, cfg: &TrainConfig) -> Result<(Vec<EpochRecord>, StopReason)> {
    const MOMENTUM: f64 = 0.9;
    const LR_INC: f64 = 1.05;
    const LR_DEC: f64 = 0.7;
    const MAX_PERF_INC: f64 = 1.04;
    let mut obj = Objective::new(net, data);
    let mut w = obj.net.params().to_vec();
    let (mut f, mut g) = obj.value_grad(&w)?;
    ensure_finite(f, 0)?;
    let mut lr = cfg.learning_rate;
    let mut mc = MOMENTUM;
    let mut dw: Vec<f64> = g.iter().map(|v| -lr * v).collect();
    let mut log = Vec::new();
    let mut stop = StopReason::MaxEpochs;
    for epoch in 1..=cfg.max_epochs {
        if f <= cfg.goal_mse {
            stop = StopReason::Goal;
            break;
        }
        if dot(&g, &g).sqrt() < cfg.min_grad {
            stop = StopReason::MinGradient;
            break;
        }
        dw = dw
            .iter()
            .zip(&g)
            .map(|(prev, gi)| mc * prev - (1.0 - mc) * lr * gi)
            .collect();
        let w_new: Vec<f64> = w.iter().zip(&dw).map(|(a, b)| a + b).collect();
        let (f_new, g_new) = obj.value_grad(&w_new)?;
        if !f_new.is_finite() || f_new > f * MAX_PERF_INC {
            lr *= LR_DEC;
            mc = 0.0;
            dw.iter_mut().for_each(|v| *v = 0.0);
        } else {
            if f_new < f {
                lr *= LR_INC;
            }
            mc = MOMENTUM;
            w = w_new;
            f = f_new;
            g = g_new;
        }
        ensure_finite(f, epoch)?;
        log.push(EpochRecord { epoch, mse: f, mu: None });
    }
    obj.finish(&w);
    Ok((log, stop))
}
