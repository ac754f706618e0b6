//! Seeded stochastic (sub)gradient descent for L2-regularized binary linear
//! classifiers with logistic or hinge loss.
//!
//! The weight vector is kept as `scale * v` so the per-step L2 shrink is a
//! single scalar multiply and updates stay proportional to the number of
//! nonzero features. Step size decays as `eta0 / sqrt(t)`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::features::SparseVector;
use crate::rng::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Logistic,
    Hinge,
}

/// Training diagnostics. Non-convergence is reported, not fatal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdReport {
    pub final_objective: f64,
    pub converged: bool,
    pub epochs_run: usize,
}

fn log1p_exp(z: f64) -> f64 {
    // ln(1 + e^z), stable for large |z|
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn loss_value(loss: LossKind, margin: f64) -> f64 {
    match loss {
        LossKind::Logistic => log1p_exp(-margin),
        LossKind::Hinge => (1.0 - margin).max(0.0),
    }
}

/// d loss / d margin, times the label, gives the per-sample gradient factor
/// `g` with `grad_w = lambda * w + mean(g_i * x_i)`.
fn loss_grad_factor(loss: LossKind, target: f64, margin: f64) -> f64 {
    match loss {
        LossKind::Logistic => -target / (1.0 + margin.exp()),
        LossKind::Hinge => {
            if margin < 1.0 {
                -target
            } else {
                0.0
            }
        }
    }
}

/// Full-batch objective: `lambda/2 * ||w||^2 + mean_i loss(y_i * (w.x_i + b))`.
pub fn objective(
    loss: LossKind,
    weights: &[f64],
    bias: f64,
    rows: &[SparseVector],
    targets: &[f64],
    lambda: f64,
) -> f64 {
    assert_eq!(rows.len(), targets.len());
    let reg = 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>();
    if rows.is_empty() {
        return reg;
    }
    let data: f64 = rows
        .iter()
        .zip(targets)
        .map(|(x, &y)| loss_value(loss, y * (x.dot_dense(weights) + bias)))
        .sum();
    reg + data / rows.len() as f64
}

/// Analytic full-batch (sub)gradient of [`objective`].
pub fn gradient(
    loss: LossKind,
    weights: &[f64],
    bias: f64,
    rows: &[SparseVector],
    targets: &[f64],
    lambda: f64,
) -> (Vec<f64>, f64) {
    assert_eq!(rows.len(), targets.len());
    let mut grad_w: Vec<f64> = weights.iter().map(|w| lambda * w).collect();
    let mut grad_b = 0.0;
    if rows.is_empty() {
        return (grad_w, grad_b);
    }
    let inv_n = 1.0 / rows.len() as f64;
    for (x, &y) in rows.iter().zip(targets) {
        let margin = y * (x.dot_dense(weights) + bias);
        let g = loss_grad_factor(loss, y, margin) * inv_n;
        if g != 0.0 {
            for &(j, v) in x.entries() {
                grad_w[j as usize] += g * v;
            }
            grad_b += g;
        }
    }
    (grad_w, grad_b)
}

/// Train one binary classifier. `targets` must be +-1.
///
/// Deterministic for a fixed `(rows order, seed)`.
#[allow(clippy::too_many_arguments)]
pub fn train_binary(
    loss: LossKind,
    rows: &[SparseVector],
    targets: &[f64],
    dim: usize,
    eta0: f64,
    epochs: usize,
    lambda: f64,
    seed: u64,
) -> (Vec<f64>, f64, SgdReport) {
    assert_eq!(rows.len(), targets.len());
    debug_assert!(targets.iter().all(|&y| y == 1.0 || y == -1.0));
    let mut v = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut rng = rng_from(seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut step = 0u64;
    let mut prev_objective = f64::INFINITY;
    let mut final_objective = objective(loss, &v, bias, rows, targets, lambda);
    let mut converged = false;

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            step += 1;
            let eta = eta0 / (step as f64).sqrt();
            let x = &rows[i];
            let y = targets[i];
            let margin = y * (scale * x.dot_dense(&v) + bias);
            // w <- (1 - eta*lambda) w - eta * g * x
            let shrink = 1.0 - eta * lambda;
            if shrink <= 1e-12 {
                v.iter_mut().for_each(|w| *w = 0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
                if scale < 1e-9 {
                    v.iter_mut().for_each(|w| *w *= scale);
                    scale = 1.0;
                }
            }
            let g = loss_grad_factor(loss, y, margin);
            if g != 0.0 {
                let step_over_scale = eta * g / scale;
                for &(j, value) in x.entries() {
                    v[j as usize] -= step_over_scale * value;
                }
                bias -= eta * g;
            }
        }
        let w_now: Vec<f64> = v.iter().map(|w| w * scale).collect();
        final_objective = objective(loss, &w_now, bias, rows, targets, lambda);
        converged = (prev_objective - final_objective).abs()
            <= 1e-5 * prev_objective.abs().max(1.0);
        prev_objective = final_objective;
    }

    let weights: Vec<f64> = v.into_iter().map(|w| w * scale).collect();
    (
        weights,
        bias,
        SgdReport {
            final_objective,
            converged,
            epochs_run: epochs,
        },
    )
}
