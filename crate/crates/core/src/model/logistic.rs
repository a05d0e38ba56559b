//! L2-regularized logistic regression fitted by full-batch gradient descent
//! with Armijo backtracking.
//!
//! Parameters are laid out as `[bias, beta_1, ..., beta_m]`; the bias is not
//! penalized.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub lambda: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda: 1.0,
            tolerance: 1e-6,
            max_iterations: 200_000,
        }
    }
}

/// Affine map to zero mean and unit variance per column; constant columns
/// keep scale 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[f64], rows: usize, cols: usize) -> Self {
        let mut means = vec![0.0; cols];
        let mut scales = vec![0.0; cols];
        for j in 0..cols {
            let mean = (0..rows).map(|i| x[i * cols + j]).sum::<f64>() / rows as f64;
            let var = (0..rows).map(|i| (x[i * cols + j] - mean).powi(2)).sum::<f64>() / rows as f64;
            means[j] = mean;
            scales[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Standardizer { means, scales }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Regularized negative log-likelihood and its gradient.
///
/// `x` is row-major `rows x (params.len() - 1)`.
pub fn loss_and_gradient(params: &[f64], x: &[f64], y: &[bool], lambda: f64) -> (f64, Vec<f64>) {
    let m = params.len() - 1;
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for (i, &label) in y.iter().enumerate() {
        let row = &x[i * m..(i + 1) * m];
        let z = params[0] + row.iter().zip(&params[1..]).map(|(a, b)| a * b).sum::<f64>();
        let t = if label { 1.0 } else { 0.0 };
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        grad[0] += r;
        for j in 0..m {
            grad[j + 1] += r * row[j];
        }
    }
    for j in 1..params.len() {
        loss += 0.5 * lambda * params[j] * params[j];
        grad[j] += lambda * params[j];
    }
    (loss, grad)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub params: Vec<f64>,
    pub iterations: usize,
    pub losses: Vec<f64>,
}

/// Minimizes [`loss_and_gradient`] from zero. Step lengths start from the
/// Barzilai-Borwein estimate and are halved until the Armijo condition
/// holds, so the loss never increases.
pub fn fit(x: &[f64], y: &[bool], cols: usize, config: &FitConfig) -> Result<Fit> {
    let mut params = vec![0.0; cols + 1];
    let (mut loss, mut grad) = loss_and_gradient(&params, x, y, config.lambda);
    let mut losses = vec![loss];
    // Curvature of the loss is at most n/4 per unit feature norm, plus lambda.
    let mut step = 1.0 / (0.25 * y.len() as f64 * (cols as f64 + 1.0) + config.lambda);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for it in 0..config.max_iterations {
        let gnorm = norm(&grad);
        if gnorm <= config.tolerance {
            return Ok(Fit {
                params,
                iterations: it,
                losses,
            });
        }
        if let Some((p_old, g_old)) = &prev {
            let s: Vec<f64> = params.iter().zip(p_old).map(|(a, b)| a - b).collect();
            let d: Vec<f64> = grad.iter().zip(g_old).map(|(a, b)| a - b).collect();
            let sd: f64 = s.iter().zip(&d).map(|(a, b)| a * b).sum();
            let dd: f64 = d.iter().map(|a| a * a).sum();
            if sd > 0.0 && dd > 0.0 {
                step = sd / dd;
            }
        }
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (l, g) = loss_and_gradient(&trial, x, y, config.lambda);
            if l <= loss - 1e-4 * step * gnorm * gnorm {
                accepted = Some((trial, l, g));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, l, g)) = accepted else {
            // No representable step decreases the loss: we are at the
            // numerical floor.
            if gnorm <= config.tolerance * 1e3 {
                return Ok(Fit {
                    params,
                    iterations: it,
                    losses,
                });
            }
            return Err(Error::NoConvergence {
                iterations: it,
                grad_norm: gnorm,
                tolerance: config.tolerance,
                loss,
            });
        };
        prev = Some((std::mem::replace(&mut params, trial), std::mem::replace(&mut grad, g)));
        loss = l;
        losses.push(loss);
    }
    Err(Error::NoConvergence {
        iterations: config.max_iterations,
        grad_norm: norm(&grad),
        tolerance: config.tolerance,
        loss,
    })
}
