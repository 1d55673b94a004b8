//! Linear max-margin classifier trained by deterministic full-batch
//! subgradient descent on the primal hinge objective
//!
//! ```text
//! F(w) = λ/2 ‖w‖² + 1/n Σ max(0, 1 − yᵢ w·xᵢ),   λ = 1 / (C n)
//! ```
//!
//! which has the same minimiser as `½‖w‖² + C Σ hinge`. The bias is an extra
//! constant feature. Iterates always lie in the span of the training rows, so
//! the solver works on the coefficients of that expansion through the Gram
//! matrix and only materialises `w` at the end; its cost does not depend on
//! the feature dimension. The step size follows the `1/(λt)` schedule and
//! the best iterate seen is returned.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub epochs: usize,
    pub bias_feature: f64,
}

/// Row-major `n × n` Gram matrix of the bias-augmented rows.
pub(crate) fn gram(n: usize, bias_feature: f64, dot: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let b2 = bias_feature * bias_feature;
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = dot(i, j) + b2;
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

fn decisions(k: &[f64], alpha: &[f64], out: &mut [f64]) {
    let n = alpha.len();
    out.iter_mut().for_each(|o| *o = 0.0);
    for (j, &a) in alpha.iter().enumerate() {
        if a != 0.0 {
            let row = &k[j * n..(j + 1) * n];
            for (o, &kv) in out.iter_mut().zip(row) {
                *o += a * kv;
            }
        }
    }
}

/// Returns expansion coefficients `α` with `w = Σ αᵢ xᵢ`.
pub(crate) fn fit(k: &[f64], labels: &[f64], params: &SvmParams) -> Vec<f64> {
    let n = labels.len();
    if n == 0 {
        return Vec::new();
    }
    let lambda = 1.0 / (params.c * n as f64);
    let radius_sq = 1.0 / lambda;
    let mut alpha = vec![0.0; n];
    let mut f = vec![0.0; n];
    let mut best = alpha.clone();
    let mut best_obj = f64::INFINITY;

    for t in 1..=params.epochs + 1 {
        decisions(k, &alpha, &mut f);
        let norm_sq: f64 = alpha.iter().zip(&f).map(|(a, fi)| a * fi).sum();
        let hinge: f64 = labels
            .iter()
            .zip(&f)
            .map(|(y, fi)| (1.0 - y * fi).max(0.0))
            .sum::<f64>()
            / n as f64;
        let obj = 0.5 * lambda * norm_sq + hinge;
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&alpha);
        }
        if t > params.epochs {
            break;
        }

        let tf = t as f64;
        let shrink = 1.0 - 1.0 / tf;
        let step = params.c / tf;
        for i in 0..n {
            let violated = labels[i] * f[i] < 1.0;
            alpha[i] *= shrink;
            if violated {
                alpha[i] += step * labels[i];
            }
        }
        // Project onto the ball of radius 1/sqrt(λ), which contains the optimum.
        decisions(k, &alpha, &mut f);
        let norm_sq: f64 = alpha.iter().zip(&f).map(|(a, fi)| a * fi).sum();
        if norm_sq > radius_sq {
            let s = libm::sqrt(radius_sq / norm_sq);
            alpha.iter_mut().for_each(|a| *a *= s);
        }
    }
    best
}
