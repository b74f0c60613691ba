//! Finite-sample confidence bound on how much larger the Nyström
//! reconstruction error is than that of full kernel PCA.
//!
//! With λ̂_j the eigenvalues of (1/m) K_mm (uncentred, descending) and
//! sentinels λ̂_0 = +∞, λ̂_{m+1} = −∞,
//!
//! ```text
//! D   = ((n − m)/n) · 2B√δ / √(n − m)
//! D_j = min( (2D)² / min(λ̂_{j−1} − λ̂_j, λ̂_j − λ̂_{j+1})², 1 )
//! R_n(Ṽ_d) − R_n(V̂_d) ≤ Σ_{j≤d} λ̂_j D_j + D · max_{k≤d} D_k
//! ```
//!
//! holds with probability at least 1 − 2e^{−δ} over the subset draw, for
//! data with zero mean in feature space and a kernel bounded by B.

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub delta: f64,
    pub d_const: f64,
    /// D_1, ..., D_d.
    pub d_j: Vec<f64>,
    pub bound: f64,
    pub sup_bound: f64,
    pub m: usize,
    pub n: usize,
    pub d: usize,
    /// 1 − 2e^{−δ}.
    pub confidence: f64,
}

/// δ such that 1 − 2e^{−δ} equals `confidence`.
pub fn delta_from_confidence(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return param_err(format!("confidence must lie in (0, 1), got {confidence}"));
    }
    Ok((2.0 / (1.0 - confidence)).ln())
}

/// Evaluates the bound for dimension `d` from the uncentred subset spectrum.
pub fn confidence_bound(subset_eigs: &[f64], m: usize, n: usize, sup_bound: f64, delta: f64, d: usize) -> Result<BoundResult> {
    if !sup_bound.is_finite() || sup_bound <= 0.0 {
        return param_err(format!(
            "kernel bound B must be positive and finite, got {sup_bound}; normalize unbounded kernels first"
        ));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return param_err(format!("delta must be positive, got {delta}"));
    }
    if m == 0 || m > n {
        return param_err(format!("need 1 <= m <= n, got m = {m}, n = {n}"));
    }
    if subset_eigs.len() != m {
        return param_err(format!("expected {m} eigenvalues, got {}", subset_eigs.len()));
    }
    if d == 0 || d > m {
        return param_err(format!("dimension d = {d} outside 1..={m}"));
    }
    if subset_eigs.iter().any(|v| !v.is_finite()) || subset_eigs.windows(2).any(|w| w[0] < w[1]) {
        return param_err("eigenvalues must be finite and sorted in descending order");
    }

    let extra = (n - m) as f64;
    let d_const = if n == m { 0.0 } else { extra / n as f64 * 2.0 * sup_bound * delta.sqrt() / extra.sqrt() };
    let eig = |j: usize| -> f64 {
        // 1-based with sentinels
        if j == 0 {
            f64::INFINITY
        } else if j > m {
            f64::NEG_INFINITY
        } else {
            subset_eigs[j - 1]
        }
    };
    let d_j: Vec<f64> = (1..=d)
        .map(|j| {
            let gap = (eig(j - 1) - eig(j)).min(eig(j) - eig(j + 1));
            if d_const == 0.0 {
                0.0
            } else if gap <= 0.0 {
                1.0
            } else {
                ((2.0 * d_const).powi(2) / (gap * gap)).min(1.0)
            }
        })
        .collect();
    let weighted: f64 = d_j.iter().zip(subset_eigs).map(|(dj, l)| l * dj).sum();
    let max_dj = d_j.iter().copied().fold(0.0, f64::max);
    Ok(BoundResult {
        delta,
        d_const,
        bound: weighted + d_const * max_dj,
        d_j,
        sup_bound,
        m,
        n,
        d,
        confidence: 1.0 - 2.0 * (-delta).exp(),
    })
}

/// 2B√δ/√n, a Hilbert–Schmidt deviation bound between the empirical and
/// population covariance operators.
pub fn covariance_deviation_bound(sup_bound: f64, n: usize, delta: f64) -> Result<f64> {
    if n == 0 {
        return param_err("n must be at least 1");
    }
    Ok(2.0 * sup_bound * delta.sqrt() / (n as f64).sqrt())
}
