//! Kernel-moment constants and the leading-order bias and variance of the
//! naive and fully corrected estimators.
//!
//! A reference matrix stands in for the population. Its row kernel
//! `k(x_i, x_j) = Σ_α Φ[i,α] Φ[j,α] / Q` and column kernel
//! `k̃(w_α, w_β) = Σ_i Φ[i,α] Φ[i,β] / P` are averaged over the empirical
//! measure, diagonal pairs included. Centering is ignored throughout.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;
use crate::summation::pairwise_sum_by;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMoments {
    pub c: f64,
    pub c_prime: f64,
    pub c_tilde: f64,
    pub c_tilde_prime: f64,
    pub psi: f64,
    pub psi_tilde: f64,
    /// `⟨k(x,x)⟩² / ⟨k(x,y)²⟩`, the uncentered participation ratio of the reference.
    pub gamma_pop: f64,
}

/// Which estimator a prediction refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasTarget {
    Naive,
    Both,
}

/// Moments of one kernel matrix under the empirical measure.
struct KernelStats {
    /// `⟨k(x,x)⟩`
    diag: f64,
    /// `⟨k(x,x)²⟩`
    diag_sq: f64,
    /// `⟨k(x,y)²⟩`
    sq: f64,
    /// `⟨⟨k(x,y)²⟩_x²⟩_y`
    sq_row_sq: f64,
    /// `⟨k(x,y)² k(x,x)⟩`
    sq_diag: f64,
}

impl KernelStats {
    fn of(k: &Array2<f64>) -> Self {
        let n = k.nrows();
        let nf = n as f64;
        let diag = pairwise_sum_by(n, |i| k[[i, i]]) / nf;
        let diag_sq = pairwise_sum_by(n, |i| k[[i, i]] * k[[i, i]]) / nf;
        // column means of k², one per y
        let col_sq: Vec<f64> = (0..n)
            .map(|j| pairwise_sum_by(n, |i| k[[i, j]] * k[[i, j]]) / nf)
            .collect();
        let sq = pairwise_sum_by(n, |j| col_sq[j]) / nf;
        let sq_row_sq = pairwise_sum_by(n, |j| col_sq[j] * col_sq[j]) / nf;
        let sq_diag = pairwise_sum_by(n, |i| {
            let kii = k[[i, i]];
            pairwise_sum_by(n, |j| k[[i, j]] * k[[i, j]]) * kii
        }) / (nf * nf);
        Self {
            diag,
            diag_sq,
            sq,
            sq_row_sq,
            sq_diag,
        }
    }

    fn c(&self) -> f64 {
        self.sq_row_sq / (self.sq * self.sq)
    }

    fn c_prime(&self) -> f64 {
        self.sq_diag / (self.sq * self.diag)
    }

    fn psi(&self) -> f64 {
        self.diag * self.diag / self.diag_sq
    }
}

fn kernel(phi: ArrayView2<'_, f64>, scale: f64) -> Array2<f64> {
    let mut k = phi.dot(&phi.t());
    k /= scale;
    k
}

/// Plug-in kernel moments of `phi_ref`, treated as the population.
pub fn estimate_kernel_moments(phi_ref: &SampleMatrix) -> Result<KernelMoments> {
    let (p, q) = phi_ref.shape();
    let phi = phi_ref.view();
    let rows = KernelStats::of(&kernel(phi, q as f64));
    if rows.diag == 0.0 {
        return Err(Error::DegenerateKernel);
    }
    let cols = KernelStats::of(&kernel(phi.t(), p as f64));
    Ok(KernelMoments {
        c: rows.c(),
        c_prime: rows.c_prime(),
        c_tilde: cols.c(),
        c_tilde_prime: cols.c_prime(),
        psi: rows.psi(),
        psi_tilde: cols.psi(),
        gamma_pop: rows.diag * rows.diag / rows.sq,
    })
}

/// Leading-order `(bias, variance)` of the chosen estimator at sample size
/// `p x q`, from the moments of the population.
pub fn predict_bias_variance(m: &KernelMoments, p: usize, q: usize, target: BiasTarget) -> (f64, f64) {
    let g = m.gamma_pop;
    let (p, q) = (p as f64, q as f64);
    let shared_bias = 4.0 * g * ((m.c - m.c_prime) / p + (m.c_tilde - m.c_tilde_prime) / q);
    let shared_var = 4.0 * g * g / p * (1.0 / m.psi + m.c - 2.0 * m.c_prime)
        + 4.0 * g * g / q * (1.0 / m.psi_tilde + m.c_tilde - 2.0 * m.c_tilde_prime);
    match target {
        BiasTarget::Both => (shared_bias, shared_var),
        BiasTarget::Naive => (
            shared_bias - g * (g - 1.0) * (1.0 / (p * m.psi) + 1.0 / (q * m.psi_tilde)),
            shared_var - 2.0 * g * (g - 1.0) * (1.0 / p + 1.0 / q),
        ),
    }
}
