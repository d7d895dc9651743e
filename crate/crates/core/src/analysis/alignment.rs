//! Joint dimensionality of several manifolds sampled on the same stimuli,
//! split into per-manifold dimensionalities, variance shares and pairwise
//! kernel alignment (uncentered CKA).
//!
//! With `w_ij = √(κ_i κ_j / (γ_i γ_j))` the inverse joint dimensionality is
//! `Σ κ_i/γ_i + Σ_{i≠j} w_ij CKA_ij`. The bounds `γ_ortho` (all CKA zero) and
//! `γ_align` (all CKA one) follow, and the normalized position of `1/γ_joint`
//! between them is the `w`-weighted mean CKA. The identity is exact for the
//! naive estimator without centering; other variants report the residuals.

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::estimator::{estimate_dimensionality, Centering, EstimatorVariant};
use crate::matrix::SampleMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldShare {
    /// Squared share of the joint trace, `κ_i`.
    pub kappa: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport {
    pub variant: EstimatorVariant,
    pub per_manifold: Vec<ManifoldShare>,
    pub gamma_joint: f64,
    pub gamma_align: f64,
    pub gamma_ortho: f64,
    pub exd: f64,
    pub cka_matrix: Array2<f64>,
    pub weighted_mean_cka: f64,
    /// `|1/γ_joint − (Σ κ/γ + Σ w CKA)| · γ_joint`
    pub decomposition_residual: f64,
    /// `|(1/γ_joint − 1/γ_ortho) / (1/γ_align − 1/γ_ortho) − weighted_mean_cka|`
    pub identity_residual: f64,
}

fn centered(phi: ArrayView2<'_, f64>, centering: Centering) -> Array2<f64> {
    let mut c = phi.to_owned();
    match centering {
        Centering::Task => c -= &phi.mean_axis(Axis(0)).expect("non-empty"),
        Centering::Neuron => c -= &phi.mean_axis(Axis(1)).expect("non-empty").insert_axis(Axis(1)),
        Centering::None => {}
    }
    c
}

/// `Tr(A Aᵀ B Bᵀ)` through whichever cross product is smaller.
fn kernel_inner(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let p = a.nrows();
    let s: Dd = if a.ncols() * b.ncols() <= p * p {
        a.t().dot(b).iter().map(|&v| Dd::prod(v, v)).sum()
    } else {
        let (ka, kb) = (a.dot(&a.t()), b.dot(&b.t()));
        ka.iter().zip(kb.iter()).map(|(&x, &y)| Dd::prod(x, y)).sum()
    };
    s.to_f64()
}

fn trace(a: &Array2<f64>) -> f64 {
    a.iter().map(|&v| Dd::prod(v, v)).sum::<Dd>().to_f64()
}

/// Alignment decomposition of the column-concatenation of `manifolds`.
pub fn alignment_report(manifolds: &[SampleMatrix], variant: EstimatorVariant) -> Result<AlignmentReport> {
    let n = manifolds.len();
    if n < 2 {
        return Err(Error::TooFewManifolds(n));
    }
    let p = manifolds[0].rows();
    for (index, m) in manifolds.iter().enumerate() {
        if m.rows() != p {
            return Err(Error::RowCountMismatch {
                index,
                expected: p,
                actual: m.rows(),
            });
        }
    }

    let gammas = manifolds
        .iter()
        .map(|m| estimate_dimensionality(m, variant, None).map(|e| e.gamma()))
        .collect::<Result<Vec<f64>>>()?;
    let views: Vec<ArrayView2<'_, f64>> = manifolds.iter().map(|m| m.view()).collect();
    let joint = SampleMatrix::new(concatenate(Axis(1), &views).expect("row counts checked"))?;
    let gamma_joint = estimate_dimensionality(&joint, variant, None)?.gamma();

    let centered: Vec<Array2<f64>> = views.iter().map(|v| centered(*v, variant.centering)).collect();
    // r_i Tr(K_i) = Tr(Φ_i Φ_iᵀ) / ΣQ_l, so the shares need only the raw traces
    let traces: Vec<f64> = centered.iter().map(trace).collect();
    let trace_total: f64 = traces.iter().sum();
    let kappas: Vec<f64> = traces.iter().map(|t| (t / trace_total).powi(2)).collect();

    let self_inner: Vec<f64> = centered.par_iter().map(|c| kernel_inner(c, c)).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let cross: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| kernel_inner(&centered[i], &centered[j]) / (self_inner[i] * self_inner[j]).sqrt())
        .collect();
    let mut cka_matrix = Array2::eye(n);
    for (&(i, j), &v) in pairs.iter().zip(&cross) {
        cka_matrix[[i, j]] = v;
        cka_matrix[[j, i]] = v;
    }

    let inv_ortho: f64 = kappas.iter().zip(&gammas).map(|(k, g)| k / g).sum();
    let root_sum: f64 = kappas.iter().zip(&gammas).map(|(k, g)| (k / g).sqrt()).sum();
    let inv_align = root_sum * root_sum;
    let mut weight_total = 0.0;
    let mut weighted_cka = 0.0;
    for (&(i, j), &v) in pairs.iter().zip(&cross) {
        let w = (kappas[i] * kappas[j] / (gammas[i] * gammas[j])).sqrt();
        weight_total += 2.0 * w;
        weighted_cka += 2.0 * w * v;
    }
    let weighted_mean_cka = weighted_cka / weight_total;
    let inv_joint = 1.0 / gamma_joint;
    let decomposition_residual = (inv_joint - (inv_ortho + weighted_cka)).abs() * gamma_joint;
    let identity_residual = ((inv_joint - inv_ortho) / (inv_align - inv_ortho) - weighted_mean_cka).abs();
    let gamma_align = 1.0 / inv_align;

    Ok(AlignmentReport {
        variant,
        per_manifold: kappas
            .iter()
            .zip(&gammas)
            .map(|(&kappa, &gamma)| ManifoldShare { kappa, gamma })
            .collect(),
        gamma_joint,
        gamma_align,
        gamma_ortho: 1.0 / inv_ortho,
        exd: (gamma_joint - gamma_align) / gamma_joint,
        cka_matrix,
        weighted_mean_cka,
        decomposition_residual,
        identity_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::Correction;

    const NAIVE_NONE: EstimatorVariant = EstimatorVariant::new(Correction::Naive, Centering::None);

    fn m(rows: &[Vec<f64>]) -> SampleMatrix {
        SampleMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn needs_two_manifolds() {
        let a = m(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(matches!(alignment_report(&[a], NAIVE_NONE), Err(Error::TooFewManifolds(1))));
    }

    #[test]
    fn row_counts_must_agree() {
        let a = m(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = m(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 7.0]]);
        assert!(matches!(
            alignment_report(&[a, b], NAIVE_NONE),
            Err(Error::RowCountMismatch { index: 1, expected: 2, actual: 3 })
        ));
    }

    #[test]
    fn identical_copies_are_fully_aligned() {
        let a = m(&[vec![1.0, 0.5, -1.0], vec![0.2, 2.0, 0.0], vec![-0.7, 0.1, 1.5], vec![0.3, -0.4, 0.9]]);
        let r = alignment_report(&[a.clone(), a.clone(), a], NAIVE_NONE).unwrap();
        assert!(r.exd.abs() <= 1e-12, "{}", r.exd);
        assert!(r.cka_matrix.iter().all(|v| (v - 1.0).abs() <= 1e-12));
        assert!((r.gamma_joint - r.per_manifold[0].gamma).abs() <= 1e-12 * r.gamma_joint);
    }

    #[test]
    fn kernel_inner_paths_agree() {
        let a = Array2::from_shape_fn((3, 5), |(i, j)| (i * 5 + j) as f64 * 0.1 - 0.6);
        let b = Array2::from_shape_fn((3, 4), |(i, j)| ((i + 2 * j) % 5) as f64 - 1.5);
        // 5·4 > 9 takes the P x P path; compare against the Q x Q formula directly
        let direct: f64 = a.t().dot(&b).iter().map(|v| v * v).sum();
        assert!((kernel_inner(&a, &b) - direct).abs() <= 1e-12 * direct);
    }
}
