use ndarray::{s, Array2};
use prdim::analysis::{alignment_report, estimate_kernel_moments, predict_bias_variance, BiasTarget};
use prdim::estimator::{Centering, Correction, EstimatorVariant};
use prdim::synth::{generate, PopulationSpec};
use prdim::{Error, SampleMatrix};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn linear_moments_match_gaussian_values() {
    // k(x, y) = x·y with x ~ N(0, I_d): c = c' = 1 + 2/d and ψ = d/(d + 2), on both axes
    let d = 5.0;
    let m = estimate_kernel_moments(&generate(&PopulationSpec::linear(5, 0.0), 2000, 2000, 80).unwrap()).unwrap();
    for c in [m.c, m.c_prime, m.c_tilde, m.c_tilde_prime] {
        assert!(rel(c, 1.0 + 2.0 / d) <= 0.05, "{m:?}");
    }
    for psi in [m.psi, m.psi_tilde] {
        assert!(rel(psi, d / (d + 2.0)) <= 0.05, "{m:?}");
    }
    assert!(rel(m.gamma_pop, d) <= 0.05, "{m:?}");
}

#[test]
fn rank_one_moments_follow_from_the_factors() {
    let u: Vec<f64> = (0..30).map(|i| ((i * 13) % 7) as f64 - 2.5).collect();
    let v: Vec<f64> = (0..20).map(|j| 0.3 + ((j * 5) % 9) as f64 / 4.0).collect();
    let phi = SampleMatrix::new(Array2::from_shape_fn((30, 20), |(i, j)| u[i] * v[j])).unwrap();
    let m = estimate_kernel_moments(&phi).unwrap();
    // with k(i, j) ∝ u_i u_j every constant reduces to moments of u (and of v for the column side)
    let psi = |x: &[f64]| {
        let n = x.len() as f64;
        let m2 = x.iter().map(|a| a * a).sum::<f64>() / n;
        let m4 = x.iter().map(|a| a.powi(4)).sum::<f64>() / n;
        m2 * m2 / m4
    };
    let (psi_u, psi_v) = (psi(&u), psi(&v));
    assert!(rel(m.psi, psi_u) <= 1e-10, "{} vs {psi_u}", m.psi);
    assert!(rel(m.psi_tilde, psi_v) <= 1e-10);
    for c in [m.c, m.c_prime] {
        assert!(rel(c, 1.0 / psi_u) <= 1e-10);
    }
    for c in [m.c_tilde, m.c_tilde_prime] {
        assert!(rel(c, 1.0 / psi_v) <= 1e-10);
    }
    assert!(rel(m.gamma_pop, 1.0) <= 1e-10);
    // c = c' on both axes removes the shared bias term entirely
    let (bias, _) = predict_bias_variance(&m, 50, 50, BiasTarget::Both);
    assert!(bias.abs() <= 1e-10);
}

#[test]
fn disjoint_blocks_are_half_aligned() {
    let block = generate(&PopulationSpec::linear(3, 0.2), 20, 6, 4).unwrap();
    let place = |offset: usize| {
        let mut a = Array2::zeros((40, 6));
        a.slice_mut(s![offset..offset + 20, ..]).assign(block.values());
        SampleMatrix::new(a).unwrap()
    };
    // the split of the joint estimate into per-manifold parts is exact for the plug-in estimator
    let v = EstimatorVariant::new(Correction::Naive, Centering::None);
    let r = alignment_report(&[place(0), place(20)], v).unwrap();
    assert_eq!(r.cka_matrix[[0, 1]], 0.0);
    assert!((r.exd - 0.5).abs() <= 1e-12, "{}", r.exd);
    assert!((r.per_manifold[0].kappa - 0.25).abs() <= 1e-12);
}

#[test]
fn copies_are_fully_aligned() {
    let a = generate(&PopulationSpec::rff(2, 1.0, 0.1), 30, 10, 9).unwrap();
    let r = alignment_report(&[a.clone(), a], EstimatorVariant::new(Correction::Naive, Centering::Task)).unwrap();
    assert!(r.cka_matrix.iter().all(|c| (c - 1.0).abs() <= 1e-12));
    assert!(rel(r.gamma_joint, r.per_manifold[0].gamma) <= 1e-12);
    assert!(r.exd.abs() <= 1e-12);
}

#[test]
fn manifolds_must_share_rows() {
    let a = generate(&PopulationSpec::linear(2, 0.1), 10, 4, 1).unwrap();
    let b = generate(&PopulationSpec::linear(2, 0.1), 11, 4, 2).unwrap();
    let err = alignment_report(&[a.clone(), b], EstimatorVariant::both()).unwrap_err();
    assert!(matches!(err, Error::RowCountMismatch { index: 1, expected: 10, actual: 11 }));
    assert!(matches!(alignment_report(&[a], EstimatorVariant::both()).unwrap_err(), Error::TooFewManifolds(1)));
}
