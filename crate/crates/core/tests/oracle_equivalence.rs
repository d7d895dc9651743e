use prdim::estimator::{compute_terms, Centering, Correction, EstimatorVariant};
use prdim::oracle::direct_terms;
use prdim::{Observations, SampleMatrix, TrialPair, WeightVector};
use proptest::prelude::*;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = SampleMatrix> {
    prop::collection::vec(-2.0f64..2.0, rows * cols)
        .prop_map(move |v| SampleMatrix::from_shape_vec(rows, cols, v).unwrap())
}

fn check_all(obs: Observations<'_>, weights: Option<&WeightVector>) -> Result<(), TestCaseError> {
    for centering in Centering::ALL {
        for correction in Correction::ALL {
            let v = EstimatorVariant::new(correction, centering);
            let fast = compute_terms(obs, v, weights);
            let slow = direct_terms(obs, v, weights);
            match (fast, slow) {
                (Ok(f), Ok(s)) => {
                    for (k, (a, b)) in f.as_array().iter().zip(s.as_array()).enumerate() {
                        prop_assert!(rel_err(*a, b) <= 1e-10, "{v} t{}: {a} vs {b}", k + 1);
                    }
                }
                (Err(_), Err(_)) => {}
                (f, s) => prop_assert!(false, "{v}: disagreement on preconditions {f:?} vs {s:?}"),
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_matrix_matches_oracle(m in (4usize..=8, 4usize..=6).prop_flat_map(|(p, q)| matrix(p, q))) {
        check_all((&m).into(), None)?;
    }

    #[test]
    fn weighted_matches_oracle(
        (m, w) in (4usize..=8, 4usize..=6).prop_flat_map(|(p, q)| (matrix(p, q), prop::collection::vec(0.1f64..3.0, p)))
    ) {
        let w = WeightVector::new(w).unwrap();
        check_all((&m).into(), Some(&w))?;
    }

    #[test]
    fn trial_pair_matches_oracle(
        (a, b, sym) in (4usize..=8, 4usize..=6).prop_flat_map(|(p, q)| (matrix(p, q), matrix(p, q), any::<bool>()))
    ) {
        let pair = TrialPair::new(a, b).unwrap().symmetrized(sym);
        check_all((&pair).into(), None)?;
    }
}
