//! Brute-force references.
//!
//! [`direct_terms`] evaluates every term by looping over all index tuples and
//! keeping those with the required distinctness; it shares no arithmetic with
//! the contraction path. [`population_reference`] stands in for the infinite
//! population with one large draw, centered explicitly and reduced through
//! its kernel matrix.

use ndarray::{Array2, ArrayView2, Axis};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::estimator::{check_preconditions, Centering, EstimatorVariant, TermBreakdown, TERM_PATTERNS};
use crate::matrix::{Observations, WeightVector};
use crate::summation::pairwise_sum_by;
use crate::synth::{generate, PopulationSpec};

pub const ORACLE_MAX_ROWS: usize = 12;
pub const ORACLE_MAX_COLS: usize = 8;

/// Every assignment of `labels` values in `0..n`, in odometer order.
fn assignments(labels: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(labels as u32);
    (0..total).map(move |mut code| {
        let mut out = vec![0; labels];
        for slot in out.iter_mut() {
            *slot = code % n;
            code /= n;
        }
        out
    })
}

fn pairwise_distinct(values: &[usize]) -> bool {
    values
        .iter()
        .enumerate()
        .all(|(a, x)| values[a + 1..].iter().all(|y| x != y))
}

/// Term estimates by direct summation over index tuples.
///
/// With `centering = neuron` the sample indices run over the columns of the
/// supplied matrix. Each summand is weighted by the product of the weights of
/// the original rows its four factors come from.
pub fn direct_terms<'a>(
    obs: impl Into<Observations<'a>>,
    variant: EstimatorVariant,
    weights: Option<&WeightVector>,
) -> Result<TermBreakdown> {
    let obs = obs.into();
    let (rows, cols) = obs.shape();
    if rows > ORACLE_MAX_ROWS || cols > ORACLE_MAX_COLS {
        return Err(Error::MatrixTooLargeForOracle {
            rows,
            cols,
            max_rows: ORACLE_MAX_ROWS,
            max_cols: ORACLE_MAX_COLS,
        });
    }
    check_preconditions(obs, variant, weights)?;

    let first = obs.first().view();
    let second = obs.second().view();
    let row_weight = |r: usize| weights.map_or(1.0, |w| w.as_slice()[r]);

    // Sample index s and feature index f address entry (s, f) of the supplied
    // matrix, or (f, s) when the computation runs on the transpose.
    let neuron = variant.centering == Centering::Neuron;
    let (n_samples, n_features) = if neuron { (cols, rows) } else { (rows, cols) };
    let entry = |m: &ArrayView2<'_, f64>, s: usize, f: usize| if neuron { m[[f, s]] } else { m[[s, f]] };
    let original_row = |s: usize, f: usize| if neuron { f } else { s };
    let (distinct_samples, distinct_features) = if neuron {
        (variant.correction.corrects_cols(), variant.correction.corrects_rows())
    } else {
        (variant.correction.corrects_rows(), variant.correction.corrects_cols())
    };

    let one_pass = |x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>| -> [f64; 5] {
        let mut out = [0.0; 5];
        for (t, pattern) in out.iter_mut().zip(TERM_PATTERNS.iter()) {
            let labels = pattern.iter().copied().max().unwrap() as usize + 1;
            let mut num = Dd::ZERO;
            let mut den = Dd::ZERO;
            for values in assignments(labels, n_samples) {
                if distinct_samples && !pairwise_distinct(&values) {
                    continue;
                }
                let [i, j, k, l] = pattern.map(|p| values[p as usize]);
                for alpha in 0..n_features {
                    for beta in 0..n_features {
                        if distinct_features && alpha == beta {
                            continue;
                        }
                        let w = Dd::ONE
                            .mul_f64(row_weight(original_row(i, alpha)))
                            .mul_f64(row_weight(original_row(j, alpha)))
                            .mul_f64(row_weight(original_row(k, beta)))
                            .mul_f64(row_weight(original_row(l, beta)));
                        let v = w
                            .mul_f64(entry(x, i, alpha))
                            .mul_f64(entry(y, j, alpha))
                            .mul_f64(entry(x, k, beta))
                            .mul_f64(entry(y, l, beta));
                        num = num + v;
                        den = den + w;
                    }
                }
            }
            *t = num.div(den);
        }
        out
    };

    let mut terms = one_pass(&first, &second);
    if obs.symmetrize() {
        let swapped = one_pass(&second, &first);
        for (t, s) in terms.iter_mut().zip(swapped) {
            *t = (*t + s) / 2.0;
        }
    }
    Ok(TermBreakdown::assemble(terms, variant.centering))
}

/// Population-level numerator, denominator and ratio from one large draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationReference {
    pub a_pop: f64,
    pub b_pop: f64,
    pub gamma_pop: f64,
    pub reference_size: (usize, usize),
    pub standard_error_a: f64,
    pub standard_error_b: f64,
}

const FOLDS: usize = 10;

/// [`population_reference_centered`] with task (column) centering.
pub fn population_reference(spec: &PopulationSpec, p_ref: usize, q_ref: usize, seed: u64) -> Result<PopulationReference> {
    population_reference_centered(spec, p_ref, q_ref, seed, Centering::Task)
}

/// `A = (tr K / P)²` and `B = ‖K‖² / P²` with `K = Φc Φcᵀ / Q` on an
/// explicitly centered `P_ref x Q_ref` draw. Standard errors come from the
/// spread of the same quantities over 10 disjoint row folds.
pub fn population_reference_centered(
    spec: &PopulationSpec,
    p_ref: usize,
    q_ref: usize,
    seed: u64,
    centering: Centering,
) -> Result<PopulationReference> {
    if p_ref < 2 * FOLDS || q_ref < 2 {
        return Err(Error::InvalidArgument(format!(
            "reference must be at least {}x2, got {p_ref}x{q_ref}",
            2 * FOLDS
        )));
    }
    let phi = generate(spec, p_ref, q_ref, seed)?;
    let (a_pop, b_pop) = kernel_moments(phi.view(), centering);

    let fold_len = p_ref / FOLDS;
    let folds: Vec<(f64, f64)> = (0..FOLDS)
        .map(|f| {
            let block = phi.view().slice_move(ndarray::s![f * fold_len..(f + 1) * fold_len, ..]);
            kernel_moments(block, centering)
        })
        .collect();
    let standard_error = |values: Vec<f64>| {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    };
    Ok(PopulationReference {
        a_pop,
        b_pop,
        gamma_pop: a_pop / b_pop,
        reference_size: (p_ref, q_ref),
        standard_error_a: standard_error(folds.iter().map(|f| f.0).collect()),
        standard_error_b: standard_error(folds.iter().map(|f| f.1).collect()),
    })
}

fn center(phi: ArrayView2<'_, f64>, centering: Centering) -> Array2<f64> {
    let mut c = phi.to_owned();
    match centering {
        Centering::Task => {
            let means = phi.mean_axis(Axis(0)).expect("non-empty");
            c -= &means;
        }
        Centering::Neuron => {
            let means = phi.mean_axis(Axis(1)).expect("non-empty");
            c -= &means.insert_axis(Axis(1));
        }
        Centering::None => {}
    }
    c
}

/// Naive `(A, B)` of a matrix treated as the population.
fn kernel_moments(phi: ArrayView2<'_, f64>, centering: Centering) -> (f64, f64) {
    let (p, q) = phi.dim();
    let c = center(phi, centering);
    // trace and Frobenius norm are the same for Φc Φcᵀ and Φcᵀ Φc
    let k = if p <= q { c.dot(&c.t()) } else { c.t().dot(&c) };
    let scale = (p * q) as f64;
    let n = k.nrows();
    let trace = pairwise_sum_by(n, |i| k[[i, i]]) / scale;
    let frob = pairwise_sum_by(n, |i| pairwise_sum_by(n, |j| k[[i, j]] * k[[i, j]])) / (scale * scale);
    (trace * trace, frob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::Correction;
    use crate::matrix::SampleMatrix;

    #[test]
    fn constant_matrix_has_zero_centered_moments() {
        let m = SampleMatrix::from_shape_vec(4, 2, vec![1.0; 8]).unwrap();
        let t = direct_terms(&m, EstimatorVariant::both(), None).unwrap();
        assert_eq!((t.a, t.b), (0.0, 0.0));
    }

    #[test]
    fn identity_naive_uncentered_t1_is_a_quarter() {
        let m = SampleMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let t = direct_terms(&m, EstimatorVariant::new(Correction::Naive, Centering::None), None).unwrap();
        assert_eq!(t.t1, 0.25);
    }

    #[test]
    fn size_cap_is_enforced() {
        let m = SampleMatrix::from_shape_vec(13, 2, vec![1.0; 26]).unwrap();
        assert!(matches!(
            direct_terms(&m, EstimatorVariant::naive(), None),
            Err(Error::MatrixTooLargeForOracle { rows: 13, .. })
        ));
    }

    #[test]
    fn assignments_enumerate_all_tuples() {
        let all: Vec<Vec<usize>> = assignments(2, 3).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all.iter().filter(|v| pairwise_distinct(v)).count(), 6);
    }
}
