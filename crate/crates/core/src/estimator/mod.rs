//! Participation-ratio estimators with optional removal of coincident-index
//! (self-pairing) terms along either axis.

mod contraction;
mod estimate;
mod variant;

use std::collections::BTreeMap;

use ndarray::{Array2, Axis};

pub use contraction::{ContractionContext, FeatureAxis, Pattern, TERM_PATTERNS};
pub use estimate::{DimEstimate, TermBreakdown};
pub use variant::{Centering, Correction, EstimatorVariant};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::matrix::{Observations, WeightVector};

/// Builds the contraction context for `obs` with features along `axis`.
///
/// Fails if the feature axis has fewer than two entries, since no unequal
/// feature pair exists then.
pub fn unequal_pair_contraction<'a>(
    obs: impl Into<Observations<'a>>,
    axis: FeatureAxis,
) -> Result<ContractionContext<'a>> {
    let obs = obs.into();
    let len = match axis {
        FeatureAxis::Column => obs.cols(),
        FeatureAxis::Row => obs.rows(),
    };
    if len < 2 {
        return Err(Error::FeatureAxisTooSmall { len });
    }
    Ok(build_context(obs, axis == FeatureAxis::Row, None, false))
}

/// The five term estimates and assembled `A`, `B` for one variant.
pub fn compute_terms<'a>(
    obs: impl Into<Observations<'a>>,
    variant: EstimatorVariant,
    weights: Option<&WeightVector>,
) -> Result<TermBreakdown> {
    let obs = obs.into();
    check_preconditions(obs, variant, weights)?;
    let contexts = contexts_for(obs, variant.centering, weights);
    Ok(terms_from(&contexts, variant))
}

/// Estimate the participation ratio of the covariance underlying `obs`.
///
/// A trial pair removes additive noise that is independent across trials;
/// a single matrix does not. An estimate whose denominator is not positive
/// comes back with `value = None` rather than as an error.
pub fn estimate_dimensionality<'a>(
    obs: impl Into<Observations<'a>>,
    variant: EstimatorVariant,
    weights: Option<&WeightVector>,
) -> Result<DimEstimate> {
    let obs = obs.into();
    let terms = compute_terms(obs, variant, weights)?;
    Ok(DimEstimate::from_terms(terms, variant, obs.is_pair()))
}

/// All four corrections for one centering mode, sharing one Gram product.
pub fn estimate_all_variants<'a>(
    obs: impl Into<Observations<'a>>,
    centering: Centering,
    weights: Option<&WeightVector>,
) -> Result<BTreeMap<Correction, DimEstimate>> {
    let obs = obs.into();
    check_preconditions(obs, EstimatorVariant::new(Correction::Both, centering), weights)?;
    let contexts = contexts_for(obs, centering, weights);
    Ok(Correction::ALL
        .iter()
        .map(|&correction| {
            let variant = EstimatorVariant::new(correction, centering);
            let terms = terms_from(&contexts, variant);
            (correction, DimEstimate::from_terms(terms, variant, obs.is_pair()))
        })
        .collect())
}

/// Same as [`estimate_all_variants`] but over every centering mode too.
pub fn estimate_every_variant<'a>(
    obs: impl Into<Observations<'a>>,
    weights: Option<&WeightVector>,
) -> Result<BTreeMap<EstimatorVariant, DimEstimate>> {
    let obs = obs.into();
    let mut out = BTreeMap::new();
    for centering in Centering::ALL {
        for (correction, est) in estimate_all_variants(obs, centering, weights)? {
            out.insert(EstimatorVariant::new(correction, centering), est);
        }
    }
    Ok(out)
}

pub(crate) fn check_preconditions(obs: Observations<'_>, variant: EstimatorVariant, weights: Option<&WeightVector>) -> Result<()> {
    let (rows, cols) = obs.shape();
    if let Some(w) = weights {
        if w.len() != rows {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {rows} rows",
                w.len()
            )));
        }
    }
    // four distinct indices along the sample axis, two along the feature axis
    let (sample_need, feature_need) = (4, 2);
    let (row_need, col_need) = if variant.centering.transposes() {
        (feature_need, sample_need)
    } else {
        (sample_need, feature_need)
    };
    let row_need = if variant.correction.corrects_rows() { row_need } else { 1 };
    let col_need = if variant.correction.corrects_cols() { col_need } else { 1 };
    if rows < row_need {
        return Err(Error::InsufficientRows {
            required: row_need,
            actual: rows,
        });
    }
    if cols < col_need {
        return Err(Error::InsufficientColumns {
            required: col_need,
            actual: cols,
        });
    }
    if let Some(w) = weights {
        let positive = w.positive_count();
        if positive < row_need {
            return Err(Error::DegenerateWeights {
                positive,
                required: row_need,
            });
        }
    }
    Ok(())
}

fn build_context<'a>(
    obs: Observations<'a>,
    transpose: bool,
    weights: Option<&WeightVector>,
    swap: bool,
) -> ContractionContext<'a> {
    let (first, second) = if swap {
        (obs.second(), obs.first())
    } else {
        (obs.first(), obs.second())
    };
    let same = std::ptr::eq(first, second);
    // terms are invariant to a common weight scale; dividing by the largest
    // weight makes uniform weights exactly one, so they fold in without rounding
    let w: Option<Vec<f64>> = weights.map(|w| {
        let max = w.as_slice().iter().copied().fold(0.0, f64::max);
        let scale = if max > 0.0 { max } else { 1.0 };
        w.as_slice().iter().map(|v| v / scale).collect()
    });
    let w = w.as_deref();
    if transpose {
        let xt = first.view().reversed_axes();
        let yt = (!same).then(|| second.view().reversed_axes());
        ContractionContext::build(xt, yt, None, w)
    } else {
        let y = (!same).then(|| second.view());
        ContractionContext::build(first.view(), y, w, None)
    }
}

fn contexts_for<'a>(
    obs: Observations<'a>,
    centering: Centering,
    weights: Option<&WeightVector>,
) -> Vec<ContractionContext<'a>> {
    let transpose = centering.transposes();
    let mut contexts = vec![build_context(obs, transpose, weights, false)];
    if obs.symmetrize() {
        contexts.push(build_context(obs, transpose, weights, true));
    }
    contexts
}

fn terms_from(contexts: &[ContractionContext<'_>], variant: EstimatorVariant) -> TermBreakdown {
    let (rows, cols) = (variant.correction.corrects_rows(), variant.correction.corrects_cols());
    // the computation axis is the sample axis unless transposed
    let (sample_distinct, feature_distinct) = if variant.centering.transposes() {
        (cols, rows)
    } else {
        (rows, cols)
    };
    let mut acc = [Dd::ZERO; 5];
    for ctx in contexts {
        for (a, t) in acc.iter_mut().zip(ctx.terms_dd(sample_distinct, feature_distinct)) {
            *a = *a + t;
        }
    }
    // one or two contexts, so the scale is exact
    let scale = 1.0 / contexts.len() as f64;
    TermBreakdown::assemble_dd(acc.map(|t| t.mul_f64(scale)), variant.centering)
}

/// Estimates on row subsets of one fixed input, reusing its `X Yᵀ` product.
///
/// Estimating on rows `N` equals estimating on the submatrix of those rows;
/// the Gram block `G[N, N]` is sliced out instead of recomputed. Neuron
/// centering puts the rows on the feature axis, where no such reuse exists,
/// so it falls back to the extracted submatrix.
pub(crate) struct RowSubsetEstimator<'a> {
    obs: Observations<'a>,
    // the product and its low-order parts when it was accumulated exactly
    gram: Option<(Array2<f64>, Option<Array2<f64>>)>,
}

impl<'a> RowSubsetEstimator<'a> {
    pub(crate) fn new(obs: Observations<'a>, centering: Centering) -> Self {
        let gram = (!centering.transposes()).then(|| contraction::gram_product(obs.first().view(), obs.second().view()));
        Self { obs, gram }
    }

    /// Caller guarantees the structural preconditions for `rows`.
    pub(crate) fn estimate(&self, rows: &[usize], variant: EstimatorVariant) -> DimEstimate {
        let (gram, gram_lo) = match &self.gram {
            Some(g) if !variant.centering.transposes() => g,
            _ => return self.estimate_extracted(rows, variant),
        };
        let single = !self.obs.is_pair();
        let x = self.obs.first().values().select(Axis(0), rows);
        let y = (!single).then(|| self.obs.second().values().select(Axis(0), rows));
        let slice = |g: &Array2<f64>| g.select(Axis(0), rows).select(Axis(1), rows);
        let block = slice(gram);
        let block_lo = gram_lo.as_ref().map(slice);
        let mut contexts = Vec::with_capacity(2);
        if self.obs.symmetrize() {
            let transpose = |g: &Array2<f64>| g.t().as_standard_layout().into_owned();
            let swapped = transpose(&block);
            let swapped_lo = block_lo.as_ref().map(transpose);
            let (xs, ys) = (x.clone(), y.clone());
            contexts.push(ContractionContext::with_gram(x.into(), y.map(Into::into), block, block_lo));
            contexts.push(ContractionContext::with_gram(
                ys.expect("symmetrized input is a pair").into(),
                Some(xs.into()),
                swapped,
                swapped_lo,
            ));
        } else {
            contexts.push(ContractionContext::with_gram(x.into(), y.map(Into::into), block, block_lo));
        }
        DimEstimate::from_terms(terms_from(&contexts, variant), variant, !single)
    }

    fn estimate_extracted(&self, rows: &[usize], variant: EstimatorVariant) -> DimEstimate {
        let result = match self.obs {
            Observations::Single(m) => estimate_dimensionality(&m.select_rows(rows), variant, None),
            Observations::Pair(p) => estimate_dimensionality(&p.select_rows(rows), variant, None),
        };
        result.unwrap_or_else(|e| DimEstimate::failed(variant, self.obs.is_pair(), &e))
    }
}
