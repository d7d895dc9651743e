//! Subsampling sweeps: estimates on random `p x q` submatrices over a grid of
//! sizes, with a fresh draw of rows and columns per repetition.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{
    estimate_all_variants, estimate_dimensionality, Centering, Correction, DimEstimate, EstimatorVariant,
};
use crate::matrix::Observations;
use crate::synth::derive_seed;

/// Default sample-size grid; values above the data size are dropped by callers.
pub const DEFAULT_GRID: [usize; 7] = [25, 50, 100, 200, 400, 800, 1600];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub p: usize,
    pub q: usize,
    pub repetition: usize,
    /// Seed of the row and column draw for this cell and repetition.
    pub seed: u64,
    pub estimate: DimEstimate,
    /// Time spent on the draw and every variant of this cell, shared by its records.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid_p: Vec<usize>,
    pub grid_q: Vec<usize>,
    pub repetitions: usize,
    pub variants: Vec<EstimatorVariant>,
    pub base_seed: u64,
    /// Ordered by `p`, then `q`, then repetition, then variant as requested.
    pub records: Vec<SweepRecord>,
}

/// Draws `k` of `n` indices uniformly without replacement, returned sorted.
fn draw(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut idx = sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

/// Every requested variant on one submatrix. Variants sharing a centering
/// share one Gram product; failures become invalid records.
fn evaluate(obs: Observations<'_>, variants: &[EstimatorVariant]) -> Vec<DimEstimate> {
    let mut shared: BTreeMap<Centering, Option<BTreeMap<Correction, DimEstimate>>> = BTreeMap::new();
    variants
        .iter()
        .map(|&variant| {
            let group = shared
                .entry(variant.centering)
                .or_insert_with(|| estimate_all_variants(obs, variant.centering, None).ok());
            match group {
                Some(all) => all[&variant.correction].clone(),
                None => estimate_dimensionality(obs, variant, None)
                    .unwrap_or_else(|e| DimEstimate::failed(variant, obs.is_pair(), &e)),
            }
        })
        .collect()
}

pub fn subsample_sweep<'a>(
    obs: impl Into<Observations<'a>>,
    grid_p: &[usize],
    grid_q: &[usize],
    repetitions: usize,
    variants: &[EstimatorVariant],
    base_seed: u64,
) -> Result<SweepResult> {
    let obs = obs.into();
    let (rows, cols) = obs.shape();
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    for (axis, grid, available) in [("rows", grid_p, rows), ("columns", grid_q, cols)] {
        if let Some(&requested) = grid.iter().find(|&&v| v > available || v == 0) {
            if requested == 0 {
                return Err(Error::InvalidArgument(format!("grid values along {axis} must be positive")));
            }
            return Err(Error::GridExceedsData {
                axis,
                requested,
                available,
            });
        }
    }

    let cells: Vec<(usize, usize, usize)> = grid_p
        .iter()
        .flat_map(|&p| grid_q.iter().flat_map(move |&q| (0..repetitions).map(move |r| (p, q, r))))
        .collect();
    let records: Vec<Vec<SweepRecord>> = cells
        .par_iter()
        .map(|&(p, q, repetition)| {
            let start = Instant::now();
            let seed = derive_seed(base_seed, &[p as u64, q as u64, repetition as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let row_idx = draw(&mut rng, rows, p);
            let col_idx = draw(&mut rng, cols, q);
            let estimates = match obs {
                Observations::Single(m) => evaluate((&m.submatrix(&row_idx, &col_idx)).into(), variants),
                Observations::Pair(t) => evaluate((&t.submatrix(&row_idx, &col_idx)).into(), variants),
            };
            let elapsed = start.elapsed();
            estimates
                .into_iter()
                .map(|estimate| SweepRecord {
                    p,
                    q,
                    repetition,
                    seed,
                    estimate,
                    elapsed,
                })
                .collect()
        })
        .collect();

    Ok(SweepResult {
        grid_p: grid_p.to_vec(),
        grid_q: grid_q.to_vec(),
        repetitions,
        variants: variants.to_vec(),
        base_seed,
        records: records.into_iter().flatten().collect(),
    })
}

/// The four corrections under one centering, in canonical order.
pub fn all_corrections(centering: Centering) -> Vec<EstimatorVariant> {
    Correction::ALL
        .iter()
        .map(|&c| EstimatorVariant::new(c, centering))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, PopulationSpec};

    #[test]
    fn full_grid_matches_direct_estimate() {
        let m = generate(&PopulationSpec::linear(3, 0.5), 20, 12, 4).unwrap();
        let variants = all_corrections(Centering::Task);
        let sweep = subsample_sweep(&m, &[20], &[12], 1, &variants, 7).unwrap();
        for (record, v) in sweep.records.iter().zip(&variants) {
            let direct = estimate_dimensionality(&m, *v, None).unwrap();
            assert_eq!(record.estimate, direct);
        }
    }

    #[test]
    fn grid_must_fit() {
        let m = generate(&PopulationSpec::linear(2, 0.1), 10, 5, 1).unwrap();
        let err = subsample_sweep(&m, &[11], &[5], 1, &[EstimatorVariant::both()], 0).unwrap_err();
        assert!(matches!(err, Error::GridExceedsData { axis: "rows", requested: 11, available: 10 }));
    }

    #[test]
    fn undersized_cells_are_kept_as_invalid() {
        let m = generate(&PopulationSpec::linear(2, 0.1), 10, 5, 1).unwrap();
        let variants = all_corrections(Centering::Task);
        let sweep = subsample_sweep(&m, &[3], &[5], 2, &variants, 0).unwrap();
        assert_eq!(sweep.records.len(), 8);
        let both = sweep.records.iter().find(|r| r.estimate.variant.correction == Correction::Both);
        assert!(!both.unwrap().estimate.is_valid());
        let naive = &sweep.records[0].estimate;
        assert!(naive.is_valid());
    }

    #[test]
    fn draws_are_sorted_and_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let idx = draw(&mut rng, 50, 20);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }
}
