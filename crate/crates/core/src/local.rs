//! Local dimensionality on metric balls, and the TwoNN baseline.
//!
//! Every row is a ball center. Rows within distance `r` get weight 1 and all
//! others weight 0, which makes the weighted estimator identical to the plain
//! estimator on the in-ball rows; balls with fewer than four rows are skipped.
//!
//! For a trial pair, distances use the element-wise trial mean while the
//! estimator still sees both trials.
//!
//! The local Mahalanobis metric at center `c` uses the covariance of the `k`
//! nearest Euclidean neighbours of `c` (center excluded) and its
//! pseudoinverse. Everything is expressed through the Gram matrix `H = B Bᵀ`
//! of the distance basis `B`: with `C` the double-centered block `H[N, N]`,
//! `C = U Λ Uᵀ`, and `e_j` the centered vector `H[n, j] - H[n, c]` over
//! `n ∈ N`,
//!
//! ```text
//! d²(c, j) = (k - 1) Σ_r (U_rᵀ e_j)² / λ_r²    over λ_r > 1e-12 λ_max
//! ```

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{check_preconditions, DimEstimate, EstimatorVariant, RowSubsetEstimator};
use crate::matrix::{Observations, SampleMatrix};
use crate::summation::pairwise_sum;

/// Fewest rows a ball may hold before it is estimated.
pub const MIN_BALL_SIZE: usize = 4;

const DEFAULT_K_NEIGHBORS: usize = 20;
const EIGEN_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    /// Pseudoinverse covariance of the `k` nearest Euclidean neighbours.
    Mahalanobis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSpec {
    /// Inclusive radius; `f64::INFINITY` takes every row.
    pub radius: f64,
    pub metric: Metric,
    /// Neighbours for the Mahalanobis covariance; `None` means `min(P - 1, 20)`.
    pub k_neighbors: Option<usize>,
}

impl BallSpec {
    pub fn euclidean(radius: f64) -> Self {
        Self {
            radius,
            metric: Metric::Euclidean,
            k_neighbors: None,
        }
    }

    pub fn mahalanobis(radius: f64, k_neighbors: Option<usize>) -> Self {
        Self {
            radius,
            metric: Metric::Mahalanobis,
            k_neighbors,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterEstimate {
    pub center: usize,
    pub ball_size: usize,
    pub estimate: DimEstimate,
}

/// Result at one radius. `per_center` holds the valid estimates only, so
/// `per_center.len() + skipped_centers` is the number of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDimResult {
    pub radius: f64,
    pub variant: EstimatorVariant,
    /// Mean over `per_center`; `None` when every center was skipped.
    pub mean_gamma: Option<f64>,
    pub per_center: Vec<CenterEstimate>,
    /// Centers whose ball had fewer than four rows or an invalid estimate.
    pub skipped_centers: usize,
    /// The part of `skipped_centers` whose ball had fewer than four rows.
    pub small_balls: usize,
}

impl LocalDimResult {
    /// Standard deviation of the per-center estimates.
    pub fn std_gamma(&self) -> Option<f64> {
        let n = self.per_center.len();
        if n < 2 {
            return None;
        }
        let mean = self.mean_gamma?;
        let sq: Vec<f64> = self.per_center.iter().map(|c| (c.estimate.gamma() - mean).powi(2)).collect();
        Some((pairwise_sum(&sq) / (n - 1) as f64).sqrt())
    }

    pub fn mean_ball_size(&self) -> Option<f64> {
        if self.per_center.is_empty() {
            return None;
        }
        let sizes: Vec<f64> = self.per_center.iter().map(|c| c.ball_size as f64).collect();
        Some(pairwise_sum(&sizes) / sizes.len() as f64)
    }
}

/// Local dimensionality at a single radius.
pub fn local_dimensionality<'a>(
    obs: impl Into<Observations<'a>>,
    ball: &BallSpec,
    variant: EstimatorVariant,
) -> Result<LocalDimResult> {
    let mut results = radius_sweep(obs, ball, &[ball.radius], variant)?;
    let result = results.pop().expect("one radius requested");
    if result.mean_gamma.is_none() {
        return Err(Error::AllBallsDegenerate);
    }
    Ok(result)
}

/// Local dimensionality at each radius, sharing distances across radii.
///
/// Radii where every center is skipped come back with `mean_gamma = None`;
/// the call fails with [`Error::AllBallsDegenerate`] only if that happens at
/// every radius.
pub fn radius_sweep<'a>(
    obs: impl Into<Observations<'a>>,
    template: &BallSpec,
    radii: &[f64],
    variant: EstimatorVariant,
) -> Result<Vec<LocalDimResult>> {
    let obs = obs.into();
    check_radii(obs, radii)?;
    let p = obs.rows();
    check_preconditions(obs, variant, None)?;

    let distances = ball_distances(obs, template)?;
    let estimator = RowSubsetEstimator::new(obs, variant.centering);

    let results: Vec<LocalDimResult> = radii
        .iter()
        .map(|&radius| {
            let outcomes: Vec<BallOutcome> = (0..p)
                .into_par_iter()
                .map(|center| {
                    let members: Vec<usize> = (0..p).filter(|&j| distances[center][j] <= radius).collect();
                    if members.len() < MIN_BALL_SIZE {
                        return BallOutcome::TooSmall;
                    }
                    let estimate = estimator.estimate(&members, variant);
                    if !estimate.is_valid() {
                        return BallOutcome::Invalid;
                    }
                    BallOutcome::Valid(CenterEstimate {
                        center,
                        ball_size: members.len(),
                        estimate,
                    })
                })
                .collect();
            let small_balls = outcomes.iter().filter(|o| matches!(o, BallOutcome::TooSmall)).count();
            let per_center: Vec<CenterEstimate> = outcomes
                .into_iter()
                .filter_map(|o| match o {
                    BallOutcome::Valid(c) => Some(c),
                    _ => None,
                })
                .collect();
            let skipped_centers = p - per_center.len();
            let mean_gamma = (!per_center.is_empty()).then(|| {
                let values: Vec<f64> = per_center.iter().map(|c| c.estimate.gamma()).collect();
                pairwise_sum(&values) / values.len() as f64
            });
            LocalDimResult {
                radius,
                variant,
                mean_gamma,
                per_center,
                skipped_centers,
                small_balls,
            }
        })
        .collect();

    if results.iter().all(|r| r.mean_gamma.is_none()) {
        return Err(Error::AllBallsDegenerate);
    }
    Ok(results)
}

fn check_radii(obs: Observations<'_>, radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|r| r.is_nan() || *r <= 0.0) || radii.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidRadii);
    }
    if obs.rows() < MIN_BALL_SIZE {
        return Err(Error::InsufficientRows {
            required: MIN_BALL_SIZE,
            actual: obs.rows(),
        });
    }
    Ok(())
}

/// First radius in `radii` at which at most `max_small_fraction` of the
/// centers have a ball with fewer than four rows. Depends only on the
/// distances, never on the estimates.
pub fn smallest_admissible_radius<'a>(
    obs: impl Into<Observations<'a>>,
    template: &BallSpec,
    radii: &[f64],
    max_small_fraction: f64,
) -> Result<f64> {
    let obs = obs.into();
    check_radii(obs, radii)?;
    if !(0.0..=1.0).contains(&max_small_fraction) {
        return Err(Error::InvalidArgument(format!(
            "small-ball fraction must lie in [0, 1], got {max_small_fraction}"
        )));
    }
    let distances = ball_distances(obs, template)?;
    let p = obs.rows();
    radii
        .iter()
        .copied()
        .find(|&radius| {
            let small = distances
                .iter()
                .filter(|row| row.iter().filter(|&&d| d <= radius).count() < MIN_BALL_SIZE)
                .count();
            small as f64 <= max_small_fraction * p as f64
        })
        .ok_or(Error::AllBallsDegenerate)
}

enum BallOutcome {
    TooSmall,
    Invalid,
    Valid(CenterEstimate),
}

/// Row `c` holds the distance from center `c` to every row.
fn ball_distances(obs: Observations<'_>, ball: &BallSpec) -> Result<Vec<Vec<f64>>> {
    let p = obs.rows();
    let basis = match obs {
        Observations::Single(m) => m.values().clone(),
        Observations::Pair(pair) => pair.mean().into_inner(),
    };
    let h = basis.dot(&basis.t());
    let euclid = |c: usize| -> Vec<f64> {
        (0..p)
            .map(|j| (h[[c, c]] + h[[j, j]] - 2.0 * h[[c, j]]).max(0.0).sqrt())
            .collect()
    };
    match ball.metric {
        Metric::Euclidean => Ok((0..p).into_par_iter().map(euclid).collect()),
        Metric::Mahalanobis => {
            let k = ball.k_neighbors.unwrap_or(DEFAULT_K_NEIGHBORS.min(p - 1));
            if k < 2 || k > p - 1 {
                return Err(Error::InvalidBall(format!(
                    "k_neighbors must lie in [2, {}], got {k}",
                    p - 1
                )));
            }
            Ok((0..p)
                .into_par_iter()
                .map(|c| mahalanobis_from(&h, c, &nearest(&euclid(c), c, k)))
                .collect())
        }
    }
}

/// Indices of the `k` smallest distances, excluding `center`; ties broken by index.
fn nearest(dist: &[f64], center: usize, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dist.len()).filter(|&j| j != center).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

fn mahalanobis_from(h: &Array2<f64>, center: usize, neigh: &[usize]) -> Vec<f64> {
    let p = h.nrows();
    let k = neigh.len();
    let kf = k as f64;
    let block = DMatrix::from_fn(k, k, |a, b| h[[neigh[a], neigh[b]]]);
    let row_means: Vec<f64> = (0..k).map(|a| block.row(a).sum() / kf).collect();
    let grand = row_means.iter().sum::<f64>() / kf;
    let centered = DMatrix::from_fn(k, k, |a, b| block[(a, b)] - row_means[a] - row_means[b] + grand);
    let eig = SymmetricEigen::new(centered);
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let kept: Vec<usize> = (0..k)
        .filter(|&r| eig.eigenvalues[r] > EIGEN_CUTOFF * lambda_max)
        .collect();

    // column j is e_j[a] = h[n_a, j] - h[n_a, center], centered over a
    let e = Array2::from_shape_fn((k, p), |(a, j)| h[[neigh[a], j]] - h[[neigh[a], center]]);
    let e = &e - &e.mean_axis(Axis(0)).expect("k >= 2");
    let u = Array2::from_shape_fn((kept.len(), k), |(r, a)| {
        eig.eigenvectors[(a, kept[r])] / eig.eigenvalues[kept[r]]
    });
    let proj = u.dot(&e);
    proj.columns()
        .into_iter()
        .map(|c| ((kf - 1.0) * c.dot(&c)).max(0.0).sqrt())
        .collect()
}

/// TwoNN intrinsic dimension: `N / Σ_i ln(r2_i / r1_i)` from each point's
/// first and second nearest-neighbour Euclidean distances.
pub fn twonn(data: &SampleMatrix) -> Result<f64> {
    let p = data.rows();
    if p < 3 {
        return Err(Error::InsufficientRows { required: 3, actual: p });
    }
    let v = data.values();
    let logs: Vec<Result<f64>> = (0..p)
        .into_par_iter()
        .map(|i| {
            let row = v.row(i);
            let (mut r1, mut r2, mut nn) = (f64::INFINITY, f64::INFINITY, usize::MAX);
            for j in (0..p).filter(|&j| j != i) {
                let d2: f64 = row.iter().zip(v.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 < r1 {
                    (r2, r1, nn) = (r1, d2, j);
                } else if d2 < r2 {
                    r2 = d2;
                }
            }
            if r1 == 0.0 {
                return Err(Error::DuplicatePoints {
                    first: i.min(nn),
                    second: i.max(nn),
                });
            }
            Ok(0.5 * (r2 / r1).ln())
        })
        .collect();
    let logs = logs.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(p as f64 / pairwise_sum(&logs))
}
