//! Unequal-index contractions through the sample Gram matrix.
//!
//! Every term estimate is an average of
//!
//! ```text
//! v[i,j,k,l](α,β) = X[i,α] Y[j,α] X[k,β] Y[l,β]
//! ```
//!
//! over a pattern of sample indices (which of `i,j,k,l` coincide) and over
//! feature pairs `(α,β)`, with some index groups required to be distinct.
//! (`X = Y = Φ` for a single recording; the two trials for a pair.)
//!
//! Feature pairs. `Σ_{α,β} v = G[i,j] G[k,l]` with `G = X Yᵀ`, and the `α = β`
//! part is `Σ_α X[i,α] Y[j,α] X[k,α] Y[l,α]`, so the unequal-pair sum is the
//! difference of the two.
//!
//! Sample indices. A sum over pairwise distinct labels is rewritten as a
//! signed sum of plain sums by Möbius inversion on the lattice of set
//! partitions:
//!
//! ```text
//! Σ_{distinct} f = Σ_π μ(π) Σ_{labels constant on the blocks of π} f,
//! μ(π) = Π_blocks (-1)^(|b|-1) (|b|-1)!
//! ```
//!
//! A pattern with at most four labels has at most 15 partitions. Each
//! collapsed pattern is a plain sum of `G[a,b] G[c,d]`, which factors into
//! one of ten scalars built from `G`, its row sums `r`, column sums `c` and
//! diagonal `g` (`tr G`, `ΣG`, `ΣG²`, `tr G²`, `Σg²`, `Σgr`, `Σgc`, `Σr²`,
//! `Σc²`, `Σrc`), or a plain sum of the `α = β` part, which factors over
//! label groups into products of per-feature aggregates `Σ_i X^a Y^b`
//! (`a, b ≤ 2`). Total cost is one `P x P` Gram product plus `O(PQ)` work;
//! no four-index array exists at any point.
//!
//! Row weights multiply every slot by its sample's weight, so they are folded
//! into `X` and `Y` up front; the matching normalization is the same Möbius
//! sum applied to products of weight power sums.
//!
//! Precision. The Möbius sum subtracts plain sums that can be orders of
//! magnitude larger than the result. Every reduction of `G` and every
//! combination step therefore runs in double-double, so the signed sum
//! reproduces the distinct-index sum of the computed `G` almost exactly and
//! the only error left is the rounding of the Gram product itself. When the
//! product is small (at most `EXACT_GRAM_MAX_PRODUCTS` multiply-adds) it is
//! accumulated in double-double too, and its low-order parts are kept beside
//! `G`, which removes that last rounding step.

use ndarray::{Array2, ArrayView2, CowArray, Ix2};

use crate::dd::Dd;
use crate::summation::pairwise_sum_by;

/// Largest `P·P·Q` for which the Gram product is accumulated in double-double.
const EXACT_GRAM_MAX_PRODUCTS: usize = 1 << 22;

/// Sample-index labels for the four slots of `v[i,j,k,l]`.
pub type Pattern = [u8; 4];

/// Row patterns of t1..t5: `v_iijj`, `v_iijl`, `v_ijij`, `v_ijjl`, `v_ijlr`.
pub const TERM_PATTERNS: [Pattern; 5] = [
    [0, 0, 1, 1],
    [0, 0, 1, 2],
    [0, 1, 0, 1],
    [0, 1, 1, 2],
    [0, 1, 2, 3],
];

/// Which axis of the supplied matrix carries the feature indices `α, β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureAxis {
    /// Columns are features; the Gram matrix is over rows.
    Column,
    /// Rows are features; everything runs on the transpose.
    Row,
}

// (power of X, power of Y) for the per-feature aggregates.
const AGG_POWERS: [(usize, usize); 8] = [
    (1, 0),
    (0, 1),
    (1, 1),
    (2, 0),
    (0, 2),
    (2, 1),
    (1, 2),
    (2, 2),
];

fn agg_index(a: usize, b: usize) -> usize {
    AGG_POWERS
        .iter()
        .position(|&p| p == (a, b))
        .expect("aggregate powers are at most 2")
}

#[derive(Debug, Clone, Copy, Default)]
struct GramScalars {
    trace: Dd,
    total: Dd,
    frob: Dd,
    cross: Dd,
    diag_sq: Dd,
    diag_row: Dd,
    diag_col: Dd,
    row_sq: Dd,
    col_sq: Dd,
    row_col: Dd,
}

/// Precomputed pairwise structure for one feature-axis orientation.
///
/// Built once per matrix (or trial pair), then queried for any of the
/// estimator variants that share its orientation.
#[derive(Debug, Clone)]
pub struct ContractionContext<'a> {
    x: CowArray<'a, f64, Ix2>,
    y: Option<CowArray<'a, f64, Ix2>>,
    gram: Array2<f64>,
    // low-order parts of `gram` when it was accumulated in double-double
    gram_lo: Option<Array2<f64>>,
    scalars: GramScalars,
    feature_aggs: Vec<Vec<Dd>>,
    // Σ_i s_i^k for k = 0..=4 (k = 0 is the sample count).
    sample_power_sums: [Dd; 5],
    feature_pairs_all: Dd,
    feature_pairs_unequal: Dd,
}

impl<'a> ContractionContext<'a> {
    /// `x`, `y`: samples x features. `y = None` means `y = x`.
    /// `sample_weights` scale each slot by its sample's weight;
    /// `feature_weights` scale each feature index (which occupies two slots).
    pub(crate) fn build(
        x: ArrayView2<'a, f64>,
        y: Option<ArrayView2<'a, f64>>,
        sample_weights: Option<&[f64]>,
        feature_weights: Option<&[f64]>,
    ) -> Self {
        let weigh = |view: ArrayView2<'a, f64>| -> CowArray<'a, f64, Ix2> {
            if sample_weights.is_none() && feature_weights.is_none() {
                return CowArray::from(view);
            }
            let mut owned = view.as_standard_layout().into_owned();
            if let Some(s) = sample_weights {
                for (mut row, &w) in owned.rows_mut().into_iter().zip(s) {
                    row *= w;
                }
            }
            if let Some(f) = feature_weights {
                for mut row in owned.rows_mut() {
                    for (v, &w) in row.iter_mut().zip(f) {
                        *v *= w;
                    }
                }
            }
            CowArray::from(owned)
        };
        let x = weigh(x);
        let y = y.map(weigh);

        let yv = y.as_ref().unwrap_or(&x);
        let (gram, gram_lo) = gram_product(x.view(), yv.view());
        Self::assemble(x, y, gram, gram_lo, sample_weights, feature_weights)
    }

    /// Unweighted context for `x`, `y` whose product `x yᵀ` (and optionally
    /// its low-order parts) is already known.
    pub(crate) fn with_gram(
        x: CowArray<'a, f64, Ix2>,
        y: Option<CowArray<'a, f64, Ix2>>,
        gram: Array2<f64>,
        gram_lo: Option<Array2<f64>>,
    ) -> Self {
        debug_assert_eq!(gram.dim(), (x.nrows(), x.nrows()));
        Self::assemble(x, y, gram, gram_lo, None, None)
    }

    fn assemble(
        x: CowArray<'a, f64, Ix2>,
        y: Option<CowArray<'a, f64, Ix2>>,
        gram: Array2<f64>,
        gram_lo: Option<Array2<f64>>,
        sample_weights: Option<&[f64]>,
        feature_weights: Option<&[f64]>,
    ) -> Self {
        let (n, m) = x.dim();
        let gram = if gram.is_standard_layout() {
            gram
        } else {
            gram.as_standard_layout().into_owned()
        };
        let yv = y.as_ref().map(|v| v.view()).unwrap_or(x.view());
        let feature_aggs = feature_aggregates(x.view(), yv);
        let scalars = gram_scalars(&gram, gram_lo.as_ref());

        let sample_power_sums = match sample_weights {
            Some(s) => {
                let mut sums = [Dd::new(n as f64); 5];
                for (k, slot) in sums.iter_mut().enumerate().skip(1) {
                    *slot = s.iter().map(|&w| power(w, k)).sum();
                }
                sums
            }
            None => [Dd::new(n as f64); 5],
        };
        let (feature_pairs_all, feature_pairs_unequal) = match feature_weights {
            Some(f) => {
                // each feature index appears in two slots, so its weight enters squared
                let sum: Dd = f.iter().map(|&w| power(w, 2)).sum();
                let sum_sq: Dd = f.iter().map(|&w| power(w, 4)).sum();
                (sum * sum, sum * sum - sum_sq)
            }
            None => {
                let m = m as f64;
                (Dd::new(m * m), Dd::new(m * (m - 1.0)))
            }
        };

        Self {
            x,
            y,
            gram,
            gram_lo,
            scalars,
            feature_aggs,
            sample_power_sums,
            feature_pairs_all,
            feature_pairs_unequal,
        }
    }

    pub fn sample_len(&self) -> usize {
        self.x.nrows()
    }

    pub fn feature_len(&self) -> usize {
        self.x.ncols()
    }

    /// `G = X Yᵀ` over the sample axis (weights folded in).
    pub fn gram(&self) -> &Array2<f64> {
        &self.gram
    }

    fn y_view(&self) -> ArrayView2<'_, f64> {
        self.y.as_ref().unwrap_or(&self.x).view()
    }

    /// `Σ_{α≠β} v[i,j,k,l](α,β)` for one concrete index tuple.
    pub fn r_entry(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let (x, y) = (self.x.view(), self.y_view());
        let same = pairwise_sum_by(self.feature_len(), |a| x[[i, a]] * y[[j, a]] * x[[k, a]] * y[[l, a]]);
        (self.gram_entry(i, j) * self.gram_entry(k, l)).add_f64(-same).to_f64()
    }

    fn gram_entry(&self, a: usize, b: usize) -> Dd {
        let lo = self.gram_lo.as_ref().map_or(0.0, |l| l[[a, b]]);
        Dd { hi: self.gram[[a, b]], lo }
    }

    /// `Σ_{pattern} Σ_{α≠β} v`, over all index assignments or (when
    /// `distinct_samples`) only those with distinct labels taking distinct values.
    pub fn unequal_feature_sum(&self, pattern: Pattern, distinct_samples: bool) -> f64 {
        self.sample_sum(pattern, distinct_samples, |q| self.gram_sum(q) - self.same_feature_sum(q))
            .to_f64()
    }

    /// The five term estimates.
    pub fn terms(&self, distinct_samples: bool, distinct_features: bool) -> [f64; 5] {
        self.terms_dd(distinct_samples, distinct_features).map(Dd::to_f64)
    }

    /// [`Self::terms`] before rounding, so that `A` and `B` can be formed
    /// without the cancellation between rounded terms.
    pub(crate) fn terms_dd(&self, distinct_samples: bool, distinct_features: bool) -> [Dd; 5] {
        let feature_norm = if distinct_features {
            self.feature_pairs_unequal
        } else {
            self.feature_pairs_all
        };
        let mut out = [Dd::ZERO; 5];
        for (t, &pattern) in out.iter_mut().zip(TERM_PATTERNS.iter()) {
            let num = self.sample_sum(pattern, distinct_samples, |q| {
                let all = self.gram_sum(q);
                if distinct_features {
                    all - self.same_feature_sum(q)
                } else {
                    all
                }
            });
            let count = self.sample_sum(pattern, distinct_samples, |q| self.weight_sum(q));
            *t = num.quotient(count * feature_norm);
        }
        out
    }

    fn sample_sum<F: Fn(Pattern) -> Dd>(&self, pattern: Pattern, distinct: bool, f: F) -> Dd {
        if !distinct {
            return f(pattern);
        }
        let labels = label_count(pattern);
        set_partitions(labels)
            .into_iter()
            .map(|(blocks, mu)| f(pattern.map(|l| blocks[l as usize])).mul_f64(mu))
            .sum()
    }

    /// Plain sum of `G[a,b] G[c,d]` over all label values.
    fn gram_sum(&self, p: Pattern) -> Dd {
        let s = &self.scalars;
        let [a, b, c, d] = p;
        match (a == b, c == d) {
            (true, true) if a == c => s.diag_sq,
            (true, true) => s.trace * s.trace,
            (true, false) if a == c => s.diag_row,
            (true, false) if a == d => s.diag_col,
            (true, false) => s.trace * s.total,
            (false, true) if c == a => s.diag_row,
            (false, true) if c == b => s.diag_col,
            (false, true) => s.total * s.trace,
            (false, false) => match (a == c, b == d, a == d, b == c) {
                (true, true, _, _) => s.frob,
                (_, _, true, true) => s.cross,
                (true, false, _, _) => s.row_sq,
                (false, true, _, _) => s.col_sq,
                (false, false, true, false) | (false, false, false, true) => s.row_col,
                _ => s.total * s.total,
            },
        }
    }

    /// Plain sum of the `α = β` part, `Σ_α Π_groups Σ_i X^a Y^b`.
    fn same_feature_sum(&self, p: Pattern) -> Dd {
        let aggs: Vec<&[Dd]> = label_groups(p)
            .into_iter()
            .map(|(a, b)| self.feature_aggs[agg_index(a, b)].as_slice())
            .collect();
        (0..self.feature_len())
            .map(|alpha| aggs.iter().fold(Dd::ONE, |acc, v| acc * v[alpha]))
            .sum()
    }

    /// Plain sum of the slot-weight product over all label values.
    fn weight_sum(&self, p: Pattern) -> Dd {
        label_groups(p)
            .into_iter()
            .fold(Dd::ONE, |acc, (a, b)| acc * self.sample_power_sums[a + b])
    }
}

fn power(w: f64, k: usize) -> Dd {
    (0..k).fold(Dd::ONE, |acc, _| acc.mul_f64(w))
}

fn label_count(p: Pattern) -> usize {
    p.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// For each label, (#X slots, #Y slots). Slots 0 and 2 read X, 1 and 3 read Y.
fn label_groups(p: Pattern) -> Vec<(usize, usize)> {
    let mut groups = vec![(0, 0); label_count(p)];
    for (slot, &l) in p.iter().enumerate() {
        let g = &mut groups[l as usize];
        if slot % 2 == 0 {
            g.0 += 1;
        } else {
            g.1 += 1;
        }
    }
    groups.retain(|&(a, b)| a + b > 0);
    groups
}

/// All set partitions of `{0..k}` as block assignments (restricted growth
/// strings) with their Möbius coefficient.
fn set_partitions(k: usize) -> Vec<([u8; 4], f64)> {
    fn rec(pos: usize, k: usize, current: &mut [u8; 4], max: u8, out: &mut Vec<[u8; 4]>) {
        if pos == k {
            out.push(*current);
            return;
        }
        for b in 0..=max + 1 {
            if pos == 0 && b > 0 {
                break;
            }
            current[pos] = b;
            rec(pos + 1, k, current, max.max(b), out);
        }
    }
    let mut strings = Vec::new();
    if k == 0 {
        return vec![([0; 4], 1.0)];
    }
    let mut current = [0u8; 4];
    // position 0 always gets block 0
    rec(1, k, &mut current, 0, &mut strings);
    strings
        .into_iter()
        .map(|blocks| {
            let mut sizes = [0usize; 4];
            for &b in &blocks[..k] {
                sizes[b as usize] += 1;
            }
            let mu = sizes
                .iter()
                .filter(|&&s| s > 0)
                .map(|&s| {
                    let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
                    sign * (1..s).product::<usize>() as f64
                })
                .product();
            (blocks, mu)
        })
        .collect()
}

/// `X Yᵀ` accumulated in double-double, split into high and low parts.
/// `x yᵀ`, with its low-order parts when the product is small enough to
/// accumulate in double-double.
pub(crate) fn gram_product(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> (Array2<f64>, Option<Array2<f64>>) {
    let (n, m) = x.dim();
    if n * n * m <= EXACT_GRAM_MAX_PRODUCTS {
        let (hi, lo) = exact_gram(x, y);
        (hi, Some(lo))
    } else {
        (x.dot(&y.t()), None)
    }
}

fn exact_gram(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> (Array2<f64>, Array2<f64>) {
    let n = x.nrows();
    let mut hi = Array2::zeros((n, n));
    let mut lo = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let s: Dd = x.row(i).iter().zip(y.row(j)).map(|(&a, &b)| Dd::prod(a, b)).sum();
            hi[[i, j]] = s.hi;
            lo[[i, j]] = s.lo;
        }
    }
    (hi, lo)
}

fn gram_scalars(g: &Array2<f64>, lo: Option<&Array2<f64>>) -> GramScalars {
    let n = g.nrows();
    let rows: Vec<&[f64]> = g
        .rows()
        .into_iter()
        .map(|r| r.to_slice().expect("gram is row-major"))
        .collect();
    let entry = |a: usize, b: usize| Dd {
        hi: rows[a][b],
        lo: lo.map_or(0.0, |l| l[[a, b]]),
    };
    let diag: Vec<Dd> = (0..n).map(|a| entry(a, a)).collect();
    let row_sums: Vec<Dd> = (0..n).map(|a| (0..n).map(|b| entry(a, b)).sum()).collect();
    let mut col_sums = vec![Dd::ZERO; n];
    let mut frob = Dd::ZERO;
    let mut cross = Dd::ZERO;
    for a in 0..n {
        for (b, col) in col_sums.iter_mut().enumerate() {
            let (ab, ba) = (entry(a, b), entry(b, a));
            *col = *col + ab;
            frob = frob + ab * ab;
            cross = cross + ab * ba;
        }
    }
    GramScalars {
        trace: diag.iter().copied().sum(),
        total: row_sums.iter().copied().sum(),
        frob,
        cross,
        diag_sq: diag.iter().map(|&v| v * v).sum(),
        diag_row: (0..n).map(|a| row_sums[a] * diag[a]).sum(),
        diag_col: (0..n).map(|a| col_sums[a] * diag[a]).sum(),
        row_sq: row_sums.iter().map(|&r| r * r).sum(),
        col_sq: col_sums.iter().map(|&c| c * c).sum(),
        row_col: (0..n).map(|a| row_sums[a] * col_sums[a]).sum(),
    }
}

fn feature_aggregates(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Vec<Vec<Dd>> {
    let (n, m) = x.dim();
    let mut aggs = vec![vec![Dd::ZERO; m]; AGG_POWERS.len()];
    for i in 0..n {
        let (xr, yr) = (x.row(i), y.row(i));
        for a in 0..m {
            let (xv, yv) = (xr[a], yr[a]);
            let (x2, y2, xy) = (Dd::prod(xv, xv), Dd::prod(yv, yv), Dd::prod(xv, yv));
            aggs[0][a] = aggs[0][a].add_f64(xv);
            aggs[1][a] = aggs[1][a].add_f64(yv);
            aggs[2][a] = aggs[2][a] + xy;
            aggs[3][a] = aggs[3][a] + x2;
            aggs[4][a] = aggs[4][a] + y2;
            aggs[5][a] = aggs[5][a] + x2.mul_f64(yv);
            aggs[6][a] = aggs[6][a] + y2.mul_f64(xv);
            aggs[7][a] = aggs[7][a] + x2 * y2;
        }
    }
    aggs
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn bell_numbers_and_mobius_sums() {
        let counts: Vec<usize> = (1..=4).map(|k| set_partitions(k).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 15]);
        // Σ_π μ(π) n^{#blocks} is the falling factorial n(n-1)...(n-k+1).
        for k in 1..=4 {
            let n = 7.0;
            let falling: f64 = (0..k).map(|j| n - j as f64).product();
            let via_mobius: f64 = set_partitions(k)
                .iter()
                .map(|(blocks, mu)| {
                    let nb = blocks[..k].iter().copied().max().unwrap() as i32 + 1;
                    mu * n.powi(nb)
                })
                .sum();
            assert_eq!(via_mobius, falling);
        }
    }

    #[test]
    fn ones_row_gives_two_ordered_pairs() {
        let x = array![[1.0, 1.0]];
        let ctx = ContractionContext::build(x.view(), None, None, None);
        assert_eq!(ctx.unequal_feature_sum([0, 0, 0, 0], false), 2.0);
        assert_eq!(ctx.r_entry(0, 0, 0, 0), 2.0);
    }

    #[test]
    fn identity_has_no_cross_column_mass() {
        let x = array![[1.0, 0.0], [0.0, 1.0]];
        let ctx = ContractionContext::build(x.view(), None, None, None);
        assert_eq!(ctx.r_entry(0, 0, 0, 0), 0.0);
        assert_eq!(ctx.r_entry(1, 1, 1, 1), 0.0);
    }

    #[test]
    fn label_groups_count_x_and_y_slots() {
        assert_eq!(label_groups([0, 0, 1, 1]), vec![(1, 1), (1, 1)]);
        assert_eq!(label_groups([0, 1, 0, 1]), vec![(2, 0), (0, 2)]);
        assert_eq!(label_groups([0, 0, 0, 0]), vec![(2, 2)]);
    }
}
