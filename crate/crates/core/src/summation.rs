//! Pairwise (tree) reductions.
//!
//! The bias-corrected terms are differences of large, nearly equal sums, so
//! every reduction over an axis of length P, Q or P² goes through here. The
//! recursion order depends only on the length, which keeps results
//! reproducible across runs.

const LEAF: usize = 32;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(0) + ... + f(n - 1)`.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: F) -> f64 {
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= LEAF {
            let mut acc = 0.0;
            for k in lo..hi {
                acc += f(k);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, &f)
}

/// Pairwise reduction of `rows` vectors of length `width` into their
/// element-wise sum. `fill(i, acc)` must add row `i` into `acc`.
pub fn pairwise_vector_sum<F>(rows: usize, width: usize, fill: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]),
{
    fn rec<F: Fn(usize, &mut [f64])>(lo: usize, hi: usize, width: usize, fill: &F) -> Vec<f64> {
        if hi - lo <= LEAF {
            let mut acc = vec![0.0; width];
            for i in lo..hi {
                fill(i, &mut acc);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        let mut left = rec(lo, mid, width, fill);
        let right = rec(mid, hi, width, fill);
        for (l, r) in left.iter_mut().zip(&right) {
            *l += r;
        }
        left
    }
    rec(0, rows, width, &fill)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_sum_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        assert_eq!(pairwise_sum_by(1000, |k| xs[k]), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn beats_sequential_accumulation() {
        // 1 followed by many tiny values: sequential summation drops them all.
        let n = 1 << 20;
        let tiny = 1e-17;
        let total = pairwise_sum_by(n, |k| if k == 0 { 1.0 } else { tiny });
        let exact = 1.0 + (n as f64 - 1.0) * tiny;
        assert!((total - exact).abs() < 1e-15);
    }

    #[test]
    fn vector_sum_is_columnwise() {
        let out = pairwise_vector_sum(100, 3, |i, acc| {
            acc[0] += 1.0;
            acc[1] += i as f64;
            acc[2] += (i * i) as f64;
        });
        assert_eq!(out, vec![100.0, 4950.0, 328_350.0]);
    }
}
