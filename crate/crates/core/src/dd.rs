//! Double-double arithmetic: an unevaluated sum `hi + lo` carrying about 32
//! significant digits, built on error-free `two_sum` and fused `two_prod`.

use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn new(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self { hi: p, lo: a.mul_add(b, -p) }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Self { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }

    /// Quotient rounded to f64.
    pub fn div(self, other: Dd) -> f64 {
        let q = self.hi / other.hi;
        let r = self - other.mul_f64(q);
        q + r.hi / other.hi
    }

    /// Quotient to double-double precision.
    pub fn quotient(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self - other.mul_f64(q1);
        let q2 = r.hi / other.hi;
        let r = r - other.mul_f64(q2);
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }
}

impl Add for Dd {
    type Output = Dd;

    #[inline]
    fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let (t, f) = two_sum(self.lo, other.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;

    #[inline]
    fn sub(self, other: Dd) -> Dd {
        self + (-other)
    }
}

impl Mul for Dd {
    type Output = Dd;

    #[inline]
    fn mul(self, other: Dd) -> Dd {
        let p = Dd::prod(self.hi, other.hi);
        let lo = p.lo + (self.hi * other.lo + self.lo * other.hi);
        let (hi, lo) = quick_two_sum(p.hi, lo);
        Dd { hi, lo }
    }
}

impl Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, Add::add)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_cancelled_digits() {
        let total: Dd = [1e16, 1.0, -1e16, 1.0].into_iter().map(Dd::new).sum();
        assert_eq!(total.to_f64(), 2.0);
    }

    #[test]
    fn quotient_keeps_low_part() {
        let third = Dd::ONE.quotient(Dd::new(3.0));
        // 3 * (1/3) recovers 1 far below f64 resolution
        let back = third.mul_f64(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-30);
        assert_eq!(third.to_f64(), 1.0 / 3.0);
    }

    #[test]
    fn product_low_part_is_exact() {
        // (1 + 2^-40)^2 - 1 = 2^-39 + 2^-80
        let x = 1.0 + 2f64.powi(-40);
        assert_eq!(Dd::prod(x, x).add_f64(-1.0).to_f64(), 2f64.powi(-39) + 2f64.powi(-80));
        let y = Dd::new(x) * Dd::new(x) - Dd::ONE;
        assert_eq!(y.to_f64(), 2f64.powi(-39) + 2f64.powi(-80));
    }

    #[test]
    fn division_rounds_correctly() {
        assert_eq!(Dd::ONE.div(Dd::new(3.0)), 1.0 / 3.0);
        assert_eq!(Dd::new(10.0).div(Dd::new(4.0)), 2.5);
    }
}
