//! Exact dyadic rationals for direction angles, plus the small rational type
//! used for lacunarity constants.
//!
//! Generated angles are sums of scaled powers of two, so storing them as
//! `num / 2^k` with a big-integer numerator makes every separation and ratio
//! test exact; the float mirror is only used for trigonometry.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Exact dyadic rational `num / 2^log2_den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    num: BigInt,
    log2_den: u32,
}

impl Dyadic {
    pub fn new(num: impl Into<BigInt>, log2_den: u32) -> Self {
        Dyadic { num: num.into(), log2_den }.normalized()
    }

    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), log2_den: 0 }
    }

    /// 2^-k.
    pub fn pow2(k: i32) -> Self {
        if k >= 0 {
            Dyadic { num: BigInt::from(1u8) << (k as u32), log2_den: 0 }
        } else {
            Dyadic { num: BigInt::from(1u8), log2_den: (-k) as u32 }
        }
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.log2_den = 0;
            return self;
        }
        while self.log2_den > 0 && (&self.num % 2u8).is_zero() {
            self.num /= 2u8;
            self.log2_den -= 1;
        }
        self
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        // num / 2^k via explicit exponent scaling to survive huge numerators.
        let num = self.num.to_f64().unwrap_or(f64::NAN);
        num * 2f64.powi(-(self.log2_den as i32))
    }

    /// Numerators brought to the common denominator 2^max(k1, k2).
    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, u32) {
        let k = self.log2_den.max(other.log2_den);
        let a = &self.num << (k - self.log2_den);
        let b = &other.num << (k - other.log2_den);
        (a, b, k)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let (a, b, k) = self.aligned(other);
        Dyadic { num: a + b, log2_den: k }.normalized()
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        let (a, b, k) = self.aligned(other);
        Dyadic { num: a - b, log2_den: k }.normalized()
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { num: self.num.abs(), log2_den: self.log2_den }
    }

    /// self * (p/q) compared against other: sign of (self*p - other*q).
    pub fn cmp_scaled(&self, p: u64, other: &Dyadic, q: u64) -> Ordering {
        let (a, b, _) = self.aligned(other);
        (a * BigInt::from(p)).cmp(&(b * BigInt::from(q)))
    }

    /// Halve: num / 2^(k+1).
    pub fn half(&self) -> Dyadic {
        Dyadic { num: self.num.clone(), log2_den: self.log2_den + 1 }.normalized()
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.log2_den)
    }
}

/// Rational in lowest terms with small positive terms; carries lacunarity
/// constants like 1/2 or 2/3 exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioQ {
    pub num: u64,
    pub den: u64,
}

impl RatioQ {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den);
        RatioQ { num: num / g.max(1), den: den / g.max(1) }
    }

    /// Strictly inside (0, 1)?
    pub fn is_proper(&self) -> bool {
        self.num > 0 && self.num < self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for RatioQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_exact() {
        let a = Dyadic::pow2(-3); // 1/8
        let b = Dyadic::pow2(-5);
        let d = a.sub(&b);
        assert_eq!(d, Dyadic::new(3, 5)); // 3/32
        assert_eq!(d.to_f64(), 3.0 / 32.0);
    }

    #[test]
    fn scaled_comparison() {
        // 1/16 >= (1/2) * 1/8 exactly.
        let gap = Dyadic::pow2(-4);
        let dist = Dyadic::pow2(-3);
        assert_ne!(gap.cmp_scaled(2, &dist, 1), Ordering::Less);
        // and 1/16 < 1 * 1/8
        assert_eq!(gap.cmp_scaled(1, &dist, 1), Ordering::Less);
    }

    #[test]
    fn ratio_reduces() {
        assert_eq!(RatioQ::new(4, 8), RatioQ::new(1, 2));
        assert!(RatioQ::new(2, 3).is_proper());
        assert!(!RatioQ::new(3, 3).is_proper());
    }
}
