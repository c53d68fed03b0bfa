//! Exact arithmetic in the field Q(√5), which contains the golden ratio.
//!
//! Used to compare exact counting ratios against powers of φ without any
//! floating-point rounding.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `rational + irrational·√5`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd5 {
    pub rational: BigRational,
    pub irrational: BigRational,
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

impl Surd5 {
    pub fn from_rational(r: BigRational) -> Self {
        Surd5 {
            rational: r,
            irrational: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Surd5::from_rational(BigRational::one())
    }

    /// φ = (1 + √5)/2.
    pub fn phi() -> Self {
        Surd5 {
            rational: half(),
            irrational: half(),
        }
    }

    /// 1/φ = (√5 − 1)/2.
    pub fn inv_phi() -> Self {
        Surd5 {
            rational: -half(),
            irrational: half(),
        }
    }

    /// φ raised to an integer power.
    pub fn phi_pow(e: i64) -> Self {
        let base = if e >= 0 { Surd5::phi() } else { Surd5::inv_phi() };
        let mut acc = Surd5::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc * base.clone();
        }
        acc
    }

    pub fn signum(&self) -> Ordering {
        let (a, b) = (&self.rational, &self.irrational);
        let sa = a.cmp(&BigRational::zero());
        let sb = b.cmp(&BigRational::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (x, y) if x == y => x,
            // Opposite signs: compare a^2 with 5 b^2.
            (sa, _) => {
                let lhs = a * a;
                let rhs = b * b * BigRational::from_integer(BigInt::from(5));
                match lhs.cmp(&rhs) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.rational.to_f64().unwrap_or(f64::NAN)
            + self.irrational.to_f64().unwrap_or(f64::NAN) * 5f64.sqrt()
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Add for Surd5 {
    type Output = Surd5;
    fn add(self, o: Surd5) -> Surd5 {
        Surd5 {
            rational: self.rational + o.rational,
            irrational: self.irrational + o.irrational,
        }
    }
}

impl Sub for Surd5 {
    type Output = Surd5;
    fn sub(self, o: Surd5) -> Surd5 {
        self + (-o)
    }
}

impl Neg for Surd5 {
    type Output = Surd5;
    fn neg(self) -> Surd5 {
        Surd5 {
            rational: -self.rational,
            irrational: -self.irrational,
        }
    }
}

impl Mul for Surd5 {
    type Output = Surd5;
    fn mul(self, o: Surd5) -> Surd5 {
        let five = BigRational::from_integer(BigInt::from(5));
        Surd5 {
            rational: &self.rational * &o.rational + &self.irrational * &o.irrational * five,
            irrational: &self.rational * &o.irrational + &self.irrational * &o.rational,
        }
    }
}

impl PartialOrd for Surd5 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd5 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).signum()
    }
}

impl From<BigRational> for Surd5 {
    fn from(r: BigRational) -> Self {
        Surd5::from_rational(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn phi_identities() {
        let phi = Surd5::phi();
        // φ² = φ + 1
        assert_eq!(phi.clone() * phi.clone(), phi.clone() + Surd5::one());
        assert_eq!(phi.clone() * Surd5::inv_phi(), Surd5::one());
        assert_eq!(Surd5::phi_pow(-3) * Surd5::phi_pow(3), Surd5::one());
        assert!((Surd5::phi_pow(5).to_f64() - 1.618033988749895f64.powi(5)).abs() < 1e-12);
    }

    #[test]
    fn ordering_against_rationals() {
        let phi = Surd5::phi();
        assert!(phi > Surd5::from(q(1618, 1000)));
        assert!(phi < Surd5::from(q(1619, 1000)));
        assert!(Surd5::inv_phi() < Surd5::from(q(618034, 1_000_000)));
        assert!(Surd5::inv_phi() > Surd5::from(q(618033, 1_000_000)));
        assert_eq!((phi.clone() - phi).signum(), Ordering::Equal);
    }
}
