//! Exact counting for dyadic tilings.
//!
//! All counts are big integers and all ratios are reduced big rationals.
//! Comparisons against powers of the golden ratio are done exactly in Q(√5)
//! (see [`crate::surd`]); floating point only appears in the growth-constant
//! estimate and in convenience conversions.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::surd::Surd5;
use crate::Error;

pub type BigCount = BigUint;
pub type ExactRatio = BigRational;

/// Golden ratio φ = (1 + √5)/2.
pub const PHI: f64 = 1.618_033_988_749_895;
/// Limit of the half-bisector fraction, (√5 − 1)/2 = 1/φ.
pub const INV_PHI: f64 = 0.618_033_988_749_895;
/// Growth constant ω in `A_k ~ φ^-1 ω^(2^k)`. Only known numerically; used
/// as a convergence target, never as ground truth.
pub const OMEGA: f64 = 1.844_547_57;

/// Default largest `k` for which recurrence tables are built.
pub const DEFAULT_K_CAP: u32 = 16;

/// Table of `A_0 ..= A_k_max`.
#[derive(Clone, Debug)]
pub struct CountTable {
    counts: Vec<BigCount>,
}

impl CountTable {
    pub fn up_to(k_max: u32) -> Result<Self, Error> {
        Self::up_to_with_cap(k_max, DEFAULT_K_CAP)
    }

    pub fn up_to_with_cap(k_max: u32, cap: u32) -> Result<Self, Error> {
        if k_max > cap {
            return Err(Error::SizeGuard {
                what: "recurrence table",
                k: k_max,
                max: cap,
            });
        }
        let mut counts: Vec<BigCount> = Vec::with_capacity(k_max as usize + 1);
        for k in 0..=k_max as usize {
            let a = match k {
                0 => BigCount::one(),
                1 => BigCount::from(2u32),
                _ => {
                    let prev = &counts[k - 1];
                    let prev2 = &counts[k - 2];
                    let sq = prev2 * prev2;
                    BigCount::from(2u32) * prev * prev - &sq * &sq
                }
            };
            counts.push(a);
        }
        Ok(CountTable { counts })
    }

    pub fn k_max(&self) -> u32 {
        self.counts.len() as u32 - 1
    }

    /// `A_k`.
    pub fn count(&self, k: u32) -> &BigCount {
        &self.counts[k as usize]
    }

    fn ratio(num: &BigCount, den: &BigCount) -> ExactRatio {
        ExactRatio::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
    }

    /// `f_k = A_{k-2}^2 / A_{k-1}`, the fraction of `Ω_{k-1}` with a
    /// horizontal (equivalently, vertical) bisector.
    pub fn half_bisector_fraction(&self, k: u32) -> ExactRatio {
        assert!(k >= 2, "f_k is defined for k >= 2");
        let a2 = self.count(k - 2);
        Self::ratio(&(a2 * a2), self.count(k - 1))
    }

    pub fn subset_counts(&self, k: u32) -> SubsetCounts {
        assert!(k >= 2, "subset counts are defined for k >= 2");
        let a1 = self.count(k - 1);
        let a2 = self.count(k - 2);
        let sq = a1 * a1;
        let a2sq = a2 * a2;
        SubsetCounts {
            vertical: sq.clone(),
            horizontal: sq,
            both: &a2sq * &a2sq,
        }
    }

    /// `|Ω_k| / |Ω_k^+| = A_k / A_{k-2}^4`.
    pub fn plus_ratio(&self, k: u32) -> ExactRatio {
        let s = self.subset_counts(k);
        Self::ratio(self.count(k), &s.both)
    }

    /// `∏_{i=0}^{k-2} A_i^2`.
    pub fn upsilon_count(&self, k: u32) -> BigCount {
        assert!(k >= 2);
        (0..=k - 2).fold(BigCount::one(), |acc, i| {
            let a = self.count(i);
            acc * a * a
        })
    }

    /// `2^{k-1} ∏_{i=0}^{k-2} A_i^2`, tilings one flip away from a vertical
    /// bisector.
    pub fn boundary_count(&self, k: u32) -> BigCount {
        self.upsilon_count(k) << (k - 1)
    }

    /// Variance of the vertical-bisector indicator under the uniform law,
    /// `(1/4)(1 - (|Ω_k^+|/|Ω_k|)^2)`.
    pub fn variance_vertical_indicator(&self, k: u32) -> ExactRatio {
        let inv = self.plus_ratio(k).recip();
        let quarter = ExactRatio::new(BigInt::one(), BigInt::from(4));
        quarter * (ExactRatio::one() - &inv * &inv)
    }

    /// Edge-chain Dirichlet form of the vertical-bisector indicator,
    /// `|∂Ω_k^||/(2n |Ω_k|)`.
    pub fn dirichlet_vertical_indicator(&self, k: u32) -> ExactRatio {
        let den = self.count(k) << (k + 1);
        Self::ratio(&self.boundary_count(k), &den)
    }

    /// `(φ A_k)^{2^{-k}}`.
    pub fn growth_constant_estimate(&self, k: u32) -> f64 {
        assert!(k >= 1);
        ((PHI.ln() + ln_big(self.count(k))) / 2f64.powi(k as i32)).exp()
    }
}

/// `ln(a)` for a big integer, accurate to double precision.
pub fn ln_big(a: &BigUint) -> f64 {
    let bits = a.bits();
    if bits <= 1000 {
        return a.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (a >> shift).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Sizes of `Ω_k^|`, `Ω_k^-`, `Ω_k^+`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetCounts {
    #[serde(serialize_with = "crate::serde_util::big_decimal")]
    pub vertical: BigCount,
    #[serde(serialize_with = "crate::serde_util::big_decimal")]
    pub horizontal: BigCount,
    #[serde(serialize_with = "crate::serde_util::big_decimal")]
    pub both: BigCount,
}

fn table_for(k: u32) -> CountTable {
    CountTable::up_to_with_cap(k, u32::MAX).expect("no cap")
}

/// `A_k = |Ω_k|`.
pub fn count_tilings(k: u32) -> BigCount {
    table_for(k).count(k).clone()
}

pub fn half_bisector_fraction(k: u32) -> ExactRatio {
    table_for(k).half_bisector_fraction(k)
}

/// `f_k` via `f_2 = 1/2`, `f_k = 1/(2 - f_{k-1}^2)`.
pub fn half_bisector_fraction_by_recurrence(k: u32) -> ExactRatio {
    assert!(k >= 2);
    let two = ExactRatio::from_integer(BigInt::from(2));
    let mut f = ExactRatio::new(BigInt::one(), BigInt::from(2));
    for _ in 3..=k {
        f = (&two - &f * &f).recip();
    }
    f
}

pub fn subset_counts(k: u32) -> SubsetCounts {
    table_for(k).subset_counts(k)
}

pub fn plus_ratio(k: u32) -> ExactRatio {
    table_for(k).plus_ratio(k)
}

/// `2/f_k^2 - 1`.
pub fn plus_ratio_from_fraction(k: u32) -> ExactRatio {
    let f = half_bisector_fraction(k);
    ExactRatio::from_integer(BigInt::from(2)) / (&f * &f) - ExactRatio::one()
}

pub fn upsilon_count(k: u32) -> BigCount {
    table_for(k).upsilon_count(k)
}

pub fn boundary_count(k: u32) -> BigCount {
    table_for(k).boundary_count(k)
}

pub fn variance_vertical_indicator(k: u32) -> ExactRatio {
    table_for(k).variance_vertical_indicator(k)
}

pub fn dirichlet_vertical_indicator(k: u32) -> ExactRatio {
    table_for(k).dirichlet_vertical_indicator(k)
}

pub fn growth_constant_estimate(k: u32) -> f64 {
    table_for(k).growth_constant_estimate(k)
}

/// Exact test of `upsilon_count(k) / A_k <= φ^{-2k+2}`.
pub fn upsilon_ratio_within_phi_bound(k: u32) -> bool {
    let t = table_for(k);
    let ratio = CountTable::ratio(&t.upsilon_count(k), t.count(k));
    Surd5::from(ratio) <= Surd5::phi_pow(-2 * k as i64 + 2)
}

/// Exact test of `f_k < 1/φ`.
pub fn fraction_below_limit(k: u32) -> bool {
    Surd5::from(half_bisector_fraction(k)) < Surd5::inv_phi()
}

/// Exact test of `|Ω_k|/|Ω_k^+| >= 2φ + 1`.
pub fn plus_ratio_above_limit(k: u32) -> bool {
    let limit = Surd5::phi() + Surd5::phi() + Surd5::one();
    Surd5::from(plus_ratio(k)) >= limit
}

/// Exact test of `E(f) <= (1/4) φ^{-2k+2}` for the vertical-bisector
/// indicator.
pub fn dirichlet_within_phi_bound(k: u32) -> bool {
    let quarter = Surd5::from(ExactRatio::new(BigInt::one(), BigInt::from(4)));
    Surd5::from(dirichlet_vertical_indicator(k)) <= quarter * Surd5::phi_pow(-2 * k as i64 + 2)
}

pub fn ratio_to_f64(r: &ExactRatio) -> f64 {
    // Scale down huge numerators/denominators together before converting.
    let (n, d) = (r.numer(), r.denom());
    let nb = n.bits();
    let db = d.bits();
    let excess = nb.max(db).saturating_sub(900);
    if excess == 0 {
        return n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN);
    }
    let ns: BigInt = n >> excess;
    let ds: BigInt = d >> excess;
    if ds.is_zero() {
        return f64::INFINITY;
    }
    ns.to_f64().unwrap_or(f64::NAN) / ds.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactRatio {
        ExactRatio::new(n.into(), d.into())
    }

    fn big(s: &str) -> BigCount {
        s.parse().unwrap()
    }

    #[test]
    fn recurrence_values() {
        let expected = ["1", "2", "7", "82", "11047", "198860242"];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(count_tilings(k as u32), big(e), "k = {k}");
        }
    }

    #[test]
    fn fraction_values_and_recurrence() {
        assert_eq!(half_bisector_fraction(2), q(1, 2));
        assert_eq!(half_bisector_fraction(3), q(4, 7));
        assert_eq!(half_bisector_fraction(4), q(49, 82));
        assert_eq!(half_bisector_fraction(5), q(6724, 11047));
        for k in 2..=12 {
            assert_eq!(
                half_bisector_fraction(k),
                half_bisector_fraction_by_recurrence(k)
            );
            assert!(fraction_below_limit(k));
            if k > 2 {
                assert!(half_bisector_fraction(k) > half_bisector_fraction(k - 1));
            }
        }
    }

    #[test]
    fn subset_values() {
        let s = subset_counts(2);
        assert_eq!(
            (s.vertical, s.horizontal, s.both),
            (big("4"), big("4"), big("1"))
        );
        let s = subset_counts(3);
        assert_eq!(
            (s.vertical, s.horizontal, s.both),
            (big("49"), big("49"), big("16"))
        );
        for k in 2..=12 {
            let s = subset_counts(k);
            assert_eq!(&s.vertical + &s.horizontal - &s.both, count_tilings(k));
        }
    }

    #[test]
    fn plus_ratio_values() {
        assert_eq!(plus_ratio(2), q(7, 1));
        assert_eq!(plus_ratio(3), q(41, 8));
        for k in 2..=12 {
            assert_eq!(plus_ratio(k), plus_ratio_from_fraction(k));
            assert!(plus_ratio_above_limit(k));
            if k > 2 {
                assert!(plus_ratio(k) < plus_ratio(k - 1));
            }
        }
        let limit = 2.0 * PHI + 1.0;
        assert!((ratio_to_f64(&plus_ratio(12)) - limit).abs() < 1e-3);
    }

    #[test]
    fn upsilon_and_boundary_values() {
        assert_eq!(upsilon_count(2), big("1"));
        assert_eq!(upsilon_count(3), big("4"));
        assert_eq!(upsilon_count(4), big("196"));
        assert_eq!(boundary_count(2), big("2"));
        assert_eq!(boundary_count(3), big("16"));
        assert_eq!(boundary_count(4), big("1568"));
        for k in 2..=12 {
            assert!(upsilon_ratio_within_phi_bound(k), "k = {k}");
        }
        // 196/11047 against φ^-6 by hand: 0.01774 <= 0.05573
        assert!(196.0 / 11047.0 <= PHI.powi(-6));
    }

    #[test]
    fn variance_and_dirichlet_values() {
        assert_eq!(variance_vertical_indicator(2), q(12, 49));
        let ratio = q(16, 82);
        assert_eq!(
            variance_vertical_indicator(3),
            q(1, 4) * (ExactRatio::one() - &ratio * &ratio)
        );
        assert_eq!(dirichlet_vertical_indicator(2), q(1, 28));
        assert_eq!(dirichlet_vertical_indicator(3), q(1, 82));
        assert_eq!(dirichlet_vertical_indicator(4), q(1568, 32 * 11047));
        for k in 2..=12 {
            assert!(dirichlet_within_phi_bound(k), "k = {k}");
        }
        let v12 = ratio_to_f64(&variance_vertical_indicator(12));
        assert!((v12 - (5f64.sqrt() - 2.0)).abs() < 0.01);
    }

    #[test]
    fn growth_constant() {
        assert!((growth_constant_estimate(1) - (PHI * 2.0).sqrt()).abs() < 1e-15);
        assert!((growth_constant_estimate(12) - OMEGA).abs() < 1e-6);
        let seq: Vec<f64> = (4..=14).map(growth_constant_estimate).collect();
        let increasing = seq.windows(2).all(|w| w[1] >= w[0]);
        let decreasing = seq.windows(2).all(|w| w[1] <= w[0]);
        assert!(increasing || decreasing, "{seq:?}");
    }

    #[test]
    fn cap_is_enforced() {
        assert!(CountTable::up_to(DEFAULT_K_CAP).is_ok());
        assert!(matches!(
            CountTable::up_to(DEFAULT_K_CAP + 1),
            Err(Error::SizeGuard { .. })
        ));
    }
}
