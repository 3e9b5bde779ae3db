//! Arithmetic abstraction letting the weighted-pool, network, and comparison
//! machinery run either in exact rational arithmetic (the reference mode, in
//! which equality verdicts are meaningful) or in f64 (for scale profiling).

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A nonnegative weight value. Implemented by [`BigRational`] (exact) and
/// `f64` (approximate). All pool/network quantities stay in `[0, 1]`-ish
/// ranges thanks to renormalization, so f64 never overflows in practice.
pub trait Scalar: Clone + PartialEq + PartialOrd + Send + Sync + std::fmt::Debug + 'static {
    /// True when arithmetic is exact and equality comparisons are decisive.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: u64, den: u64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Canonical text form: reduced "p/q" for rationals (always with the
    /// denominator, so "1/1" not "1"), shortest round-trip decimal for f64.
    fn display(&self) -> String;

    fn sum<'a>(values: impl Iterator<Item = &'a Self>) -> Self
    where
        Self: 'a,
    {
        values.fold(Self::zero(), |acc, v| acc.add(v))
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "denominator must be nonzero");
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn display(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "denominator must be nonzero");
        num as f64 / den as f64
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn display(&self) -> String {
        format!("{self}")
    }
}

/// A positive rational given as a numerator/denominator pair — the exact
/// cross-mode carrier for the update factor λ (and any other user-supplied
/// rational), so that exact and float runs are configured identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RatioSpec {
    pub num: u64,
    pub den: u64,
}

impl RatioSpec {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 {
            return Err(Error::RatioParse {
                input: format!("{num}/{den}"),
            });
        }
        let g = gcd(num, den);
        Ok(RatioSpec {
            num: num / g,
            den: den / g,
        })
    }

    /// Parses "3/2", "2", or "2/1".
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::RatioParse {
            input: text.to_string(),
        };
        let mut parts = text.trim().splitn(2, '/');
        let num: u64 = parts
            .next()
            .filter(|s| !s.is_empty())
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(bad)?;
        let den: u64 = match parts.next() {
            Some(d) => d.trim().parse().map_err(|_| bad())?,
            None => 1,
        };
        RatioSpec::new(num, den)
    }

    pub fn to_scalar<S: Scalar>(self) -> S {
        S::from_ratio(self.num, self.den)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// True for λ ≥ 1 (the multiplicative-reward regime; 1 is the identity).
    pub fn at_least_one(self) -> bool {
        self.num >= self.den
    }

    /// True for λ > 1 strictly.
    pub fn above_one(self) -> bool {
        self.num > self.den
    }
}

impl std::fmt::Display for RatioSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Index of the largest value, ties broken toward the lowest index: the
/// single deterministic tie-break rule used by every predictor in the crate.
pub fn argmax<S: Scalar>(values: &[S]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if v > &values[best] {
            best = i;
        }
    }
    best
}

/// Rescales a vector so it sums to one. Errors when the sum is zero.
pub fn normalize<S: Scalar>(values: &[S]) -> Result<Vec<S>> {
    let total = S::sum(values.iter());
    if total.is_zero() {
        return Err(Error::ZeroTotal);
    }
    Ok(values.iter().map(|v| v.div(&total)).collect())
}

/// λ^e by repeated squaring; exponents in this crate stay ≤ sequence length.
pub fn scalar_pow<S: Scalar>(base: &S, mut exp: u64) -> S {
    let mut acc = S::one();
    let mut sq = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc.mul(&sq);
        }
        sq = sq.mul(&sq);
        exp >>= 1;
    }
    acc
}

/// Largest absolute difference between paired entries, as a scalar.
pub fn max_abs_gap(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_else(Zero::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_display_always_carries_denominator() {
        let half: BigRational = Scalar::from_ratio(1, 2);
        assert_eq!(half.display(), "1/2");
        let one: BigRational = Scalar::from_ratio(3, 3);
        assert_eq!(one.display(), "1/1");
        let reduced: BigRational = Scalar::from_ratio(4, 6);
        assert_eq!(reduced.display(), "2/3");
    }

    #[test]
    fn ratio_spec_parses_and_reduces() {
        assert_eq!(RatioSpec::parse("3/2").unwrap(), RatioSpec { num: 3, den: 2 });
        assert_eq!(RatioSpec::parse("2").unwrap(), RatioSpec { num: 2, den: 1 });
        assert_eq!(RatioSpec::parse("6/4").unwrap(), RatioSpec { num: 3, den: 2 });
        assert!(RatioSpec::parse("0").is_err());
        assert!(RatioSpec::parse("1/0").is_err());
        assert!(RatioSpec::parse("x").is_err());
        assert!(RatioSpec::parse("-1/2").is_err());
    }

    #[test]
    fn ratio_spec_one_boundaries() {
        assert!(RatioSpec::parse("1").unwrap().at_least_one());
        assert!(!RatioSpec::parse("1").unwrap().above_one());
        assert!(RatioSpec::parse("3/2").unwrap().above_one());
        assert!(!RatioSpec::parse("2/3").unwrap().at_least_one());
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let v: Vec<BigRational> = vec![
            Scalar::from_ratio(1, 2),
            Scalar::from_ratio(1, 2),
            Scalar::from_ratio(1, 4),
        ];
        assert_eq!(argmax(&v), 0);
        let w = vec![0.25f64, 0.5, 0.5];
        assert_eq!(argmax(&w), 1);
    }

    #[test]
    fn normalize_rejects_zero_total() {
        let zeros: Vec<BigRational> = vec![Scalar::zero(), Scalar::zero()];
        assert!(matches!(normalize(&zeros), Err(Error::ZeroTotal)));
        let v: Vec<BigRational> = vec![Scalar::from_ratio(1, 1), Scalar::from_ratio(3, 1)];
        let n = normalize(&v).unwrap();
        assert_eq!(n[0].display(), "1/4");
        assert_eq!(n[1].display(), "3/4");
    }

    #[test]
    fn pow_matches_naive() {
        let base: BigRational = Scalar::from_ratio(3, 2);
        let mut naive: BigRational = Scalar::one();
        for e in 0..12u64 {
            assert_eq!(scalar_pow(&base, e), naive);
            naive = naive.mul(&base);
        }
    }
}
