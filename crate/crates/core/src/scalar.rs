//! Exact scalar fields.
//!
//! Every computation in this crate is generic over [`Scalar`], an ordered
//! field with exact arithmetic. The trait is implemented for
//! `num_rational::Ratio<I>` over any signed integer type with an integer
//! square root; [`crate::Rational`] (arbitrary precision) is the type used by
//! the command line and the acceptance suite. Fixed-width ratios are handy in
//! small tests but panic on overflow.
//!
//! Floating point types are deliberately not scalars: stratum membership is
//! decided by exact equalities such as `α·β = ‖β‖²`.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_integer::{Integer, Roots};
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone + Debug + Display + FromStr + Ord + Num + Signed + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;

    /// `n / d`; panics when `d == 0`.
    fn from_frac(n: i64, d: i64) -> Self {
        Self::from_i64(n) / Self::from_i64(d)
    }

    fn is_integer(&self) -> bool;

    /// Rational bracket `(lo, hi)` with `lo ≤ √self ≤ hi`.
    ///
    /// When `self` is the square of a rational both ends equal the exact
    /// root. Otherwise `hi − lo` is at most `1 / (q·denom_bound)` where `q`
    /// is the denominator of `self`. Panics on negative input.
    fn sqrt_bracket(&self, denom_bound: u64) -> (Self, Self);

    /// Least common multiple of the denominators of `values`, as a scalar.
    fn denominator_lcm(values: &[Self]) -> Self;

    /// `⌊self⌋`, if it fits in an `i64`.
    fn floor_i64(&self) -> Option<i64>;
}

impl<I> Scalar for Ratio<I>
where
    I: Clone
        + Debug
        + Display
        + FromStr
        + Integer
        + Signed
        + Roots
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static,
{
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(I::from_i64(v).expect("integer out of range for scalar"))
    }

    fn is_integer(&self) -> bool {
        Ratio::is_integer(self)
    }

    fn sqrt_bracket(&self, denom_bound: u64) -> (Self, Self) {
        assert!(!self.is_negative(), "square root of a negative scalar");
        if self.is_zero() {
            return (Self::zero(), Self::zero());
        }
        // √(a/b) = √(a·b) / b
        let a = self.numer().clone();
        let b = self.denom().clone();
        let ab = a * b.clone();
        let r = ab.sqrt();
        if r.clone() * r.clone() == ab {
            let exact = Ratio::new(r, b);
            return (exact.clone(), exact);
        }
        let scale = I::from_u64(denom_bound.max(1)).expect("denominator bound out of range");
        let scaled = ab * scale.clone() * scale.clone();
        let s = scaled.sqrt();
        let den = b * scale;
        let lo = Ratio::new(s.clone(), den.clone());
        let hi = Ratio::new(s + I::one(), den);
        (lo, hi)
    }

    fn denominator_lcm(values: &[Self]) -> Self {
        let l = values
            .iter()
            .fold(I::one(), |acc, v| acc.lcm(v.denom()));
        Ratio::from_integer(l)
    }

    fn floor_i64(&self) -> Option<i64> {
        self.floor().to_integer().to_i64()
    }
}

/// Smaller of two scalars (by value).
pub(crate) fn min_of<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`, rejecting zero denominators.
pub fn parse_scalar<T: Scalar>(s: &str) -> Option<T> {
    let t = s.trim();
    if let Some((_, d)) = t.split_once('/') {
        if d.trim().trim_start_matches(['+', '-']).chars().all(|c| c == '0') {
            return None;
        }
    }
    T::from_str(t).ok()
}

/// `k!` as a scalar.
pub(crate) fn factorial<T: Scalar>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, i| acc * T::from_i64(i as i64))
}
