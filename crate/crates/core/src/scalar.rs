//! Constants of the dense ordered domain.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_rational::{BigRational, Rational64};
use num_traits::{FromPrimitive, Num, Signed};

/// An exact, totally ordered, dense number type used for query constants.
///
/// Everything that reasons about order (entailment, closure, homomorphisms)
/// only needs `Ord`. Oracles and witness construction additionally pick
/// values strictly between two constants, which is where density and exact
/// division come in.
pub trait Scalar:
    Num + Signed + FromPrimitive + Ord + Clone + Hash + Debug + Display + Send + Sync + 'static
{
    /// Parses a literal such as `3`, `-2`, `1/2` or `0.25`.
    fn parse_literal(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let neg = int.starts_with('-');
            let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
            let num = Self::from_str_radix(&format!("{digits}/1"), 10).ok()?;
            let mut den = Self::one();
            let ten = Self::from_u32(10)?;
            for _ in 0..frac.len() {
                den = den * ten.clone();
            }
            let v = num / den;
            return Some(if neg { -v } else { v });
        }
        let body = s.strip_prefix('+').unwrap_or(s);
        let ok = body
            .bytes()
            .enumerate()
            .all(|(i, b)| b.is_ascii_digit() || b == b'/' || (i == 0 && b == b'-'));
        if !ok {
            return None;
        }
        match body.split_once('/') {
            Some((_, den)) if den.trim_start_matches('-').bytes().all(|b| b == b'0') => None,
            Some(_) => Self::from_str_radix(body, 10).ok(),
            // ratio parsers insist on an explicit denominator
            None => Self::from_str_radix(&format!("{body}/1"), 10).ok(),
        }
    }

    /// Value strictly between `self` and `other` (callers ensure `self < other`).
    fn midpoint(&self, other: &Self) -> Self {
        (self.clone() + other.clone()) / Self::from_u8(2).expect("2 is representable")
    }
}

impl Scalar for Rational64 {}
impl Scalar for BigRational {}

/// Builds a scalar from a small integer; used by generators and oracles.
pub fn int<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("small integers are representable")
}
