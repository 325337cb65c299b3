//! Numeric backends shared by the analytic and sampled paths.
//!
//! Class weights, correlation tables and joint probabilities are generic over
//! [`Scalar`]: exact [`Rational`] values when a distribution is known
//! analytically, `f64` when it was estimated from trials.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub trait Scalar: Clone + Debug + PartialOrd + Signed + Send + Sync + 'static {
    fn from_int(v: i64) -> Self;

    fn as_f64(&self) -> f64;

    /// Exact rational value. `None` for non-finite floats.
    fn to_rational(&self) -> Option<Rational>;

    fn from_rational(r: &Rational) -> Self;

    /// Slack allowed when checking that weights sum to one.
    fn sum_tolerance() -> Self;

    /// Slack allowed on the |S| <= 2 assertion and on feasibility residuals.
    fn bound_slack() -> Self;

    fn is_exact() -> bool;
}

impl Scalar for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Option<Rational> {
        BigRational::from_float(*self)
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }

    fn sum_tolerance() -> Self {
        1e-12
    }

    fn bound_slack() -> Self {
        1e-9
    }

    fn is_exact() -> bool {
        false
    }
}

impl Scalar for Rational {
    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn sum_tolerance() -> Self {
        Rational::zero()
    }

    fn bound_slack() -> Self {
        Rational::zero()
    }

    fn is_exact() -> bool {
        true
    }
}

/// Nearest-ish `f64` for a big rational; exact for dyadic values that fit.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerator and denominator: shift both down before dividing.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift as usize).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift as usize).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// `p / q` as an exact rational.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"3/8"`, `"-1"`, `"0.125"` or `"1e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits: BigInt = format!("0{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let mut value = if scale >= 0 {
        Rational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

pub(crate) fn two<T: Scalar>() -> T {
    T::one() + T::one()
}

pub(crate) fn from_usize<T: Scalar>(v: usize) -> T {
    T::from_int(i64::try_from(v).expect("count fits in i64"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_and_fraction_forms() {
        assert_eq!(parse_rational("3/8"), Some(ratio(3, 8)));
        assert_eq!(parse_rational("-0.125"), Some(ratio(-1, 8)));
        assert_eq!(parse_rational("1e-3"), Some(ratio(1, 1000)));
        assert_eq!(parse_rational("+2"), Some(ratio(2, 1)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn float_conversion_is_exact_for_dyadics() {
        let r = 0.375f64.to_rational().unwrap();
        assert_eq!(r, ratio(3, 8));
        assert_eq!(Rational::as_f64(&r), 0.375);
        assert!(f64::NAN.to_rational().is_none());
    }

    #[test]
    fn huge_rationals_still_convert() {
        let big = num_traits::pow(BigInt::from(3u8), 800);
        let r = Rational::new(big.clone() + 1, big);
        assert!((rational_to_f64(&r) - 1.0).abs() < 1e-12);
    }
}
