//! Exact rational scalars.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with a positive denominator.
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

/// `num / den`, reduced. Panics if `den == 0`.
pub fn frac(num: i64, den: i64) -> Scalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn factorial(n: u32) -> Scalar {
    (1..=n as i64).fold(Scalar::one(), |acc, k| acc * int(k))
}

/// Renders as an integer literal or `p/q` (no parentheses).
pub fn render(s: &Scalar) -> String {
    if s.is_integer() {
        s.numer().to_string()
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

/// Renders a coefficient so that it can be glued to a `*` product:
/// integers bare, fractions parenthesised.
pub fn render_factor(s: &Scalar) -> String {
    if s.is_integer() {
        s.numer().to_string()
    } else {
        format!("({}/{})", s.numer(), s.denom())
    }
}

/// Parses `n`, `-n` or `p/q`.
pub fn parse(text: &str) -> Result<Scalar> {
    let text = text.trim();
    let bad = || Error::Invalid(format!("not a rational literal: {text:?}"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = text.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

pub fn is_negative(s: &Scalar) -> bool {
    s.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_form() {
        let s = frac(6, -4);
        assert_eq!(s.numer(), &BigInt::from(-3));
        assert_eq!(s.denom(), &BigInt::from(2));
        assert_eq!(frac(0, 5), Scalar::zero());
        assert_eq!(render(&frac(0, 5)), "0");
    }

    #[test]
    fn render_and_parse() {
        for (text, s) in [("3/2", frac(3, 2)), ("-7", int(-7)), ("-1/3", frac(-1, 3))] {
            assert_eq!(render(&s), text);
            assert_eq!(parse(text).unwrap(), s);
        }
        assert_eq!(render_factor(&frac(3, 2)), "(3/2)");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), int(1));
        assert_eq!(factorial(5), int(120));
    }
}
