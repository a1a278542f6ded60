use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

/// Exact rational scalar. Stored in lowest terms with a positive
/// denominator; every operation is exact. There is no floating point
/// anywhere in this crate.
pub type Scalar = BigRational;

/// The integer `n` as a scalar.
pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

/// The fraction `n/d`. Panics if `d == 0`.
pub fn frac(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {input:?}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: String,
}

/// Parses `"p"` or `"p/q"` (optional leading sign on `p`) into an exact
/// scalar. Whitespace around the literal is accepted, a zero denominator
/// is not.
pub fn parse_rational(s: &str) -> Result<Scalar, ParseRationalError> {
    let err = |reason: &str| ParseRationalError {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(err("empty string"));
    }
    let (num_part, den_part) = match t.split_once('/') {
        None => (t, None),
        Some((n, d)) => (n, Some(d)),
    };
    let numer = BigInt::from_str(num_part.trim()).map_err(|_| err("numerator is not an integer"))?;
    let denom = match den_part {
        None => BigInt::one(),
        Some(d) => BigInt::from_str(d.trim()).map_err(|_| err("denominator is not an integer"))?,
    };
    if denom.is_zero() {
        return Err(err("denominator is zero"));
    }
    Ok(BigRational::new(numer, denom))
}

/// Formats in lowest terms as `"p"` or `"p/q"`; the denominator is omitted
/// exactly when it is 1.
pub fn format_rational(x: &Scalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else if x.denom().is_negative() {
        // unreachable for a reduced BigRational, kept as a guard
        format!("{}/{}", -x.numer(), -x.denom())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_roundtrip() {
        for s in ["0", "5", "-3", "2/3", "-7/4", "10/5"] {
            let x = parse_rational(s).unwrap();
            let back = parse_rational(&format_rational(&x)).unwrap();
            assert_eq!(x, back);
        }
        assert_eq!(format_rational(&parse_rational("10/5").unwrap()), "2");
        assert_eq!(format_rational(&parse_rational("-4/6").unwrap()), "-2/3");
        assert_eq!(format_rational(&parse_rational("3/-6").unwrap()), "-1/2");
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "1/0", "a", "1/2/3", "1.5"] {
            assert!(parse_rational(s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn arithmetic_reduces() {
        let x = frac(1, 6) + frac(1, 3);
        assert_eq!(x, frac(1, 2));
        assert_eq!(format_rational(&x), "1/2");
    }
}
