use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational scalar.
pub type Rational = BigRational;

/// Builds `num / den`.
///
/// Panics if `den == 0`.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn pow3(k: u32) -> Rational {
    Rational::from_integer(BigInt::from(3u8).pow(k))
}

/// Nearest binary64 value (saturating at the f64 range).
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact conversion of a finite binary64 value.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn abs(x: &Rational) -> Rational {
    x.abs()
}

pub fn is_zero(x: &Rational) -> bool {
    x.is_zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Serialized form of a rational: numerator and denominator as decimal
/// strings (they routinely exceed 64 bits) plus a float rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
    pub approx: f64,
}

impl From<&Rational> for RationalRepr {
    fn from(x: &Rational) -> Self {
        RationalRepr {
            num: x.numer().to_string(),
            den: x.denom().to_string(),
            approx: to_f64(x),
        }
    }
}

impl RationalRepr {
    pub fn parse(&self) -> Option<Rational> {
        let num: BigInt = self.num.parse().ok()?;
        let den: BigInt = self.den.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(Rational::new(num, den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repr_round_trip() {
        let x = q(-132, 91);
        let r = RationalRepr::from(&x);
        assert_eq!(r.num, "-132");
        assert_eq!(r.den, "91");
        assert_eq!(r.parse().unwrap(), x);
    }

    #[test]
    fn float_conversion_is_exact_for_dyadics() {
        assert_eq!(from_f64(0.375).unwrap(), q(3, 8));
        assert_eq!(to_f64(&q(1, 4)), 0.25);
    }
}
