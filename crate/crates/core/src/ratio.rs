//! Helpers around `BigRational`: construction, floor, and the `"p/q"` text form
//! used in every report.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    BigRational::from_integer(BigInt::from(value))
}

/// Round-to-nearest double. Display only; comparisons stay rational.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn floor_i64(r: &Rational) -> i64 {
    r.floor().to_integer().to_i64().expect("floor fits in i64")
}

/// Always `p/q`, including integers (`0/1`, `-2/1`).
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (text.parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format(r))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let text = String::deserialize(d)?;
    parse(&text).ok_or_else(|| serde::de::Error::custom(format!("not a rational: {text:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form() {
        assert_eq!(format(&rat(-4, 6)), "-2/3");
        assert_eq!(format(&int(0)), "0/1");
        assert_eq!(parse("-2/3"), Some(rat(-2, 3)));
        assert_eq!(parse("5"), Some(int(5)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("x"), None);
    }

    #[test]
    fn floors() {
        assert_eq!(floor_i64(&rat(7, 3)), 2);
        assert_eq!(floor_i64(&rat(-1, 3)), -1);
        assert_eq!(floor_i64(&int(4)), 4);
    }
}
