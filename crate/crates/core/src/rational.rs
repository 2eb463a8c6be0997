//! Exact rational scalars and their `"p/q"` text form.

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// The base field: arbitrary-precision rationals.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parses `"3"`, `"-7"`, `"1/2"`, `"-4/6"` (reduced on the way in).
pub fn parse_q(text: &str) -> Result<Q> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    match text.split_once('/') {
        None => text.parse::<BigInt>().map(Q::from_integer).map_err(|_| bad()),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {text:?}")));
            }
            Ok(Q::new(n, d))
        }
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn fmt_vec(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_q).collect()
}

pub fn parse_vec(v: &[String]) -> Result<Vec<Q>> {
    v.iter().map(|s| parse_q(s)).collect()
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Clears denominators and divides out the content, making the first
/// nonzero entry positive. Returns `None` for the zero vector.
pub fn primitive_integer_row(v: &[Q]) -> Option<Vec<BigInt>> {
    use num::Integer;
    let first = v.iter().position(|x| !x.is_zero())?;
    let lcm = v.iter().filter(|x| !x.is_zero()).fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut row: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(lcm.clone())).to_integer()).collect();
    normalize_int_row(&mut row, first);
    Some(row)
}

pub(crate) fn normalize_int_row(row: &mut [BigInt], lead: usize) {
    use num::Integer;
    let g = row.iter().filter(|x| !x.is_zero()).fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return;
    }
    let flip = row[lead].is_negative();
    for x in row.iter_mut() {
        if !x.is_zero() {
            *x = &*x / &g;
            if flip {
                *x = -&*x;
            }
        }
    }
}

pub mod serde_q {
    //! `serde(with = ...)` helpers that keep rationals as `"p/q"` strings.
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("4/6").unwrap(), qr(2, 3));
        assert_eq!(fmt_q(&qr(-4, 6)), "-2/3");
        assert_eq!(fmt_q(&q(5)), "5");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
    }

    #[test]
    fn primitive_rows() {
        let row = primitive_integer_row(&[zero(), qr(-1, 2), qr(1, 3)]).unwrap();
        assert_eq!(row, vec![BigInt::from(0), BigInt::from(3), BigInt::from(-2)]);
        assert!(primitive_integer_row(&[zero(), zero()]).is_none());
    }
}
