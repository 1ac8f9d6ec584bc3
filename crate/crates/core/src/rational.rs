//! Exact rational scalars and their text form.
//!
//! Every distance, map value, weight and tolerance in the crate is a
//! [`Rat`]. The text form is `"a/b"` or `"a"`; parsing normalizes, so
//! `"4/6"` and `"2/3"` denote the same value.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number, always stored in lowest terms with a positive
/// denominator.
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRatError {
    pub literal: String,
    pub reason: &'static str,
}

/// `n / d` as a [`Rat`]. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn abs_diff(a: &Rat, b: &Rat) -> Rat {
    (a - b).abs()
}

/// The rational with the smallest denominator in `[lo, hi]`, and among
/// those the one of smallest absolute value. Panics if `lo > hi`.
pub fn simplest_between(lo: &Rat, hi: &Rat) -> Rat {
    assert!(lo <= hi, "empty interval");
    if hi.is_negative() {
        return -simplest_between(&-hi, &-lo);
    }
    if !lo.is_positive() {
        return Rat::zero();
    }
    let n = lo.floor();
    if n != *lo && n.clone() + Rat::one() > *hi {
        // Both ends lie in (n, n + 1): recurse on the reciprocals of the
        // fractional parts.
        let inner = simplest_between(&(hi - &n).recip(), &(lo - &n).recip());
        return n + inner.recip();
    }
    lo.ceil()
}

pub fn parse_rat(literal: &str) -> Result<Rat, ParseRatError> {
    let err = |reason| ParseRatError {
        literal: literal.to_string(),
        reason,
    };
    let s = literal.trim();
    if s.is_empty() {
        return Err(err("empty"));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let num: BigInt = num.parse().map_err(|_| err("numerator is not an integer"))?;
    let den: BigInt = match den {
        Some(d) => d.parse().map_err(|_| err("denominator is not an integer"))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rat::new(num, den))
}

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Display adapter producing the canonical text form.
pub struct RatDisplay<'a>(pub &'a Rat);

impl fmt::Display for RatDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rat(self.0))
    }
}

/// Serde adapter: a single rational as a string.
pub mod serde_rat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: a list of rationals as strings.
pub mod serde_rat_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rat(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter: a matrix of rationals as nested string lists.
pub mod serde_rat_matrix {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rat>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(m.len()))?;
        for row in m {
            let row: Vec<String> = row.iter().map(format_rat).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rat>>, D::Error> {
        let m = Vec::<Vec<String>>::deserialize(d)?;
        m.iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes() {
        assert_eq!(parse_rat("4/6").unwrap(), rat(2, 3));
        assert_eq!(parse_rat(" 3 ").unwrap(), int(3));
        assert_eq!(parse_rat("-1/-2").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("2/-4").unwrap(), rat(-1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rat("").is_err());
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("1.5").is_err());
        assert!(parse_rat("a/b").is_err());
    }

    #[test]
    fn simplest_between_matches_search() {
        let vals: Vec<Rat> = (-30..=30).flat_map(|n| (1..=7).map(move |d| rat(n, d))).collect();
        for lo in &vals {
            for hi in vals.iter().filter(|h| *h >= lo) {
                // Smallest denominator first, then smallest |value|.
                let expect = (1..=7i64)
                    .find_map(|d| {
                        let lo_n = (lo * int(d)).ceil().to_integer();
                        let hi_n = (hi * int(d)).floor().to_integer();
                        (lo_n <= hi_n).then(|| {
                            let z = BigInt::zero();
                            let n = if lo_n > z {
                                lo_n
                            } else if hi_n < z {
                                hi_n
                            } else {
                                z
                            };
                            Rat::new(n, d.into())
                        })
                    })
                    .unwrap();
                assert_eq!(simplest_between(lo, hi), expect, "[{lo}, {hi}]");
            }
        }
        assert_eq!(simplest_between(&rat(5, 11), &rat(6, 13)), rat(5, 11));
        assert_eq!(simplest_between(&rat(7, 16), &rat(1, 2)), rat(1, 2));
        assert_eq!(simplest_between(&rat(299, 700), &rat(301, 700)), rat(3, 7));
    }

    #[test]
    fn canonical_text() {
        assert_eq!(format_rat(&rat(6, 4)), "3/2");
        assert_eq!(format_rat(&int(7)), "7");
        assert_eq!(format_rat(&rat(-1, 3)), "-1/3");
        assert_eq!(format_rat(&zero()), "0");
    }
}
