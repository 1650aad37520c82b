//! Exact rational weights and their textual form.
//!
//! Every weight, cost and ratio in the crate is a [`Weight`]. On the wire they
//! are always written as `"p/q"` strings; on input we also accept plain
//! integers (`"3"`) and finite decimals (`"1.25"`), which convert exactly.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Weight = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as an exact rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

pub fn int(v: i64) -> Weight {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Weight {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-1.75"`.
pub fn parse(input: &str) -> Result<Weight, ParseRationalError> {
    let err = |reason| ParseRationalError {
        input: input.to_string(),
        reason,
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let den: BigInt = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if den.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad fractional part"));
        }
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad integer part"));
        }
        let mut text = String::with_capacity(digits.len() + frac.len());
        text.push_str(if digits.is_empty() { "0" } else { digits });
        text.push_str(frac);
        let mut num: BigInt = text.parse().map_err(|_| err("bad decimal"))?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(num, den));
    }
    let num: BigInt = s.parse().map_err(|_| err("not a number"))?;
    Ok(BigRational::from_integer(num))
}

/// Canonical `"p/q"` form; integers keep an explicit `/1`.
pub fn format(w: &Weight) -> String {
    format!("{}/{}", w.numer(), w.denom())
}

pub fn to_f64(w: &Weight) -> f64 {
    w.to_f64().unwrap_or(f64::NAN)
}

/// Fixed six-decimal rendering used in reports.
pub fn decimal6(w: &Weight) -> String {
    format!("{:.6}", to_f64(w))
}

pub fn is_positive(w: &Weight) -> bool {
    w.is_positive()
}

/// Least common multiple of the denominators, i.e. the smallest factor that
/// turns every weight into an integer.
pub fn common_denominator<'a>(weights: impl IntoIterator<Item = &'a Weight>) -> BigInt {
    weights.into_iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()))
}

/// Display adapter that prints a weight in `"p/q"` form.
pub struct Pq<'a>(pub &'a Weight);

impl fmt::Display for Pq<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// serde adapter: `Weight` <-> `"p/q"` string.
pub mod serde_pq {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &Weight, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(w))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Weight, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::super::*;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(w: &Option<Weight>, s: S) -> Result<S::Ok, S::Error> {
            match w {
                Some(w) => s.serialize_str(&format(w)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Weight>, D::Error> {
            let text = Option::<String>::deserialize(d)?;
            text.map(|t| parse(&t).map_err(serde::de::Error::custom)).transpose()
        }
    }

    pub mod vec {
        use super::super::*;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(ws: &[Weight], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(ws.iter().map(format))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Weight>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| parse(t).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_accepted_forms() {
        assert_eq!(parse("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse("7").unwrap(), int(7));
        assert_eq!(parse("1.5").unwrap(), ratio(3, 2));
        assert_eq!(parse("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse(" 199/100 ").unwrap(), ratio(199, 100));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "a/b", "1.", "1.2.3", "x", "1e3"] {
            assert!(parse(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn format_is_always_p_over_q() {
        assert_eq!(format(&int(2)), "2/1");
        assert_eq!(format(&ratio(10, 4)), "5/2");
        assert_eq!(Pq(&ratio(-3, 9)).to_string(), "-1/3");
    }

    #[test]
    fn common_denominator_is_lcm() {
        let ws = [ratio(1, 4), ratio(5, 6), int(3)];
        assert_eq!(common_denominator(ws.iter()), BigInt::from(12));
    }

    proptest::proptest! {
        #[test]
        fn text_round_trip(num in -10_000i64..10_000, den in 1i64..10_000) {
            let w = ratio(num, den);
            proptest::prop_assert_eq!(parse(&format(&w)).unwrap(), w);
        }
    }
}
