//! Exact rationals used throughout the crate.
//!
//! Everything is small (perimeters, lattice coordinates, Ehrhart counts),
//! so a 128-bit ratio is plenty. Release builds keep overflow checks on, so
//! an overflow panics instead of silently producing a wrong answer.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Rat = Ratio<i128>;

pub fn int(v: i64) -> Rat {
    Rat::from_integer(v as i128)
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num as i128, den as i128)
}

pub fn half() -> Rat {
    rat(1, 2)
}

/// Parses `"p/q"`, `"p"` or a terminating decimal such as `"1.25"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let err = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| err())?;
        let q: i128 = q.trim().parse().map_err(|_| err())?;
        if q == 0 {
            return Err(err());
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 30 {
            return Err(err());
        }
        let negative = whole.trim_start().starts_with('-');
        let w: i128 = if whole == "-" || whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| err())?
        };
        let scale = 10i128.pow(frac.len() as u32);
        let f: i128 = frac.parse().map_err(|_| err())?;
        let mag = w.abs() * scale + f;
        return Ok(Rat::new(if negative { -mag } else { mag }, scale));
    }
    s.parse::<i128>().map(Rat::from_integer).map_err(|_| err())
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn fmt_rat(q: &Rat) -> String {
    q.to_string()
}

pub fn ceil_i64(q: &Rat) -> i64 {
    q.ceil().to_integer() as i64
}

pub fn floor_i64(q: &Rat) -> i64 {
    q.floor().to_integer() as i64
}

pub fn is_integral(q: &Rat) -> bool {
    q.is_integer()
}

pub fn lcm_denominators<'a>(qs: impl IntoIterator<Item = &'a Rat>) -> i128 {
    qs.into_iter().fold(1i128, |acc, q| acc.lcm(q.denom()))
}

pub fn abs(q: &Rat) -> Rat {
    q.abs()
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn serialize<S: Serializer>(q: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rat(q))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
    let s = String::deserialize(d)?;
    parse_rat(&s).map_err(serde::de::Error::custom)
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(qs: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(qs.len()))?;
        for q in qs {
            seq.serialize_element(&fmt_rat(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
