//! Exact rational scalars: parsing, formatting and serde helpers.
//!
//! Rational literals accept `p/q`, plain integers and finite decimal
//! strings (`-3.25` becomes `-13/4` exactly). The Unicode minus sign
//! U+2212 is accepted as a synonym for `-`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::Error;

/// The scalar type used throughout the engine.
pub type Q = BigRational;

/// Rational from an integer.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parse a rational literal: `p/q`, integer, or finite decimal.
pub fn parse_rational(input: &str) -> Result<Q, Error> {
    let s: String = input.trim().replace('\u{2212}', "-");
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {input:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {input:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {input:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_part = if int == "-" || int.is_empty() { "0" } else { int };
        let i: BigInt = int_part
            .parse()
            .map_err(|_| Error::Parse(format!("bad decimal in {input:?}")))?;
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad decimal in {input:?}")));
        }
        let f: BigInt = frac
            .parse()
            .map_err(|_| Error::Parse(format!("bad decimal in {input:?}")))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let magnitude = Q::new(i.abs() * &scale + f, scale);
        return Ok(if neg || i.is_negative() { -magnitude } else { magnitude });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational literal {input:?}")))?;
    Ok(Q::from_integer(n))
}

/// Canonical string form: `p` for integers, `p/q` otherwise.
pub fn fmt_rational(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Approximate `f64` value, for SVG export only.
pub fn to_f64(x: &Q) -> f64 {
    let n = x.numer();
    let d = x.denom();
    // Good enough for plotting: falls back to string parsing for huge values.
    match (n.to_string().parse::<f64>(), d.to_string().parse::<f64>()) {
        (Ok(nf), Ok(df)) if df != 0.0 => nf / df,
        _ => 0.0,
    }
}

/// Serde adapter storing rationals as canonical strings.
pub mod qstr {
    use super::{fmt_rational, parse_rational, Q};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(de::Error::custom)
    }
}

/// Serde adapter for vectors of rationals.
pub mod qstr_vec {
    use super::{fmt_rational, parse_rational, Q};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(fmt_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(de::Error::custom))
            .collect()
    }
}

/// Serde adapter for `Option<Q>`.
pub mod qstr_opt {
    use super::{fmt_rational, parse_rational, Q};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&fmt_rational(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        raw.map(|s| parse_rational(&s).map_err(de::Error::custom))
            .transpose()
    }
}

/// Exact complex number with rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexQ {
    pub re: Q,
    pub im: Q,
}

impl ComplexQ {
    pub fn new(re: Q, im: Q) -> Self {
        ComplexQ { re, im }
    }

    pub fn zero() -> Self {
        ComplexQ { re: Q::zero(), im: Q::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, other: &ComplexQ) -> ComplexQ {
        ComplexQ::new(&self.re + &other.re, &self.im + &other.im)
    }

    pub fn mul(&self, other: &ComplexQ) -> ComplexQ {
        ComplexQ::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    pub fn scale(&self, c: &Q) -> ComplexQ {
        ComplexQ::new(&self.re * c, &self.im * c)
    }
}

impl std::fmt::Display for ComplexQ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.im.is_negative() {
            write!(f, "{} - {}i", fmt_rational(&self.re), fmt_rational(&(-&self.im)))
        } else {
            write!(f, "{} + {}i", fmt_rational(&self.re), fmt_rational(&self.im))
        }
    }
}
