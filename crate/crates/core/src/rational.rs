//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision exact rational.
pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Q) -> Q {
    x - x.floor()
}

pub fn is_integral(x: &Q) -> bool {
    x.is_integer()
}

/// Least common multiple of the denominators of `xs` (1 for an empty list).
pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Parses `p`, `-p`, `p/q` or a finite decimal `d.ddd` exactly.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((int, fr)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_abs = int.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if int_abs.is_empty() { "0" } else { int_abs }, fr);
        if fr.is_empty() || !fr.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), fr.len());
        let v = Q::new(n, d);
        return Some(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Q::from_integer(n))
}

/// Canonical `p` or `p/q` text.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal approximation with up to `digits` fractional digits (for LP export).
pub fn to_decimal(x: &Q, digits: usize) -> String {
    if x.is_integer() {
        return x.numer().to_string();
    }
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (x.abs() * Q::from_integer(scale.clone())).round().to_integer();
    let (ip, fp) = scaled.div_rem(&scale);
    let mut frac_s = format!("{:0>width$}", fp.to_string(), width = digits);
    while frac_s.ends_with('0') {
        frac_s.pop();
    }
    let sign = if x.is_negative() { "-" } else { "" };
    if frac_s.is_empty() {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{frac_s}")
    }
}

pub mod serde_q {
    //! Serializes rationals as `"p/q"` strings so JSON stays exact.
    use super::{fmt_q, parse_q, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).ok_or_else(|| D::Error::custom(format!("invalid rational `{s}`")))
    }

    pub mod vec {
        use super::super::{fmt_q, parse_q, Q};
        use serde::{de::Error, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(xs.iter().map(fmt_q))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_q(s).ok_or_else(|| D::Error::custom(format!("invalid rational `{s}`"))))
                .collect()
        }
    }
}
