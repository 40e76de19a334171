//! Exact rational helpers on top of `num-rational`.

use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub use num_rational::BigRational as Rational;

/// Integer as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d` in lowest terms. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

/// Parses `"3"`, `"-7/2"` or a terminating decimal like `"0.25"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let neg = ip.trim_start().starts_with('-');
        let ip = if ip.is_empty() || ip == "-" || ip == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(ip).ok()?
        };
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let frac = BigInt::from_str(fp).ok()?;
        let mag = ip.abs() * &scale + frac;
        let num = if neg { -mag } else { mag };
        return Some(Rational::new(num, scale));
    }
    BigInt::from_str(s).ok().map(Rational::from_integer)
}

pub fn format_rational(r: &Rational) -> String {
    alloc::format!("{}", r)
}

pub fn lcm_denominators<'a>(vals: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    vals.into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational from a float that is known to be an integer.
pub fn round_to_int(v: f64) -> Option<BigInt> {
    if !v.is_finite() {
        return None;
    }
    BigInt::from_f64(num_traits::Float::round(v))
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn int_vec(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

pub fn from_big(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

/// Sign of a rational as -1, 0, 1.
pub fn sign(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3"), Some(int(3)));
        assert_eq!(parse_rational("-7/2"), Some(rat(-7, 2)));
        assert_eq!(parse_rational("2/4"), Some(rat(1, 2)));
        assert_eq!(parse_rational("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn lcm_of_row() {
        let row = [rat(1, 2), rat(1, 3), rat(1, 6)];
        assert_eq!(lcm_denominators(row.iter()), big(6));
    }
}
