//! Rational helpers: parsing, formatting and a few exact utilities.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// 2^{-e}, exact.
pub fn pow2_neg(e: u64) -> Q {
    Q::new(BigInt::one(), BigInt::one() << e)
}

pub fn pow_u(base: &Q, e: u64) -> Q {
    num_traits::pow::pow(base.clone(), e as usize)
}

/// Parse `"p/q"`, `"p"` or a finite decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let ip_abs = ip.trim_start_matches(['-', '+']);
        let ipv: BigInt = if ip_abs.is_empty() { BigInt::zero() } else { ip_abs.parse().map_err(|_| bad())? };
        let fpv: BigInt = fp.parse().map_err(|_| bad())?;
        let den = num_traits::pow::pow(BigInt::from(10), fp.len());
        let v = Q::new(ipv * &den + fpv, den);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

/// `"p/q"`, or `"p"` for integers.
pub fn fmt_frac(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Fixed 12-digit decimal, round half to even.
pub fn fmt_dec12(x: &Q) -> String {
    fmt_dec(x, 12)
}

pub fn fmt_dec(x: &Q, digits: usize) -> String {
    let scale = num_traits::pow::pow(BigInt::from(10), digits);
    let scaled = x * Q::from_integer(scale.clone());
    let (fl, rem) = scaled.numer().div_mod_floor(scaled.denom());
    // rem / denom in [0,1)
    let twice = &rem * 2u32;
    let mut n = fl;
    match twice.cmp(scaled.denom()) {
        std::cmp::Ordering::Greater => n += 1,
        std::cmp::Ordering::Equal => {
            if n.is_odd() {
                n += 1
            }
        }
        std::cmp::Ordering::Less => {}
    }
    let neg = n.sign() == Sign::Minus;
    let (ip, fp) = n.abs().div_rem(&scale);
    let s = if digits == 0 {
        ip.to_string()
    } else {
        format!("{}.{:0>width$}", ip, fp.to_string(), width = digits)
    };
    if neg {
        format!("-{s}")
    } else {
        s
    }
}

pub fn floor(x: &Q) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Fractional part in [0,1).
pub fn frac(x: &Q) -> Q {
    x - Q::from_integer(floor(x))
}

pub fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

/// Lossy conversion for display and heuristics only.
pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// If `r = 2^{-l}` for some integer `l >= 0`, return `l`.
pub fn neg_log2_exact(r: &Q) -> Option<u64> {
    if !r.numer().is_one() || !r.is_positive() {
        return None;
    }
    let d = r.denom();
    let bits = d.bits();
    if (BigInt::one() << (bits - 1)) == *d {
        Some(bits - 1)
    } else {
        None
    }
}

pub fn max_q<'a>(it: impl IntoIterator<Item = &'a Q>) -> Option<Q> {
    it.into_iter().max().cloned()
}

pub fn min_q<'a>(it: impl IntoIterator<Item = &'a Q>) -> Option<Q> {
    it.into_iter().min().cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("1/3").unwrap(), q(1, 3));
        assert_eq!(parse("-2").unwrap(), int(-2));
        assert_eq!(parse("0.25").unwrap(), q(1, 4));
        assert_eq!(parse("-0.5").unwrap(), q(-1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(fmt_dec12(&q(1, 3)), "0.333333333333");
        assert_eq!(fmt_dec12(&q(2, 3)), "0.666666666667");
        assert_eq!(fmt_dec(&q(1, 8), 2), "0.12");
        assert_eq!(fmt_dec(&q(3, 8), 2), "0.38");
        assert_eq!(fmt_dec(&q(-1, 3), 3), "-0.333");
        assert_eq!(fmt_dec12(&int(2)), "2.000000000000");
    }

    #[test]
    fn frac_and_log() {
        assert_eq!(frac(&q(-1, 4)), q(3, 4));
        assert_eq!(neg_log2_exact(&q(1, 8)), Some(3));
        assert_eq!(neg_log2_exact(&int(1)), Some(0));
        assert_eq!(neg_log2_exact(&q(3, 8)), None);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(fmt_frac(&q(4, 2)), "2");
    }
}
