//! Exact rational scalars.

use num::bigint::BigInt;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::BigRational;

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Integer value as `i64`, when it fits.
pub fn as_i64(r: &Rational) -> Option<i64> {
    if is_integer(r) {
        r.numer().to_i64()
    } else {
        None
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // huge numerator/denominator: scale through logs
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Parses `3`, `-3/4`, or a finite decimal such as `0.25`.
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, fracpart)) = text.split_once('.') {
        if fracpart.is_empty() || !fracpart.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if whole_abs.is_empty() { "0" } else { whole_abs }, fracpart);
        let n: BigInt = digits.parse().ok()?;
        let d = num::pow(BigInt::from(10), fracpart.len());
        let r = Rational::new(n, d);
        return Some(if negative { -r } else { r });
    }
    let n: BigInt = text.parse().ok()?;
    Some(Rational::from_integer(n))
}

/// Exact `r^(1/k)` when `r` is a perfect k-th power of a rational.
pub fn exact_root(r: &Rational, k: u32) -> Option<Rational> {
    if k == 0 {
        return None;
    }
    if r.is_negative() && k % 2 == 0 {
        return None;
    }
    let n = int_root(&r.numer().abs(), k)?;
    let d = int_root(r.denom(), k)?;
    let root = Rational::new(n, d);
    Some(if r.is_negative() { -root } else { root })
}

fn int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    let root = n.nth_root(k);
    if num::pow(root.clone(), k as usize) == *n {
        Some(root)
    } else {
        None
    }
}

/// Canonical text: `3`, `-3/4`.
pub fn format(r: &Rational) -> String {
    if is_integer(r) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse("3"), Some(int(3)));
        assert_eq!(parse("-6/8"), Some(frac(-3, 4)));
        assert_eq!(parse("0.25"), Some(frac(1, 4)));
        assert_eq!(parse("-1.5"), Some(frac(-3, 2)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("abc"), None);
    }

    #[test]
    fn roots() {
        assert_eq!(exact_root(&frac(4, 9), 2), Some(frac(2, 3)));
        assert_eq!(exact_root(&int(2), 2), None);
        assert_eq!(exact_root(&int(-8), 3), Some(int(-2)));
        assert_eq!(exact_root(&int(-4), 2), None);
    }

    #[test]
    fn canonical_zero() {
        let z = frac(0, 5);
        assert_eq!(z.denom(), &BigInt::from(1));
        assert_eq!(format(&z), "0");
    }
}
