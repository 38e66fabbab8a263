//! Rational functions in canonical form: `num/den` with `gcd(num, den) = 1`
//! and `den` monic.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::traits::{One, Zero};

use super::gcd::gcd;
use super::poly::MultiPoly;
use super::rational::Rational;
use super::symbol::Symbol;
use crate::error::KernelError;

#[derive(Clone)]
pub struct RatFunc {
    num: MultiPoly,
    den: MultiPoly,
}

impl RatFunc {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self, KernelError> {
        if den.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: MultiPoly, den: MultiPoly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = gcd(&num, &den);
            if g.is_constant() {
                (num, den)
            } else {
                (
                    num.div_exact(&g).expect("gcd divides numerator"),
                    den.div_exact(&g).expect("gcd divides denominator"),
                )
            }
        };
        let lc = den.leading_coeff();
        let (num, den) = if lc.is_one() {
            (num, den)
        } else {
            let inv = lc.recip();
            (num.scale(&inv), den.scale(&inv))
        };
        RatFunc {
            num: num.trimmed(),
            den: den.trimmed(),
        }
    }

    pub fn zero() -> Self {
        RatFunc {
            num: MultiPoly::zero(),
            den: MultiPoly::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        RatFunc {
            num: MultiPoly::constant(c),
            den: MultiPoly::one(),
        }
    }

    pub fn int(n: i64) -> Self {
        Self::constant(super::rational::int(n))
    }

    pub fn var(sym: &Symbol) -> Self {
        Self::from_poly(MultiPoly::var(sym))
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        RatFunc {
            num: p.trimmed(),
            den: MultiPoly::one(),
        }
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        let n = self.num.constant_value()?;
        let d = self.den.constant_value()?;
        Some(n / d)
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn used_vars(&self) -> Vec<Symbol> {
        let mut v = self.num.used_vars();
        for s in self.den.used_vars() {
            if !v.contains(&s) {
                v.push(s);
            }
        }
        v
    }

    pub fn contains_var(&self, sym: &Symbol) -> bool {
        self.num.contains_var(sym) || self.den.contains_var(sym)
    }

    pub fn recip(&self) -> Result<Self, KernelError> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, k: i32) -> Result<Self, KernelError> {
        if k >= 0 {
            Ok(RatFunc {
                num: self.num.pow(k as u32),
                den: self.den.pow(k as u32),
            })
        } else {
            self.recip()?.pow(-k)
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn derivative(&self, sym: &Symbol) -> Self {
        if !self.contains_var(sym) {
            return RatFunc::zero();
        }
        let n = &(&self.num.derivative(sym) * &self.den) - &(&self.num * &self.den.derivative(sym));
        RatFunc::normalized(n, self.den.pow(2))
    }

    pub fn substitute(&self, sym: &Symbol, value: &RatFunc) -> Result<Self, KernelError> {
        if !self.contains_var(sym) {
            return Ok(self.clone());
        }
        let n = compose(&self.num, sym, value);
        let d = compose(&self.den, sym, value);
        n.checked_div(&d)
    }

    pub fn checked_div(&self, rhs: &RatFunc) -> Result<Self, KernelError> {
        if rhs.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        Ok(self * &rhs.recip()?)
    }

    pub fn eval_map(&self, values: &HashMap<Symbol, f64>) -> Option<f64> {
        let n = self.num.eval_map(values)?;
        let d = self.den.eval_map(values)?;
        Some(n / d)
    }
}

/// `p(sym := value)` as a rational function, by Horner's scheme.
fn compose(p: &MultiPoly, sym: &Symbol, value: &RatFunc) -> RatFunc {
    let coeffs = p.coeffs_in(sym);
    let mut acc = RatFunc::zero();
    for c in coeffs.iter().rev() {
        let c = RatFunc::from_poly(c.clone());
        acc = &(&acc * value) + &c;
    }
    acc
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        (&self.num * &other.den) == (&other.num * &self.den)
    }
}

impl Eq for RatFunc {}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFunc::normalized(&self.num + &rhs.num, self.den.clone());
        }
        let n = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFunc::normalized(n, &self.den * &rhs.den)
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc {
                num: &self.num * &rhs.num,
                den: MultiPoly::one(),
            };
        }
        // cross-cancel before multiplying
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = rhs.den.div_exact(&g1).unwrap();
        let n2 = rhs.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        RatFunc::normalized(&n1 * &n2, &d1 * &d2)
    }
}

impl<'a> Div<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self.checked_div(rhs).expect("division by zero rational function")
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for RatFunc {
            type Output = RatFunc;
            fn $m(self, rhs: RatFunc) -> RatFunc {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            let n = if self.num.num_terms() > 1 {
                format!("({})", self.num)
            } else {
                self.num.to_string()
            };
            let d = if self.den.num_terms() > 1 || !self.den.is_constant() {
                format!("({})", self.den)
            } else {
                self.den.to_string()
            };
            write!(f, "{}/{}", n, d)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::rational::int;

    fn v(n: &str) -> RatFunc {
        RatFunc::var(&Symbol::new(n))
    }

    #[test]
    fn cancels_common_factors() {
        let x = v("x");
        let one = RatFunc::one();
        let a = &(&x * &x) - &one;
        let b = &x - &one;
        let q = &a / &b;
        assert!(q.is_polynomial());
        assert_eq!(q, &x + &one);
    }

    #[test]
    fn denominator_is_monic() {
        let x = v("x");
        let r = &RatFunc::one() / &x.scale(&int(-3));
        assert_eq!(r.den().leading_coeff(), int(1));
        assert_eq!(r.num().constant_value(), Some(crate::symkernel::rational::frac(-1, 3)));
    }

    #[test]
    fn derivative_quotient_rule() {
        let x = v("x");
        let r = &RatFunc::one() / &(&RatFunc::one() + &(&x * &x));
        let d = r.derivative(&Symbol::new("x"));
        let expected = &x.scale(&int(-2)) / &(&RatFunc::one() + &(&x * &x)).pow(2).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn substitution() {
        let e = v("eta");
        let expr = &e * &(&RatFunc::one() + &e.scale(&int(4)));
        let r = expr.substitute(&Symbol::new("eta"), &RatFunc::one()).unwrap();
        assert_eq!(r.constant_value(), Some(int(5)));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(RatFunc::new(MultiPoly::one(), MultiPoly::zero()).is_err());
    }
}
