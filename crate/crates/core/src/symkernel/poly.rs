//! Sparse multivariate polynomials over the rationals.
//!
//! Terms are keyed by dense exponent vectors aligned with `vars`; the
//! `BTreeMap` ordering of those vectors is the lex order on the declared
//! variable order, so the leading term is always the last entry.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::traits::{One, Signed, Zero};

use super::rational::{self, Rational};
use super::symbol::Symbol;

pub type Exponents = Vec<u32>;

#[derive(Clone)]
pub struct MultiPoly {
    vars: Arc<Vec<Symbol>>,
    terms: BTreeMap<Exponents, Rational>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly {
            vars: Arc::new(Vec::new()),
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        MultiPoly {
            vars: Arc::new(Vec::new()),
            terms,
        }
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rational::int(n))
    }

    pub fn var(sym: &Symbol) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![1], Rational::one());
        MultiPoly {
            vars: Arc::new(vec![sym.clone()]),
            terms,
        }
    }

    /// Builds a polynomial from raw terms; zero coefficients are dropped and
    /// repeated exponent vectors are summed.
    pub fn from_terms<I>(vars: Vec<Symbol>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponents, Rational)>,
    {
        let mut map: BTreeMap<Exponents, Rational> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent vector length mismatch");
            *map.entry(e).or_insert_with(Rational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        MultiPoly {
            vars: Arc::new(vars),
            terms: map,
        }
    }

    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        match self.terms.len() {
            0 => true,
            1 => self.terms.keys().next().unwrap().iter().all(|&e| e == 0),
            _ => false,
        }
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn index_of(&self, sym: &Symbol) -> Option<usize> {
        self.vars.iter().position(|v| v == sym)
    }

    /// Indices of variables that occur with a positive exponent.
    pub fn used_indices(&self) -> Vec<usize> {
        let mut used = vec![false; self.vars.len()];
        for e in self.terms.keys() {
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    used[i] = true;
                }
            }
        }
        (0..self.vars.len()).filter(|&i| used[i]).collect()
    }

    pub fn used_vars(&self) -> Vec<Symbol> {
        self.used_indices()
            .into_iter()
            .map(|i| self.vars[i].clone())
            .collect()
    }

    pub fn contains_var(&self, sym: &Symbol) -> bool {
        match self.index_of(sym) {
            Some(i) => self.terms.keys().any(|e| e[i] > 0),
            None => false,
        }
    }

    /// Re-expresses the polynomial over `vars`, which must include every
    /// variable that actually occurs.
    pub fn with_vars(&self, vars: &Arc<Vec<Symbol>>) -> MultiPoly {
        if Arc::ptr_eq(&self.vars, vars) || *self.vars == **vars {
            return MultiPoly {
                vars: vars.clone(),
                terms: self.terms.clone(),
            };
        }
        let map: Vec<Option<usize>> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v))
            .collect();
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut ne = vec![0u32; vars.len()];
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    let j = map[i].unwrap_or_else(|| {
                        panic!("variable {} missing from target ordering", self.vars[i])
                    });
                    ne[j] = k;
                }
            }
            terms.insert(ne, c.clone());
        }
        MultiPoly {
            vars: vars.clone(),
            terms,
        }
    }

    /// Drops variables that do not occur.
    pub fn trimmed(&self) -> MultiPoly {
        let used = self.used_indices();
        if used.len() == self.vars.len() {
            return self.clone();
        }
        let vars: Vec<Symbol> = used.iter().map(|&i| self.vars[i].clone()).collect();
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (used.iter().map(|&i| e[i]).collect(), c.clone()))
            .collect();
        MultiPoly {
            vars: Arc::new(vars),
            terms,
        }
    }

    /// Brings two polynomials onto a shared variable ordering: `a`'s
    /// variables first, then any extra variables of `b` in `b`'s order.
    pub fn unify(a: &MultiPoly, b: &MultiPoly) -> (MultiPoly, MultiPoly) {
        if Arc::ptr_eq(&a.vars, &b.vars) || a.vars == b.vars {
            return (a.clone(), b.with_vars(&a.vars));
        }
        let vars = Arc::new(merge_vars(&a.vars, &b.vars));
        (a.with_vars(&vars), b.with_vars(&vars))
    }

    fn shared_vars(&self) -> Arc<Vec<Symbol>> {
        self.vars.clone()
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly {
                vars: self.vars.clone(),
                terms: BTreeMap::new(),
            };
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut result = MultiPoly::one().with_vars(&self.vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn leading(&self) -> Option<(&Exponents, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rational {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero)
    }

    pub fn monic(&self) -> MultiPoly {
        match self.leading() {
            Some((_, c)) if !c.is_one() => self.scale(&c.recip()),
            _ => self.clone(),
        }
    }

    pub fn degree_at(&self, idx: usize) -> u32 {
        self.terms.keys().map(|e| e[idx]).max().unwrap_or(0)
    }

    pub fn degree_in(&self, sym: &Symbol) -> u32 {
        self.index_of(sym).map_or(0, |i| self.degree_at(i))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Coefficients with respect to variable `idx`, indexed by degree. The
    /// coefficients keep the full variable ordering (with zero exponent at
    /// `idx`).
    pub fn coeffs_at(&self, idx: usize) -> Vec<MultiPoly> {
        let deg = self.degree_at(idx) as usize;
        let mut out: Vec<BTreeMap<Exponents, Rational>> = vec![BTreeMap::new(); deg + 1];
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne[idx] as usize;
            ne[idx] = 0;
            out[k].insert(ne, c.clone());
        }
        out.into_iter()
            .map(|terms| MultiPoly {
                vars: self.vars.clone(),
                terms,
            })
            .collect()
    }

    pub fn coeffs_in(&self, sym: &Symbol) -> Vec<MultiPoly> {
        match self.index_of(sym) {
            Some(i) => self.coeffs_at(i),
            None => vec![self.clone()],
        }
    }

    /// Inverse of [`coeffs_at`](Self::coeffs_at); all coefficients must share
    /// `vars`.
    pub fn from_coeffs_at(vars: &Arc<Vec<Symbol>>, idx: usize, coeffs: &[MultiPoly]) -> MultiPoly {
        let mut terms = BTreeMap::new();
        for (k, c) in coeffs.iter().enumerate() {
            let c = c.with_vars(vars);
            for (e, v) in c.terms {
                let mut ne = e;
                ne[idx] += k as u32;
                terms.insert(ne, v);
            }
        }
        MultiPoly {
            vars: vars.clone(),
            terms,
        }
    }

    fn mul_term(&self, e: &[u32], c: &Rational) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.iter().zip(e).map(|(a, b)| a + b).collect(), v * c))
                .collect(),
        }
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a
    /// remainder.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Option<MultiPoly> {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let (a, b) = MultiPoly::unify(self, divisor);
        if let Some(c) = b.constant_value() {
            return Some(a.scale(&c.recip()));
        }
        let (lt_e, lt_c) = {
            let (e, c) = b.leading().unwrap();
            (e.clone(), c.clone())
        };
        let mut rem = a.clone();
        let mut quot: BTreeMap<Exponents, Rational> = BTreeMap::new();
        while let Some((e, c)) = rem.leading() {
            if !e.iter().zip(&lt_e).all(|(x, y)| x >= y) {
                return None;
            }
            let qe: Exponents = e.iter().zip(&lt_e).map(|(x, y)| x - y).collect();
            let qc = c / &lt_c;
            rem = &rem - &b.mul_term(&qe, &qc);
            quot.insert(qe, qc);
        }
        Some(MultiPoly {
            vars: a.vars.clone(),
            terms: quot,
        })
    }

    pub fn derivative(&self, sym: &Symbol) -> MultiPoly {
        let Some(i) = self.index_of(sym) else {
            return MultiPoly::zero().with_vars(&self.vars);
        };
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut ne = e.clone();
                ne[i] -= 1;
                terms.insert(ne, c * rational::int(e[i] as i64));
            }
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms,
        }
    }

    /// Replaces `sym` by `value` (composition).
    pub fn substitute(&self, sym: &Symbol, value: &MultiPoly) -> MultiPoly {
        let Some(i) = self.index_of(sym) else {
            return self.clone();
        };
        if !self.terms.keys().any(|e| e[i] > 0) {
            return self.clone();
        }
        let coeffs = self.coeffs_at(i);
        // Horner in `sym`
        let mut acc = MultiPoly::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * value) + c;
        }
        acc.trimmed_var(sym)
    }

    fn trimmed_var(&self, sym: &Symbol) -> MultiPoly {
        match self.index_of(sym) {
            Some(i) if self.terms.keys().all(|e| e[i] == 0) => {
                let mut vars: Vec<Symbol> = (*self.vars).clone();
                vars.remove(i);
                let terms = self
                    .terms
                    .iter()
                    .map(|(e, c)| {
                        let mut ne = e.clone();
                        ne.remove(i);
                        (ne, c.clone())
                    })
                    .collect();
                MultiPoly {
                    vars: Arc::new(vars),
                    terms,
                }
            }
            _ => self.clone(),
        }
    }

    /// Evaluates with `lookup` supplying a value for every occurring variable.
    pub fn eval_with<F>(&self, mut lookup: F) -> Option<f64>
    where
        F: FnMut(&Symbol) -> Option<f64>,
    {
        let values: Vec<Option<f64>> = self.vars.iter().map(&mut lookup).collect();
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut term = rational::to_f64(c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term *= values[i]?.powi(k as i32);
                }
            }
            acc += term;
        }
        Some(acc)
    }

    pub fn eval_map(&self, values: &HashMap<Symbol, f64>) -> Option<f64> {
        self.eval_with(|s| values.get(s).copied())
    }

    /// Exact evaluation at rational points for the variables in `values`;
    /// other variables stay symbolic.
    pub fn eval_partial(&self, values: &HashMap<Symbol, Rational>) -> MultiPoly {
        let mut out = self.clone();
        for (s, v) in values {
            out = out.substitute(s, &MultiPoly::constant(v.clone()));
        }
        out
    }

    /// Splits terms by the exponents of `keys`; each part is the coefficient
    /// polynomial in the remaining variables.
    pub fn collect_by(&self, keys: &[Symbol]) -> BTreeMap<Vec<u32>, MultiPoly> {
        let idx: Vec<Option<usize>> = keys.iter().map(|k| self.index_of(k)).collect();
        let mut parts: BTreeMap<Vec<u32>, BTreeMap<Exponents, Rational>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let key: Vec<u32> = idx.iter().map(|i| i.map_or(0, |i| e[i])).collect();
            let mut ne = e.clone();
            for i in idx.iter().flatten() {
                ne[*i] = 0;
            }
            parts.entry(key).or_default().insert(ne, c.clone());
        }
        parts
            .into_iter()
            .map(|(k, terms)| {
                let p = MultiPoly {
                    vars: self.vars.clone(),
                    terms,
                };
                let mut p = p;
                for s in keys {
                    p = p.trimmed_var(s);
                }
                (k, p)
            })
            .collect()
    }

    /// Least common multiple of coefficient denominators times the sign of
    /// the leading coefficient; multiplying by it gives integer coefficients.
    pub fn integer_normalizer(&self) -> Rational {
        use num::Integer;
        let mut l = num::BigInt::one();
        for c in self.terms.values() {
            l = l.lcm(c.denom());
        }
        let sign = if self.leading_coeff().is_negative() { -1 } else { 1 };
        Rational::from_integer(l) * rational::int(sign)
    }
}

pub(crate) fn merge_vars(a: &[Symbol], b: &[Symbol]) -> Vec<Symbol> {
    let seen: BTreeSet<&Symbol> = a.iter().collect();
    let mut out = a.to_vec();
    for v in b {
        if !seen.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = MultiPoly::unify(self, other);
        a.terms == b.terms
    }
}

impl Eq for MultiPoly {}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let (mut a, b) = MultiPoly::unify(self, rhs);
        for (e, c) in b.terms {
            match a.terms.get_mut(&e) {
                Some(v) => {
                    *v += c;
                    if v.is_zero() {
                        a.terms.remove(&e);
                    }
                }
                None => {
                    a.terms.insert(e, c);
                }
            }
        }
        a
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        if self.is_zero() || rhs.is_zero() {
            return MultiPoly::zero().with_vars(&merge_arc(self, rhs));
        }
        let (a, b) = MultiPoly::unify(self, rhs);
        let mut terms: BTreeMap<Exponents, Rational> = BTreeMap::new();
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let c = ca * cb;
                match terms.get_mut(&e) {
                    Some(v) => *v += c,
                    None => {
                        terms.insert(e, c);
                    }
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        MultiPoly {
            vars: a.shared_vars(),
            terms,
        }
    }
}

fn merge_arc(a: &MultiPoly, b: &MultiPoly) -> Arc<Vec<Symbol>> {
    if a.vars == b.vars {
        a.vars.clone()
    } else {
        Arc::new(merge_vars(&a.vars, &b.vars))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        self.vars[i].to_string()
                    } else {
                        format!("{}^{}", self.vars[i], k)
                    }
                })
                .collect();
            let neg = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if mono.is_empty() {
                f.write_str(&rational::format(&mag))?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", rational::format(&mag))?;
                }
                f.write_str(&mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> MultiPoly {
        MultiPoly::var(&Symbol::new("x"))
    }
    fn y() -> MultiPoly {
        MultiPoly::var(&Symbol::new("y"))
    }

    #[test]
    fn difference_of_squares() {
        let p = &(&x() + &y()) * &(&x() - &y());
        let expected = &x().pow(2) - &y().pow(2);
        assert_eq!(p, expected);
    }

    #[test]
    fn annihilator() {
        let p = &x().pow(3) + &y();
        assert!((&p * &MultiPoly::zero()).is_zero());
    }

    #[test]
    fn product_expansion() {
        // (x^2 + y)(x^3 + 2xy) = x^5 + 3x^3y + 2xy^2
        let a = &x().pow(2) + &y();
        let b = &x().pow(3) + &(&x() * &y()).scale(&rational::int(2));
        let expected = &(&x().pow(5) + &(&x().pow(3) * &y()).scale(&rational::int(3)))
            + &(&x() * &y().pow(2)).scale(&rational::int(2));
        assert_eq!(&a * &b, expected);
        assert_eq!((&a * &b).to_string(), "x^5 + 3*x^3*y + 2*x*y^2");
    }

    #[test]
    fn exact_division() {
        let a = &x().pow(2) - &MultiPoly::one();
        let b = &x() - &MultiPoly::one();
        assert_eq!(a.div_exact(&b), Some(&x() + &MultiPoly::one()));
        assert_eq!(b.div_exact(&a), None);
        assert_eq!((&x() + &y()).div_exact(&x()), None);
    }

    #[test]
    fn substitution_composes() {
        let p = &x().pow(2) + &y();
        let q = p.substitute(&Symbol::new("x"), &(&y() + &MultiPoly::one()));
        let expected = &(&y().pow(2) + &y().scale(&rational::int(3))) + &MultiPoly::one();
        assert_eq!(q, expected);
        assert!(!q.contains_var(&Symbol::new("x")));
    }

    #[test]
    fn coefficient_views_roundtrip() {
        let p = &(&x().pow(2) * &y()) + &(&x() + &y().pow(3));
        let vars = Arc::new(p.vars().to_vec());
        let coeffs = p.coeffs_at(0);
        assert_eq!(coeffs.len(), 3);
        assert_eq!(MultiPoly::from_coeffs_at(&vars, 0, &coeffs), p);
    }

    #[test]
    fn equality_ignores_var_order() {
        let a = &x() + &y();
        let b = &y() + &x();
        assert_eq!(a, b);
        assert_ne!(a.vars(), b.vars());
    }
}
