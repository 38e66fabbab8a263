//! Conversions between [`Expr`] and [`RatFunc`], and coefficient collection.
//!
//! Subtrees that are not rational in symbols (function applications,
//! symbolic exponents) become opaque atoms. A rational power `b^(k/L)` is
//! written through the atom `a = b^(1/L)`, with `a^L` folded back to `b`.

use std::collections::{BTreeMap, HashMap};

use num::integer::Integer;
use num::BigInt;

use super::expr::{Expr, Node};
use super::poly::MultiPoly;
use super::ratfunc::RatFunc;
use super::rational::{self, Rational};
use super::symbol::Symbol;
use crate::error::KernelError;

/// Opaque atoms introduced while converting an expression.
#[derive(Clone, Debug, Default)]
pub struct Atoms {
    by_expr: BTreeMap<Expr, Symbol>,
    by_sym: BTreeMap<Symbol, Expr>,
    root_index: HashMap<Expr, i64>,
}

impl Atoms {
    pub fn is_empty(&self) -> bool {
        self.by_sym.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.by_sym.keys()
    }

    pub fn get(&self, s: &Symbol) -> Option<&Expr> {
        self.by_sym.get(s)
    }

    fn intern(&mut self, e: Expr) -> Symbol {
        if let Some(s) = self.by_expr.get(&e) {
            return s.clone();
        }
        let s = Symbol::new(&format!("#{}", self.by_sym.len()));
        self.by_expr.insert(e.clone(), s.clone());
        self.by_sym.insert(s.clone(), e);
        s
    }

    fn scan_roots(&mut self, e: &Expr) {
        if let Node::Pow(b, ex) = e.node() {
            if let Some(r) = ex.as_rational() {
                if !rational::is_integer(r) {
                    let q = rational::as_i64(&Rational::from_integer(r.denom().clone())).unwrap_or(2);
                    let entry = self.root_index.entry(b.clone()).or_insert(1);
                    *entry = entry.lcm(&q);
                }
            }
        }
        for c in e.children() {
            self.scan_roots(&c);
        }
    }
}

/// Converts `e` to a rational function, atomizing non-rational subtrees.
pub fn to_ratfunc(e: &Expr) -> Result<(RatFunc, Atoms), KernelError> {
    let mut atoms = Atoms::default();
    atoms.scan_roots(e);
    let r = convert(e, &mut atoms)?;
    Ok((r, atoms))
}

/// Converts `e` to a rational function in its symbols; fails on any
/// non-rational subtree.
pub fn to_ratfunc_exact(e: &Expr) -> Result<RatFunc, KernelError> {
    let (r, atoms) = to_ratfunc(e)?;
    if !atoms.is_empty() {
        return Err(KernelError::Collection(format!(
            "`{}` is not a rational function of its symbols",
            e
        )));
    }
    Ok(r)
}

fn convert(e: &Expr, atoms: &mut Atoms) -> Result<RatFunc, KernelError> {
    match e.node() {
        Node::Num(r) => Ok(RatFunc::constant(r.clone())),
        Node::Sym(s) => Ok(RatFunc::var(s)),
        Node::Add(ts) => {
            let mut acc = RatFunc::zero();
            for t in ts {
                acc = &acc + &convert(t, atoms)?;
            }
            Ok(acc)
        }
        Node::Mul(fs) => {
            let mut acc = RatFunc::one();
            for f in fs {
                acc = &acc * &convert(f, atoms)?;
            }
            Ok(acc)
        }
        Node::Pow(b, ex) => match ex.as_rational() {
            Some(r) if rational::is_integer(r) => {
                let k = rational::as_i64(r).ok_or_else(|| overflow(e))?;
                convert(b, atoms)?.pow(i32::try_from(k).map_err(|_| overflow(e))?)
            }
            Some(r) => {
                let l = *atoms.root_index.get(b).unwrap_or(&1);
                let k: BigInt = r.numer() * BigInt::from(l) / r.denom();
                let k = i64::try_from(k).map_err(|_| overflow(e))?;
                let (quot, rem) = k.div_mod_floor(&l);
                let root = Expr::pow(b, &Expr::frac(1, l));
                let a = RatFunc::var(&atoms.intern(root));
                let base = convert(b, atoms)?.pow(i32::try_from(quot).map_err(|_| overflow(e))?)?;
                Ok(&base * &a.pow(rem as i32)?)
            }
            None => Ok(RatFunc::var(&atoms.intern(e.clone()))),
        },
        Node::Apply(..) => Ok(RatFunc::var(&atoms.intern(e.clone()))),
    }
}

fn overflow(e: &Expr) -> KernelError {
    KernelError::Collection(format!("exponent too large in `{}`", e))
}

pub fn poly_to_expr(p: &MultiPoly) -> Expr {
    let vars = p.vars();
    Expr::add_all(p.terms().map(|(ex, c)| {
        let mut fs = vec![Expr::num(c.clone())];
        for (v, &k) in vars.iter().zip(ex.iter()) {
            if k > 0 {
                fs.push(Expr::symbol(v).powi(k as i64));
            }
        }
        Expr::mul_all(fs)
    }))
}

pub fn ratfunc_to_expr(r: &RatFunc) -> Expr {
    let n = poly_to_expr(r.num());
    if r.den().is_one() {
        n
    } else {
        n * poly_to_expr(r.den()).recip()
    }
}

/// Like [`ratfunc_to_expr`] but maps atoms back to their subtrees.
pub fn ratfunc_to_expr_with(r: &RatFunc, atoms: &Atoms) -> Expr {
    let e = ratfunc_to_expr(r);
    if atoms.is_empty() {
        return e;
    }
    super::calculus::substitute(&e, &atoms.by_sym)
}

/// Rational-function normal form of `e` printed back as an expression.
pub fn normalize(e: &Expr) -> Result<Expr, KernelError> {
    let (r, atoms) = to_ratfunc(e)?;
    Ok(ratfunc_to_expr_with(&r, &atoms))
}

/// Exact zero test through the rational normal form (atoms opaque).
pub fn is_zero_rational(e: &Expr) -> Result<bool, KernelError> {
    Ok(to_ratfunc(e)?.0.is_zero())
}

pub fn equal_rational(a: &Expr, b: &Expr) -> Result<bool, KernelError> {
    is_zero_rational(&(a - b))
}

/// Laurent monomial in the basis symbols.
pub type Monomial = Vec<i32>;

/// Splits `e` into `monomial -> coefficient` over the basis symbols. The
/// coefficients are free of the basis. Denominators may contain the basis
/// only through a monomial factor, giving negative exponents.
pub fn collect(e: &Expr, basis: &[Symbol]) -> Result<BTreeMap<Monomial, RatFunc>, KernelError> {
    let (r, atoms) = to_ratfunc(e)?;
    if let Some(s) = atoms.symbols().next() {
        let sub = atoms.get(s).unwrap();
        if basis.iter().any(|b| sub.contains(b)) {
            return Err(KernelError::Collection(format!(
                "non-polynomial dependence on the basis through `{}`",
                sub
            )));
        }
        return Err(KernelError::Collection(format!(
            "coefficient is not rational: `{}`",
            sub
        )));
    }
    collect_ratfunc(&r, basis)
}

pub fn collect_ratfunc(
    r: &RatFunc,
    basis: &[Symbol],
) -> Result<BTreeMap<Monomial, RatFunc>, KernelError> {
    let den = r.den();
    let mut shift: Vec<i32> = Vec::with_capacity(basis.len());
    let mut reduced_den = den.clone();
    for b in basis {
        let m = match den.index_of(b) {
            Some(i) => den.terms().map(|(ex, _)| ex[i]).min().unwrap_or(0),
            None => 0,
        };
        if m > 0 {
            let mono = MultiPoly::var(b).pow(m);
            reduced_den = reduced_den
                .div_exact(&mono)
                .expect("monomial content divides the denominator");
        }
        shift.push(m as i32);
    }
    if basis.iter().any(|b| reduced_den.contains_var(b)) {
        return Err(KernelError::Collection(format!(
            "denominator `{}` depends on the basis",
            den
        )));
    }
    let mut out = BTreeMap::new();
    for (key, coeff) in r.num().collect_by(basis) {
        let mono: Monomial = key.iter().zip(&shift).map(|(&k, &s)| k as i32 - s).collect();
        let c = RatFunc::new(coeff, reduced_den.clone())?;
        if !c.is_zero() {
            out.insert(mono, c);
        }
    }
    Ok(out)
}

/// Inverse of [`collect`].
pub fn reconstruct(parts: &BTreeMap<Monomial, RatFunc>, basis: &[Symbol]) -> Expr {
    Expr::add_all(parts.iter().map(|(mono, c)| {
        let mut fs = vec![ratfunc_to_expr(c)];
        for (b, &k) in basis.iter().zip(mono) {
            fs.push(Expr::symbol(b).powi(k as i64));
        }
        Expr::mul_all(fs)
    }))
}
