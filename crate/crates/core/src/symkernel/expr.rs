//! Immutable expression trees in canonical form.
//!
//! Every constructor canonicalizes:
//! - sums and products are flattened, like terms / like bases are merged and
//!   children are sorted (constants < symbols < compounds);
//! - rational constants are folded;
//! - integer powers of products are distributed.
//!
//! Radicals come in two flavours. `Pow(u, 1/2)` (see [`Expr::sqrt_real`])
//! asserts `u >= 0` on the working domain and folds freely with other powers
//! of `u`. `sqrt(u)` (see [`Expr::sqrt`]) makes no such assertion and is never
//! folded. Full expansion is a separate step, [`Expr::expand`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num::traits::{One, Signed, Zero};

use super::rational::{self, Rational};
use super::symbol::Symbol;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Abs,
    Sin,
    Cos,
    Arctan,
    Exp,
    Ln,
    Hyp2f1,
    /// Uninterpreted function; not differentiable.
    Other(Symbol),
}

impl Func {
    pub fn name(&self) -> &str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Arctan => "arctan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Hyp2f1 => "hyp2f1",
            Func::Other(s) => s.name(),
        }
    }

    pub fn from_name(name: &str) -> Func {
        match name {
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "arctan" | "atan" => Func::Arctan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "hyp2f1" | "hypergeom" => Func::Hyp2f1,
            other => Func::Other(Symbol::new(other)),
        }
    }

    pub fn arity(&self) -> Option<usize> {
        match self {
            Func::Hyp2f1 => Some(4),
            Func::Other(_) => None,
            _ => Some(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Num(Rational),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Expr),
    Apply(Func, Vec<Expr>),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Expr(Arc<Node>);

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl Expr {
    fn raw(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(r: Rational) -> Expr {
        Expr::raw(Node::Num(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(rational::int(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::num(rational::frac(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::raw(Node::Sym(Symbol::new(name)))
    }

    pub fn symbol(s: &Symbol) -> Expr {
        Expr::raw(Node::Sym(s.clone()))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self.node() {
            Node::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_one())
    }

    fn kind_rank(&self) -> u8 {
        match self.node() {
            Node::Num(_) => 0,
            Node::Sym(_) => 1,
            Node::Add(_) => 2,
            Node::Mul(_) => 3,
            Node::Pow(..) => 4,
            Node::Apply(..) => 5,
        }
    }

    // ---- canonical constructors -------------------------------------------

    pub fn add_all<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = Rational::zero();
        let mut like: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut stack: Vec<Expr> = terms.into_iter().collect();
        while let Some(t) = stack.pop() {
            match t.node() {
                Node::Num(c) => constant += c,
                Node::Add(ts) => stack.extend(ts.iter().cloned()),
                _ => {
                    let (c, rest) = t.split_coeff();
                    *like.entry(rest).or_insert_with(Rational::zero) += c;
                }
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(like.len() + 1);
        if !constant.is_zero() {
            out.push(Expr::num(constant));
        }
        for (rest, c) in like {
            if !c.is_zero() {
                out.push(Expr::with_coeff(c, rest));
            }
        }
        out.sort();
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::raw(Node::Add(out)),
        }
    }

    /// `(coefficient, rest)` with `self = coefficient * rest`.
    pub fn split_coeff(&self) -> (Rational, Expr) {
        match self.node() {
            Node::Num(c) => (c.clone(), Expr::one()),
            Node::Mul(fs) => match fs[0].node() {
                Node::Num(c) => {
                    let rest = if fs.len() == 2 {
                        fs[1].clone()
                    } else {
                        Expr::raw(Node::Mul(fs[1..].to_vec()))
                    };
                    (c.clone(), rest)
                }
                _ => (Rational::one(), self.clone()),
            },
            _ => (Rational::one(), self.clone()),
        }
    }

    fn with_coeff(c: Rational, rest: Expr) -> Expr {
        if c.is_one() {
            return rest;
        }
        if rest.is_one() {
            return Expr::num(c);
        }
        match rest.node() {
            Node::Mul(fs) => {
                let mut v = Vec::with_capacity(fs.len() + 1);
                v.push(Expr::num(c));
                v.extend(fs.iter().cloned());
                Expr::raw(Node::Mul(v))
            }
            _ => Expr::raw(Node::Mul(vec![Expr::num(c), rest])),
        }
    }

    pub fn mul_all<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut pending: Vec<Expr> = factors.into_iter().collect();
        // Base merging can surface new products (e.g. (xy)^(1/2) squared);
        // iterate until nothing changes.
        for _ in 0..8 {
            let mut coeff = Rational::one();
            let mut bases: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
            let mut stack = std::mem::take(&mut pending);
            while let Some(f) = stack.pop() {
                match f.node() {
                    Node::Num(c) => {
                        if c.is_zero() {
                            return Expr::zero();
                        }
                        coeff *= c;
                    }
                    Node::Mul(fs) => stack.extend(fs.iter().cloned()),
                    Node::Pow(b, e) => bases.entry(b.clone()).or_default().push(e.clone()),
                    _ => bases.entry(f.clone()).or_default().push(Expr::one()),
                }
            }
            let mut again = false;
            let mut out: Vec<Expr> = Vec::with_capacity(bases.len());
            for (base, exps) in bases {
                let exponent = if exps.len() == 1 {
                    exps.into_iter().next().unwrap()
                } else {
                    Expr::add_all(exps)
                };
                let p = Expr::pow(&base, &exponent);
                match p.node() {
                    Node::Num(c) => {
                        if c.is_zero() {
                            return Expr::zero();
                        }
                        coeff *= c;
                    }
                    Node::Mul(_) => {
                        again = true;
                        out.push(p);
                    }
                    _ => out.push(p),
                }
            }
            if again {
                out.push(Expr::num(coeff));
                pending = out;
                continue;
            }
            out.sort();
            if out.is_empty() {
                return Expr::num(coeff);
            }
            if !coeff.is_one() {
                out.insert(0, Expr::num(coeff));
            }
            return if out.len() == 1 {
                out.pop().unwrap()
            } else {
                Expr::raw(Node::Mul(out))
            };
        }
        unreachable!("product canonicalization did not converge")
    }

    pub fn pow(base: &Expr, exponent: &Expr) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base.clone();
        }
        if base.is_one() {
            return Expr::one();
        }
        if let (Node::Num(b), Node::Num(e)) = (base.node(), exponent.node()) {
            if let Some(v) = num_pow(b, e) {
                return Expr::num(v);
            }
            return Expr::raw(Node::Pow(base.clone(), exponent.clone()));
        }
        let int_exp = exponent.as_rational().filter(|r| rational::is_integer(r));
        match base.node() {
            Node::Pow(b2, e2) => {
                let odd_inner = e2
                    .as_rational()
                    .is_some_and(|r| r.numer().is_odd_int());
                if int_exp.is_some() || odd_inner {
                    return Expr::pow(b2, &Expr::mul_all([e2.clone(), exponent.clone()]));
                }
            }
            Node::Mul(fs) if int_exp.is_some() => {
                return Expr::mul_all(fs.iter().map(|f| Expr::pow(f, exponent)));
            }
            _ => {}
        }
        Expr::raw(Node::Pow(base.clone(), exponent.clone()))
    }

    pub fn powi(&self, k: i64) -> Expr {
        Expr::pow(self, &Expr::int(k))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    pub fn apply(func: Func, args: Vec<Expr>) -> Expr {
        if args.len() == 1 {
            if let Some(c) = args[0].as_rational() {
                match func {
                    Func::Sqrt if !c.is_negative() => {
                        if let Some(r) = rational::exact_root(c, 2) {
                            return Expr::num(r);
                        }
                    }
                    Func::Abs => return Expr::num(c.abs()),
                    Func::Sin | Func::Arctan if c.is_zero() => return Expr::zero(),
                    Func::Cos | Func::Exp if c.is_zero() => return Expr::one(),
                    Func::Ln if c.is_one() => return Expr::zero(),
                    _ => {}
                }
            }
        }
        if func == Func::Hyp2f1 && args.len() == 4 && args[3].is_zero() {
            return Expr::one();
        }
        Expr::raw(Node::Apply(func, args))
    }

    pub fn apply1(func: Func, arg: Expr) -> Expr {
        Expr::apply(func, vec![arg])
    }

    /// Unflagged square root: never folded with other powers.
    pub fn sqrt(arg: Expr) -> Expr {
        Expr::apply1(Func::Sqrt, arg)
    }

    /// Real-domain square root `arg^(1/2)`; asserts `arg >= 0`.
    pub fn sqrt_real(arg: Expr) -> Expr {
        Expr::pow(&arg, &Expr::frac(1, 2))
    }

    pub fn hyp2f1(a: Expr, b: Expr, c: Expr, z: Expr) -> Expr {
        Expr::apply(Func::Hyp2f1, vec![a, b, c, z])
    }

    // ---- structure -------------------------------------------------------

    pub fn children(&self) -> Vec<Expr> {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => Vec::new(),
            Node::Add(v) | Node::Mul(v) | Node::Apply(_, v) => v.clone(),
            Node::Pow(b, e) => vec![b.clone(), e.clone()],
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Num(_) => {}
            _ => {
                for c in self.children() {
                    c.collect_symbols(out);
                }
            }
        }
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        match self.node() {
            Node::Sym(s) => s == sym,
            Node::Num(_) => false,
            Node::Add(v) | Node::Mul(v) | Node::Apply(_, v) => v.iter().any(|c| c.contains(sym)),
            Node::Pow(b, e) => b.contains(sym) || e.contains(sym),
        }
    }

    /// Rebuilds the node from new children through the canonical
    /// constructors.
    pub fn rebuild(&self, children: Vec<Expr>) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => self.clone(),
            Node::Add(_) => Expr::add_all(children),
            Node::Mul(_) => Expr::mul_all(children),
            Node::Pow(..) => Expr::pow(&children[0], &children[1]),
            Node::Apply(f, _) => Expr::apply(f.clone(), children),
        }
    }

    /// Bottom-up rewrite.
    pub fn map_bottom_up<F>(&self, f: &mut F) -> Expr
    where
        F: FnMut(&Expr) -> Expr,
    {
        let rebuilt = match self.node() {
            Node::Num(_) | Node::Sym(_) => self.clone(),
            _ => {
                let kids: Vec<Expr> = self.children().iter().map(|c| c.map_bottom_up(f)).collect();
                self.rebuild(kids)
            }
        };
        f(&rebuilt)
    }

    /// Distributes products over sums and expands positive integer powers of
    /// sums. Negative powers are kept as denominators.
    pub fn expand(&self) -> Expr {
        let mut cur = self.clone();
        for _ in 0..6 {
            let next = cur.expand_once();
            if next == cur {
                return next;
            }
            cur = next;
        }
        cur
    }

    fn expand_once(&self) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => self.clone(),
            Node::Add(ts) => Expr::add_all(ts.iter().map(|t| t.expand_once())),
            Node::Mul(fs) => {
                let mut acc: Vec<Expr> = vec![Expr::one()];
                for f in fs {
                    let f = f.expand_once();
                    acc = distribute(&acc, &f);
                }
                Expr::add_all(acc)
            }
            Node::Pow(b, e) => {
                let b = b.expand_once();
                let e = e.expand_once();
                if let (Node::Add(_), Some(k)) = (b.node(), e.as_rational().and_then(rational::as_i64)) {
                    if k > 1 {
                        let mut acc: Vec<Expr> = vec![Expr::one()];
                        for _ in 0..k {
                            acc = distribute(&acc, &b);
                        }
                        return Expr::add_all(acc);
                    }
                }
                Expr::pow(&b, &e)
            }
            Node::Apply(f, args) => Expr::apply(f.clone(), args.iter().map(|a| a.expand_once()).collect()),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

fn distribute(acc: &[Expr], f: &Expr) -> Vec<Expr> {
    match f.node() {
        Node::Add(ts) => acc
            .iter()
            .flat_map(|a| ts.iter().map(move |t| Expr::mul_all([a.clone(), t.clone()])))
            .collect(),
        _ => acc.iter().map(|a| Expr::mul_all([a.clone(), f.clone()])).collect(),
    }
}

trait OddInt {
    fn is_odd_int(&self) -> bool;
}

impl OddInt for num::BigInt {
    fn is_odd_int(&self) -> bool {
        use num::Integer;
        self.is_odd()
    }
}

fn num_pow(b: &Rational, e: &Rational) -> Option<Rational> {
    if rational::is_integer(e) {
        let k = rational::as_i64(e)?;
        if k.unsigned_abs() > 4096 {
            return None;
        }
        if b.is_zero() {
            return if k > 0 { Some(Rational::zero()) } else { None };
        }
        let p = num::pow(b.clone(), k.unsigned_abs() as usize);
        return Some(if k < 0 { p.recip() } else { p });
    }
    let q = rational::as_i64(&Rational::from_integer(e.denom().clone()))?;
    let p = rational::as_i64(&Rational::from_integer(e.numer().clone()))?;
    if q > 64 || b.is_zero() {
        return None;
    }
    let root = rational::exact_root(b, q as u32)?;
    num_pow(&root, &rational::int(p))
}

// ---- ordering ----------------------------------------------------------------

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let r = self.kind_rank().cmp(&other.kind_rank());
        if r != Ordering::Equal {
            return r;
        }
        match (self.node(), other.node()) {
            (Node::Num(a), Node::Num(b)) => a.cmp(b),
            (Node::Sym(a), Node::Sym(b)) => a.cmp(b),
            (Node::Add(a), Node::Add(b)) | (Node::Mul(a), Node::Mul(b)) => a.cmp(b),
            (Node::Pow(b1, e1), Node::Pow(b2, e2)) => b1.cmp(b2).then_with(|| e1.cmp(e2)),
            (Node::Apply(f1, a1), Node::Apply(f2, a2)) => {
                f1.name().cmp(f2.name()).then_with(|| a1.cmp(a2))
            }
            _ => unreachable!("kind ranks matched"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// ---- operators ---------------------------------------------------------------

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add_all([self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::add_all([self, -rhs])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul_all([self, rhs])
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::mul_all([self, rhs.recip()])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul_all([Expr::int(-1), self])
    }
}

macro_rules! ref_ops {
    ($tr:ident, $m:ident) => {
        impl<'a> $tr<&'a Expr> for &'a Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                self.clone().$m(rhs.clone())
            }
        }
    };
}
ref_ops!(Add, add);
ref_ops!(Sub, sub);
ref_ops!(Mul, mul);
ref_ops!(Div, div);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

// ---- printing ----------------------------------------------------------------

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    /// Infix text accepted by the expression grammar.
    pub fn to_infix(&self) -> String {
        self.infix_prec().0
    }

    fn infix_prec(&self) -> (String, u8) {
        match self.node() {
            Node::Num(r) => {
                if r.is_negative() {
                    (rational::format(r), PREC_NEG)
                } else if rational::is_integer(r) {
                    (rational::format(r), PREC_ATOM)
                } else {
                    (rational::format(r), PREC_MUL)
                }
            }
            Node::Sym(s) => (s.to_string(), PREC_ATOM),
            Node::Add(ts) => {
                let mut out = String::new();
                for (i, t) in ts.iter().enumerate() {
                    let (c, rest) = t.split_coeff();
                    let neg = c.is_negative();
                    let mag = if neg { Expr::with_coeff(-c, rest) } else { t.clone() };
                    let (s, p) = mag.infix_prec();
                    let s = if p <= PREC_ADD { format!("({})", s) } else { s };
                    if i == 0 {
                        if neg {
                            out.push('-');
                            out.push_str(&wrap_if(&s, p, PREC_NEG));
                        } else {
                            out.push_str(&s);
                        }
                    } else {
                        out.push_str(if neg { " - " } else { " + " });
                        out.push_str(&s);
                    }
                }
                (out, PREC_ADD)
            }
            Node::Mul(fs) => {
                let (c, _) = self.split_coeff();
                let mut numer: Vec<String> = Vec::new();
                let mut denom: Vec<String> = Vec::new();
                if !c.is_one() && !(-c.clone()).is_one() {
                    numer.push(rational::format(&c.abs()));
                    if !rational::is_integer(&c) {
                        numer.pop();
                        if !c.numer().abs().is_one() {
                            numer.push(c.numer().abs().to_string());
                        }
                        denom.push(c.denom().to_string());
                    }
                }
                for f in fs.iter().filter(|f| f.as_rational().is_none()) {
                    if let Node::Pow(b, e) = f.node() {
                        if let Some(r) = e.as_rational() {
                            if r.is_negative() {
                                let inv = Expr::pow(b, &Expr::num(-r.clone()));
                                let (s, p) = inv.infix_prec();
                                denom.push(wrap_if(&s, p, PREC_POW));
                                continue;
                            }
                        }
                    }
                    let (s, p) = f.infix_prec();
                    numer.push(wrap_if(&s, p, PREC_MUL + 1));
                }
                let mut out = if numer.is_empty() { "1".to_string() } else { numer.join("*") };
                if !denom.is_empty() {
                    if denom.len() == 1 {
                        out = format!("{}/{}", out, denom[0]);
                    } else {
                        out = format!("{}/({})", out, denom.join("*"));
                    }
                }
                if c.is_negative() {
                    (format!("-{}", out), PREC_NEG)
                } else {
                    (out, PREC_MUL)
                }
            }
            Node::Pow(b, e) => {
                let (bs, bp) = b.infix_prec();
                let (es, ep) = e.infix_prec();
                let bs = wrap_if(&bs, bp, PREC_ATOM);
                let es = if ep >= PREC_ATOM { es } else { format!("({})", es) };
                (format!("{}^{}", bs, es), PREC_POW)
            }
            Node::Apply(f, args) => {
                let a: Vec<String> = args.iter().map(|a| a.to_infix()).collect();
                (format!("{}({})", f.name(), a.join(", ")), PREC_ATOM)
            }
        }
    }

    /// Deterministic S-expression, e.g. `(mul (sym q) (pow (sym x) 2))`.
    pub fn to_sexpr(&self) -> String {
        match self.node() {
            Node::Num(r) => rational::format(r),
            Node::Sym(s) => format!("(sym {})", s),
            Node::Add(v) => format!("(add {})", join_sexpr(v)),
            Node::Mul(v) => format!("(mul {})", join_sexpr(v)),
            Node::Pow(b, e) => format!("(pow {} {})", b.to_sexpr(), e.to_sexpr()),
            Node::Apply(Func::Other(name), args) => {
                if args.is_empty() {
                    format!("(fn {})", name)
                } else {
                    format!("(fn {} {})", name, join_sexpr(args))
                }
            }
            Node::Apply(f, args) => format!("({} {})", f.name(), join_sexpr(args)),
        }
    }
}

fn join_sexpr(v: &[Expr]) -> String {
    v.iter().map(|e| e.to_sexpr()).collect::<Vec<_>>().join(" ")
}

fn wrap_if(s: &str, p: u8, min: u8) -> String {
    if p < min {
        format!("({})", s)
    } else {
        s.to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_infix())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::sym("x")
    }
    fn y() -> Expr {
        Expr::sym("y")
    }

    #[test]
    fn folds_constants_and_like_terms() {
        let e = Expr::int(2) + x() + Expr::int(3) + x();
        assert_eq!(e.to_sexpr(), "(add 5 (mul 2 (sym x)))");
        assert!((x() - x()).is_zero());
    }

    #[test]
    fn merges_powers() {
        let e = x() * x().powi(2) * y();
        assert_eq!(e, x().powi(3) * y());
        assert_eq!((x() / x()), Expr::one());
    }

    #[test]
    fn canonical_order_constants_symbols_compounds() {
        let e = Expr::sqrt(y()) * x() * Expr::int(3);
        assert_eq!(e.to_sexpr(), "(mul 3 (sym x) (sqrt (sym y)))");
    }

    #[test]
    fn flagged_radicals_fold_unflagged_do_not() {
        let t = Expr::sym("t");
        let r = Expr::sqrt_real(t.clone());
        assert_eq!(&r * &r, t);
        let s = Expr::sqrt(t.clone());
        assert_ne!(&s * &s, t);
        assert_eq!((&s * &s).to_sexpr(), "(pow (sqrt (sym t)) 2)");
    }

    #[test]
    fn integer_powers_distribute() {
        let e = (x() * y()).powi(2);
        assert_eq!(e, x().powi(2) * y().powi(2));
        // fractional powers of products are left alone
        let h = Expr::pow(&(x() * y()), &Expr::frac(1, 2));
        assert!(matches!(h.node(), Node::Pow(..)));
    }

    #[test]
    fn expansion() {
        let e = ((x() + y()) * (x() - y())).expand();
        assert_eq!(e, x().powi(2) - y().powi(2));
        let sq = (x() + Expr::one()).powi(2).expand();
        assert_eq!(sq, x().powi(2) + Expr::int(2) * x() + Expr::one());
    }

    #[test]
    fn numeric_powers() {
        assert_eq!(Expr::pow(&Expr::int(4), &Expr::frac(1, 2)), Expr::int(2));
        assert_eq!(Expr::pow(&Expr::int(2), &Expr::int(-2)), Expr::frac(1, 4));
        let irr = Expr::pow(&Expr::int(2), &Expr::frac(1, 2));
        assert_eq!(&irr * &irr, Expr::int(2));
    }

    #[test]
    fn infix_printing() {
        let e = Expr::sym("q") * x().powi(2);
        assert_eq!(e.to_infix(), "q*x^2");
        let f = Expr::frac(-3, 4) * x() / y();
        assert_eq!(f.to_infix(), "-3*x/(4*y)");
        let g = x() - Expr::int(1);
        assert_eq!(g.to_infix(), "-1 + x");
    }
}
