//! Similarity reduction of a PDE in `u(x, t)` to an ODE in `U(xi)`.
//!
//! PDE left-hand sides are expressions in jet symbols: `u`, `u_x`, `u_t`,
//! `u_xx`, `u_xt`, ... (independent letters in declaration order). Reduced
//! ODEs use the jet symbols `U`, `U'`, `U''`, ...

use std::collections::BTreeMap;

use num::traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symkernel::convert::to_ratfunc_exact;
use crate::symkernel::rational::{self, Rational};
use crate::symkernel::{diff, substitute, Expr, Node, Symbol};

#[derive(Clone, Debug, PartialEq)]
pub struct PdeSpec {
    pub unknown: Symbol,
    pub independents: Vec<Symbol>,
    pub parameters: Vec<Symbol>,
    /// Convention: `lhs = 0`.
    pub lhs: Expr,
}

impl PdeSpec {
    pub fn new(lhs: Expr) -> PdeSpec {
        let unknown = Symbol::new("u");
        let independents = vec![Symbol::new("x"), Symbol::new("t")];
        let mut parameters = Vec::new();
        for s in lhs.free_symbols() {
            if parse_jet(&s, &unknown, &independents).is_none() && !independents.contains(&s) {
                parameters.push(s);
            }
        }
        PdeSpec { unknown, independents, parameters, lhs }
    }

    pub fn jet(&self, counts: &[u32]) -> Symbol {
        jet_symbol(&self.unknown, counts, &self.independents)
    }

    /// Highest total derivative order present in `lhs`.
    pub fn order(&self) -> u32 {
        self.lhs
            .free_symbols()
            .iter()
            .filter_map(|s| parse_jet(s, &self.unknown, &self.independents))
            .map(|c| c.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Total derivative of `e` with respect to independent number `k`.
    pub fn total_derivative(&self, e: &Expr, k: usize) -> Result<Expr> {
        let v = &self.independents[k];
        let mut parts = vec![diff(e, v)?];
        for s in e.free_symbols() {
            if let Some(mut c) = parse_jet(&s, &self.unknown, &self.independents) {
                c[k] += 1;
                parts.push(diff(e, &s)? * Expr::symbol(&self.jet(&c)));
            }
        }
        Ok(Expr::add_all(parts).expand())
    }
}

pub fn jet_symbol(u: &Symbol, counts: &[u32], independents: &[Symbol]) -> Symbol {
    if counts.iter().all(|&c| c == 0) {
        return u.clone();
    }
    let mut name = format!("{}_", u);
    for (v, &c) in independents.iter().zip(counts) {
        for _ in 0..c {
            name.push_str(v.name());
        }
    }
    Symbol::new(&name)
}

/// Derivative counts of a jet symbol, or `None` if `s` is not a jet of `u`.
pub fn parse_jet(s: &Symbol, u: &Symbol, independents: &[Symbol]) -> Option<Vec<u32>> {
    let mut counts = vec![0u32; independents.len()];
    if s == u {
        return Some(counts);
    }
    let rest = s.name().strip_prefix(u.name())?.strip_prefix('_')?;
    if rest.is_empty() {
        return None;
    }
    let mut i = 0;
    let bytes = rest.as_bytes();
    while i < bytes.len() {
        let k = independents
            .iter()
            .position(|v| rest[i..].starts_with(v.name()) && !v.name().is_empty())?;
        counts[k] += 1;
        i += independents[k].name().len();
    }
    Some(counts)
}

pub fn ode_jet(u: &Symbol, k: u32) -> Symbol {
    Symbol::new(&format!("{}{}", u, "'".repeat(k as usize)))
}

pub fn ode_jet_order(s: &Symbol, u: &Symbol) -> Option<u32> {
    let rest = s.name().strip_prefix(u.name())?;
    if rest.chars().all(|c| c == '\'') {
        Some(rest.len() as u32)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityTransform {
    pub variable: Symbol,
    /// `xi` as an expression in the independents.
    pub definition: Expr,
}

impl SimilarityTransform {
    pub fn new(variable: &str, definition: Expr) -> Self {
        SimilarityTransform { variable: Symbol::new(variable), definition }
    }

    /// `eta = t/x^2`.
    pub fn eta() -> Self {
        Self::new("eta", Expr::sym("t") * Expr::sym("x").powi(-2))
    }

    /// `zeta = x/sqrt(t)`, with `t > 0` asserted by the flagged radical.
    pub fn zeta() -> Self {
        Self::new("zeta", Expr::sym("x") * Expr::pow(&Expr::sym("t"), &Expr::frac(-1, 2)))
    }
}

/// Chain-rule table of a transform.
#[derive(Clone, Debug)]
pub struct JetRules {
    /// `xi_x`, `xi_t`, `xi_xx`, ... keyed by derivative counts.
    pub xi_derivatives: BTreeMap<Vec<u32>, Expr>,
    /// PDE jet symbol -> expression in ODE jets and the independents.
    pub rules: BTreeMap<Symbol, Expr>,
}

fn multi_indices(dim: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; dim]];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for c in &out {
            for k in 0..dim {
                let mut d = c.clone();
                d[k] += 1;
                if !out.contains(&d) && !next.contains(&d) {
                    next.push(d);
                }
            }
        }
        out.extend(next);
    }
    out.sort_by_key(|c| (c.iter().sum::<u32>(), std::cmp::Reverse(c.clone())));
    out
}

/// Chain-rule rewrite table up to `max_order` for `u(x, t) = U(xi(x, t))`.
pub fn jet_rules(pde: &PdeSpec, tf: &SimilarityTransform, max_order: u32) -> Result<JetRules> {
    let big_u = Symbol::new("U");
    let indep = &pde.independents;
    let mut xi_derivatives = BTreeMap::new();
    let mut rules = BTreeMap::new();
    for c in multi_indices(indep.len(), max_order) {
        let mut xi = tf.definition.clone();
        let mut e = Expr::symbol(&big_u);
        for (k, &count) in c.iter().enumerate() {
            for _ in 0..count {
                xi = diff(&xi, &indep[k])?;
                e = chain_derivative(&e, &big_u, &tf.definition, &indep[k])?;
            }
        }
        if c.iter().any(|&k| k > 0) {
            xi_derivatives.insert(c.clone(), xi);
        }
        rules.insert(pde.jet(&c), e);
    }
    Ok(JetRules { xi_derivatives, rules })
}

fn chain_derivative(e: &Expr, u: &Symbol, xi: &Expr, v: &Symbol) -> Result<Expr> {
    let xi_v = diff(xi, v)?;
    let mut parts = vec![diff(e, v)?];
    for s in e.free_symbols() {
        if let Some(k) = ode_jet_order(&s, u) {
            parts.push(diff(e, &s)? * Expr::symbol(&ode_jet(u, k + 1)) * xi_v.clone());
        }
    }
    Ok(Expr::add_all(parts).expand())
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeSpec {
    pub unknown: Symbol,
    pub variable: Symbol,
    /// Reduced left-hand side in the ODE jets with coefficients in `(x, t)`.
    pub lhs: Expr,
    /// `lhs` with one independent eliminated in favour of `variable`.
    pub reduced: Expr,
    /// The independent that survives in `reduced`, if any was eliminated.
    pub kept: Option<Symbol>,
    /// Highest derivative order of `U`.
    pub m: u32,
    pub parameters: Vec<Symbol>,
}

impl OdeSpec {
    /// An ODE given directly in `U, U', U''` and `variable`.
    pub fn direct(variable: &str, lhs: Expr, parameters: &[&str]) -> OdeSpec {
        let u = Symbol::new("U");
        let m = lhs.free_symbols().iter().filter_map(|s| ode_jet_order(s, &u)).max().unwrap_or(0);
        OdeSpec {
            unknown: u,
            variable: Symbol::new(variable),
            lhs: lhs.clone(),
            reduced: lhs,
            kept: None,
            m,
            parameters: parameters.iter().map(|p| Symbol::new(p)).collect(),
        }
    }

    pub fn jet(&self, k: u32) -> Symbol {
        ode_jet(&self.unknown, k)
    }
}

pub fn reduce_pde(pde: &PdeSpec, tf: &SimilarityTransform) -> Result<OdeSpec> {
    let order = pde.order();
    let table = jet_rules(pde, tf, order)?;
    let lhs = substitute(&pde.lhs, &table.rules).expand();
    let big_u = Symbol::new("U");
    let m = lhs.free_symbols().iter().filter_map(|s| ode_jet_order(s, &big_u)).max().unwrap_or(0);
    if m > order || m > 2 && order <= 2 {
        return Err(Error::Reduction(format!(
            "reduced ODE has order {} for a PDE of order {}",
            m, order
        )));
    }
    let (reduced, kept) = match invert(tf, &pde.independents) {
        Some((elim, value, kept)) => {
            let mut b = BTreeMap::new();
            b.insert(elim, value);
            (substitute(&lhs, &b).expand(), Some(kept))
        }
        None => (lhs.clone(), None),
    };
    Ok(OdeSpec {
        unknown: big_u,
        variable: tf.variable.clone(),
        lhs,
        reduced,
        kept,
        m,
        parameters: pde.parameters.clone(),
    })
}

/// `(eliminated, its value in terms of xi and kept, kept)`.
fn invert(tf: &SimilarityTransform, indep: &[Symbol]) -> Option<(Symbol, Expr, Symbol)> {
    if indep.len() != 2 {
        return None;
    }
    let xi = Expr::symbol(&tf.variable);
    let (x, t) = (&indep[0], &indep[1]);
    if let Some((c, a, b)) = monomial_exponents(&tf.definition, x, t) {
        let one = rational::int(1);
        let use_t = if b.abs() == one {
            true
        } else if a.abs() == one {
            false
        } else {
            b != Rational::zero()
        };
        let (elim, kept, e_elim, e_kept) = if use_t { (t, x, b, a) } else { (x, t, a, b) };
        if e_elim == Rational::zero() {
            return None;
        }
        // c * kept^e_kept * elim^e_elim = xi
        let base = xi / (Expr::num(c) * Expr::pow(&Expr::symbol(kept), &Expr::num(e_kept)));
        let value = Expr::pow(&base, &Expr::num(e_elim.recip()));
        return Some((elim.clone(), value, kept.clone()));
    }
    // xi affine in one independent
    let r = to_ratfunc_exact(&tf.definition).ok()?;
    if !r.den().is_constant() {
        return None;
    }
    for (elim, kept) in [(t, x), (x, t)] {
        let coeffs = r.num().coeffs_in(elim);
        if coeffs.len() == 2 && !coeffs[1].contains_var(kept) && coeffs[1].is_constant() {
            let d = r.den().constant_value()?;
            let c1 = coeffs[1].constant_value()? / d.clone();
            let c0 = crate::symkernel::convert::poly_to_expr(&coeffs[0]) / Expr::num(d);
            let value = (xi - c0) / Expr::num(c1);
            return Some((elim.clone(), value, kept.clone()));
        }
    }
    None
}

fn monomial_exponents(e: &Expr, x: &Symbol, t: &Symbol) -> Option<(Rational, Rational, Rational)> {
    let zero = || Rational::zero();
    let mut c = rational::int(1);
    let (mut a, mut b) = (zero(), zero());
    let factors = match e.node() {
        Node::Mul(fs) => fs.clone(),
        _ => vec![e.clone()],
    };
    for f in factors {
        let (base, ex) = match f.node() {
            Node::Num(r) => {
                c *= r;
                continue;
            }
            Node::Pow(b0, e0) => (b0.clone(), e0.as_rational()?.clone()),
            _ => (f.clone(), rational::int(1)),
        };
        match base.as_symbol() {
            Some(s) if s == x => a += ex,
            Some(s) if s == t => b += ex,
            _ => return None,
        }
    }
    if a == zero() && b == zero() {
        return None;
    }
    Some((c, a, b))
}

/// Serializable view of an [`OdeSpec`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OdeRecord {
    pub unknown: String,
    pub variable: String,
    pub lhs: String,
    pub reduced: String,
    pub kept: Option<String>,
    pub m: u32,
    pub parameters: Vec<String>,
}

impl From<&OdeSpec> for OdeRecord {
    fn from(o: &OdeSpec) -> Self {
        OdeRecord {
            unknown: o.unknown.to_string(),
            variable: o.variable.to_string(),
            lhs: o.lhs.to_sexpr(),
            reduced: o.reduced.to_sexpr(),
            kept: o.kept.as_ref().map(|s| s.to_string()),
            m: o.m,
            parameters: o.parameters.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl OdeRecord {
    pub fn to_spec(&self) -> Result<OdeSpec> {
        Ok(OdeSpec {
            unknown: Symbol::new(&self.unknown),
            variable: Symbol::new(&self.variable),
            lhs: crate::symkernel::parse_sexpr(&self.lhs)?,
            reduced: crate::symkernel::parse_sexpr(&self.reduced)?,
            kept: self.kept.as_deref().map(Symbol::new),
            m: self.m,
            parameters: self.parameters.iter().map(|s| Symbol::new(s)).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: &str) -> Expr {
        Expr::sym(n)
    }

    /// `u_t - (u^2)_xx - p u + s q u^3` with `(u^2)_xx` expanded by hand.
    fn heat(sign: i64) -> PdeSpec {
        let u = e("u");
        let uxx = e("u_x").powi(2) * Expr::int(2) + Expr::int(2) * u.clone() * e("u_xx");
        PdeSpec::new(e("u_t") - uxx - e("p") * u.clone() + Expr::int(sign) * e("q") * u.powi(3))
    }

    #[test]
    fn jet_names_roundtrip() {
        let indep = [Symbol::new("x"), Symbol::new("t")];
        let u = Symbol::new("u");
        let s = jet_symbol(&u, &[1, 1], &indep);
        assert_eq!(s.name(), "u_xt");
        assert_eq!(parse_jet(&s, &u, &indep), Some(vec![1, 1]));
        assert_eq!(parse_jet(&Symbol::new("u_q"), &u, &indep), None);
        assert_eq!(parse_jet(&u, &u, &indep), Some(vec![0, 0]));
    }

    #[test]
    fn total_derivative_groups() {
        let pde = PdeSpec::new(e("u"));
        let u2 = e("u").powi(2);
        let dxx = pde.total_derivative(&pde.total_derivative(&u2, 0).unwrap(), 0).unwrap();
        let expect = Expr::int(2) * e("u_x").powi(2) + Expr::int(2) * e("u") * e("u_xx");
        assert_eq!(dxx, expect);
    }

    #[test]
    fn eta_xi_derivatives() {
        let r = jet_rules(&heat(1), &SimilarityTransform::eta(), 2).unwrap();
        let (x, t) = (e("x"), e("t"));
        assert_eq!(r.xi_derivatives[&vec![1, 0]], Expr::int(-2) * t.clone() * x.powi(-3));
        assert_eq!(r.xi_derivatives[&vec![2, 0]], Expr::int(6) * t * x.powi(-4));
        assert_eq!(r.xi_derivatives[&vec![0, 1]], x.powi(-2));
    }

    #[test]
    fn zeta_xi_derivatives() {
        let r = jet_rules(&heat(-1), &SimilarityTransform::zeta(), 2).unwrap();
        let (x, t) = (e("x"), e("t"));
        assert_eq!(r.xi_derivatives[&vec![1, 0]], Expr::pow(&t, &Expr::frac(-1, 2)));
        assert!(r.xi_derivatives[&vec![2, 0]].is_zero());
        assert_eq!(
            r.xi_derivatives[&vec![0, 1]],
            Expr::frac(-1, 2) * x * Expr::pow(&t, &Expr::frac(-3, 2))
        );
    }

    #[test]
    fn identity_transform() {
        let pde = PdeSpec::new(e("u_t"));
        let ode = reduce_pde(&pde, &SimilarityTransform::new("xi", e("t"))).unwrap();
        assert_eq!(ode.lhs, e("U'"));
        assert_eq!(ode.reduced, e("U'"));
        assert_eq!(ode.m, 1);
        let r = jet_rules(&pde, &SimilarityTransform::new("xi", e("x")), 1).unwrap();
        assert_eq!(r.rules[&Symbol::new("u_x")], e("U'"));
        assert!(r.rules[&Symbol::new("u_t")].is_zero());
    }

    #[test]
    fn eta_reduction_eliminates_t() {
        let ode = reduce_pde(&heat(1), &SimilarityTransform::eta()).unwrap();
        assert_eq!(ode.kept, Some(Symbol::new("x")));
        assert!(!ode.reduced.contains(&Symbol::new("t")));
        assert_eq!(ode.m, 2);
    }

    #[test]
    fn zeta_reduction_eliminates_x() {
        let ode = reduce_pde(&heat(-1), &SimilarityTransform::zeta()).unwrap();
        assert_eq!(ode.kept, Some(Symbol::new("t")));
        let (z, t) = (e("zeta"), e("t"));
        let expect = Expr::frac(-1, 2) * e("U'") * z / t.clone()
            - Expr::int(2) * e("U'").powi(2) / t.clone()
            - Expr::int(2) * e("U") * e("U''") / t
            - e("p") * e("U")
            - e("q") * e("U").powi(3);
        assert_eq!(ode.reduced, expect.expand());
    }
}
