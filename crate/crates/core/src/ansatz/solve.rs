//! Exact solution of coefficient systems by Groebner bases and triangular
//! splitting, with a numeric fallback.
//!
//! A branch assigns each unknown a rational function of lower unknowns and
//! field symbols, a root of a minimal polynomial, or leaves it free.

use std::collections::{BTreeMap, HashMap};

use num::traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::groebner::{groebner, KPoly};
use super::numeric::solve_numeric;
use crate::error::{Error, Result};
use crate::symkernel::convert::{ratfunc_to_expr, to_ratfunc_exact};
use crate::symkernel::gcd::{gcd, prem};
use crate::symkernel::rational::{self, Rational};
use crate::symkernel::{Expr, MultiPoly, RatFunc, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Paper,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "strict" => Ok(Mode::Strict),
            "paper" => Ok(Mode::Paper),
            other => Err(Error::Config(format!("unknown mode `{}` (expected strict or paper)", other))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Paper => "paper",
        })
    }
}

/// Coefficient-matching equations, each `= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicSystem {
    /// Lex order, largest first.
    pub unknowns: Vec<Symbol>,
    /// Symbols of the coefficient field.
    pub parameters: Vec<Symbol>,
    pub equations: Vec<MultiPoly>,
    /// Source monomial of each equation, e.g. `z^2*zp`.
    pub labels: Vec<String>,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionBranch {
    pub mode: Mode,
    pub assignments: BTreeMap<Symbol, Expr>,
    /// Exact rational values, where the assignment is rational.
    pub rational: BTreeMap<Symbol, RatFunc>,
    /// Minimal polynomials of algebraic assignments, in resolution order.
    pub minimal_polys: Vec<(Symbol, MultiPoly)>,
    pub free: Vec<Symbol>,
    pub verified_exact: bool,
    /// Present for numeric-fallback branches.
    pub residual_bound: Option<f64>,
}

impl SolutionBranch {
    /// Whether `sym` can be nonzero on this branch.
    pub fn nonzero(&self, sym: &Symbol) -> bool {
        if self.free.contains(sym) {
            return true;
        }
        if let Some((_, m)) = self.minimal_polys.iter().find(|(s, _)| s == sym) {
            // v^k alone would force zero
            return m.terms().count() > 1 || m.degree_in(sym) == 0;
        }
        match self.assignments.get(sym) {
            Some(e) => !e.is_zero(),
            None => true,
        }
    }

    pub fn canonical_text(&self) -> String {
        self.assignments
            .iter()
            .map(|(k, v)| format!("{}={}", k, v.to_sexpr()))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub budget: usize,
    pub seed: u64,
    /// Numeric values for field symbols used by the fallback.
    pub numeric_params: HashMap<Symbol, f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { budget: super::groebner::DEFAULT_BUDGET, seed: 0, numeric_params: HashMap::new() }
    }
}

#[derive(Clone, Debug, Default)]
struct Raw {
    assigns: Vec<(Symbol, RatFunc)>,
    roots: Vec<(Symbol, MultiPoly)>,
    free: Vec<Symbol>,
}

struct Ctx {
    budget: usize,
    out: Vec<Raw>,
    calls: usize,
}

const MAX_CALLS: usize = 2000;

pub fn solve_system(sys: &AlgebraicSystem, opts: &SolveOptions) -> Result<Vec<SolutionBranch>> {
    let mut ctx = Ctx { budget: opts.budget, out: Vec::new(), calls: 0 };
    match decompose(sys.equations.clone(), sys.unknowns.clone(), Raw::default(), &mut ctx) {
        Ok(()) => {}
        Err(Error::GroebnerBudget { .. }) => return Ok(numeric_branches(sys, opts)),
        Err(e) => return Err(e),
    }
    let mut branches = Vec::new();
    for raw in ctx.out {
        branches.extend(finish(sys, raw)?);
    }
    let mut seen = std::collections::BTreeSet::new();
    branches.retain(|b| seen.insert((b.canonical_text(), b.free.clone())));
    sort_branches(&mut branches);
    Ok(branches)
}

pub fn sort_branches(branches: &mut [SolutionBranch]) {
    branches.sort_by(|a, b| {
        b.free
            .len()
            .cmp(&a.free.len())
            .then_with(|| a.canonical_text().cmp(&b.canonical_text()))
    });
}

fn has_unknown(p: &MultiPoly, unknowns: &[Symbol]) -> bool {
    unknowns.iter().any(|u| p.contains_var(u))
}

fn main_var(p: &MultiPoly, unknowns: &[Symbol]) -> Option<Symbol> {
    unknowns.iter().find(|u| p.contains_var(u)).cloned()
}

fn decompose(eqs: Vec<MultiPoly>, unknowns: Vec<Symbol>, raw: Raw, ctx: &mut Ctx) -> Result<()> {
    ctx.calls += 1;
    if ctx.calls > MAX_CALLS {
        return Err(Error::GroebnerBudget { budget: ctx.budget });
    }
    let mut kp = Vec::new();
    for e in eqs {
        if e.is_zero() {
            continue;
        }
        if !has_unknown(&e, &unknowns) {
            return Ok(());
        }
        kp.push(KPoly::from_poly(&e, &unknowns));
    }
    let basis = groebner(&kp, ctx.budget)?;
    if basis.iter().any(|g| g.is_constant()) {
        return Ok(());
    }
    if basis.is_empty() {
        let mut raw = raw;
        raw.free = unknowns;
        ctx.out.push(raw);
        return Ok(());
    }
    let g: Vec<MultiPoly> = basis.iter().map(|b| b.to_poly(&unknowns)).collect();
    let f = g[0].clone();
    let rest: Vec<MultiPoly> = g[1..].to_vec();
    let v = main_var(&f, &unknowns).expect("nonconstant basis element");
    let with = |extra: Vec<MultiPoly>| -> Vec<MultiPoly> {
        let mut e = rest.clone();
        e.extend(extra);
        e
    };

    // monomial factors
    for w in unknowns.iter() {
        if let Some(i) = f.index_of(w) {
            let e = f.terms().map(|(ex, _)| ex[i]).min().unwrap_or(0);
            if e > 0 && f.num_terms() > 1 {
                let wp = MultiPoly::var(w);
                let cof = f.div_exact(&wp.pow(e)).expect("monomial factor divides");
                decompose(with(vec![wp]), unknowns.clone(), raw.clone(), ctx)?;
                return decompose(with(vec![cof]), unknowns.clone(), raw, ctx);
            }
        }
    }

    // content in v that involves unknowns
    let coeffs = f.coeffs_in(&v);
    let mut content = MultiPoly::zero();
    for c in coeffs.iter().rev() {
        content = gcd(&content, c);
        if content.is_constant() {
            break;
        }
    }
    if has_unknown(&content, &unknowns) {
        let cof = f.div_exact(&content).expect("content divides");
        decompose(with(vec![content]), unknowns.clone(), raw.clone(), ctx)?;
        return decompose(with(vec![cof]), unknowns.clone(), raw, ctx);
    }

    // square-free part
    let sq = gcd(&f, &f.derivative(&v));
    if sq.degree_in(&v) > 0 {
        let part = f.div_exact(&sq).expect("gcd divides");
        return decompose(with(vec![part]), unknowns, raw, ctx);
    }

    let d = f.degree_in(&v);
    let lc = coeffs[d as usize].clone();
    if has_unknown(&lc, &unknowns) {
        let mut e = g.clone();
        e.push(lc);
        decompose(e, unknowns.clone(), raw.clone(), ctx)?;
    }
    let lower: Vec<Symbol> = unknowns.iter().filter(|u| **u != v).cloned().collect();

    if d == 1 {
        let value = RatFunc::new(-&coeffs[0], coeffs[1].clone())?;
        let mut next = Vec::with_capacity(rest.len());
        for r in &rest {
            let s = RatFunc::from_poly(r.clone()).substitute(&v, &value)?;
            next.push(s.num().clone());
        }
        let mut raw = raw;
        raw.assigns.push((v, value));
        return decompose(next, lower, raw, ctx);
    }

    // rational roots of a purely numeric polynomial
    if f.used_vars().len() == 1 {
        if let Some(r) = rational_root(&f, &v) {
            let lin = &MultiPoly::var(&v) - &MultiPoly::constant(r);
            decompose(with(vec![lin.clone()]), unknowns.clone(), raw.clone(), ctx)?;
            let cof = f.div_exact(&lin).expect("root divides");
            return decompose(with(vec![cof]), unknowns, raw, ctx);
        }
    }

    // algebraic v: adjoin it to the field
    let mut next = Vec::new();
    for r in &rest {
        if !r.contains_var(&v) {
            next.push(r.clone());
            continue;
        }
        let red = prem(r, &f, &v);
        if red.is_zero() {
            continue;
        }
        let same_level = main_var(r, &unknowns).as_ref() == Some(&v);
        if same_level && red.contains_var(&v) {
            let h = gcd(&f, &red);
            if h.degree_in(&v) > 0 {
                let mut a = rest.clone();
                a.push(h.clone());
                decompose(a, unknowns.clone(), raw.clone(), ctx)?;
                let mut b = rest.clone();
                b.push(f.div_exact(&h).expect("gcd divides"));
                b.extend(red.coeffs_in(&v).into_iter().filter(|c| !c.is_zero()));
                return decompose(b, unknowns, raw, ctx);
            }
            next.extend(red.coeffs_in(&v).into_iter().filter(|c| !c.is_zero()));
        } else if same_level {
            next.push(red);
        } else {
            next.push(red);
        }
    }
    let mut raw = raw;
    raw.roots.push((v, f));
    decompose(next, lower, raw, ctx)
}

/// A rational root of a univariate polynomial with rational coefficients.
fn rational_root(f: &MultiPoly, v: &Symbol) -> Option<Rational> {
    use num::Integer;
    let coeffs: Vec<Rational> = f.coeffs_in(v).iter().map(|c| c.constant_value().unwrap_or_else(Rational::zero)).collect();
    let l = coeffs.iter().fold(num::BigInt::from(1), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<num::BigInt> = coeffs.iter().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect();
    let a0 = ints.first()?.abs();
    let an = ints.last()?.abs();
    if a0.is_zero() {
        return Some(Rational::zero());
    }
    let small = |n: &num::BigInt| n.bits() <= 40;
    if !small(&a0) || !small(&an) {
        return None;
    }
    let divisors = |n: &num::BigInt| -> Vec<i64> {
        let n = i64::try_from(n.clone()).unwrap_or(0);
        (1..=n.min(100_000)).filter(|d| n % d == 0).collect()
    };
    let mut cands: Vec<Rational> = Vec::new();
    for p in divisors(&a0) {
        for q in divisors(&an) {
            cands.push(rational::frac(p, q));
            cands.push(rational::frac(-p, q));
        }
    }
    cands.sort();
    cands.dedup();
    cands.into_iter().find(|r| {
        let mut acc = Rational::zero();
        for c in coeffs.iter().rev() {
            acc = acc * r + c;
        }
        acc.is_zero()
    })
}

fn finish(sys: &AlgebraicSystem, raw: Raw) -> Result<Vec<SolutionBranch>> {
    // resolve assignments against each other
    let mut assigns = raw.assigns.clone();
    for _ in 0..=assigns.len() {
        let mut changed = false;
        for i in 0..assigns.len() {
            for j in 0..assigns.len() {
                if i == j {
                    continue;
                }
                let (w, wv) = (assigns[j].0.clone(), assigns[j].1.clone());
                if assigns[i].1.contains_var(&w) {
                    assigns[i].1 = assigns[i].1.substitute(&w, &wv)?;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut roots = Vec::new();
    for (v, m) in &raw.roots {
        let mut r = RatFunc::from_poly(m.clone());
        for (w, wv) in &assigns {
            r = r.substitute(w, wv)?;
        }
        roots.push((v.clone(), r.num().clone()));
    }
    let verified = verify(&sys.equations, &assigns, &roots)?;

    let rational: BTreeMap<Symbol, RatFunc> = assigns.iter().cloned().collect();
    let mut base: BTreeMap<Symbol, Expr> =
        assigns.iter().map(|(s, r)| (s.clone(), ratfunc_to_expr(r))).collect();
    let mut free = raw.free.clone();
    free.sort();

    // explicit radicals for quadratic minimal polynomials
    let mut variants: Vec<BTreeMap<Symbol, Expr>> = vec![BTreeMap::new()];
    for (v, m) in &roots {
        if m.degree_in(v) == 2 {
            let c = m.coeffs_in(v);
            let (a, b, cc) = (
                ratfunc_to_expr(&RatFunc::from_poly(c[2].clone())),
                ratfunc_to_expr(&RatFunc::from_poly(c[1].clone())),
                ratfunc_to_expr(&RatFunc::from_poly(c[0].clone())),
            );
            let disc = (&b * &b - Expr::int(4) * a.clone() * cc.clone()).expand();
            let root = Expr::sqrt(disc);
            let two_a = Expr::int(2) * a;
            let mut next = Vec::new();
            for sign in [1, -1] {
                let val = (-b.clone() + Expr::int(sign) * root.clone()) / two_a.clone();
                for vmap in &variants {
                    let mut m2 = vmap.clone();
                    m2.insert(v.clone(), val.clone());
                    next.push(m2);
                }
            }
            variants = next;
        } else {
            let poly = crate::symkernel::convert::poly_to_expr(m);
            for vmap in variants.iter_mut() {
                vmap.insert(
                    v.clone(),
                    Expr::apply(crate::symkernel::Func::Other(Symbol::new("rootof")), vec![poly.clone(), Expr::symbol(v)]),
                );
            }
        }
    }
    let mut out = Vec::new();
    for vmap in variants {
        let mut assignments = base.clone();
        for (k, e) in &vmap {
            assignments.insert(k.clone(), e.clone());
        }
        for val in assignments.values_mut() {
            *val = crate::symkernel::substitute(val, &vmap);
        }
        out.push(SolutionBranch {
            mode: sys.mode,
            assignments,
            rational: rational.clone(),
            minimal_polys: roots.clone(),
            free: free.clone(),
            verified_exact: verified,
            residual_bound: None,
        });
    }
    base.clear();
    Ok(out)
}

/// Exact back-substitution: every equation vanishes after substituting the
/// rational assignments and reducing by the minimal polynomials.
pub fn verify(
    equations: &[MultiPoly],
    assigns: &[(Symbol, RatFunc)],
    roots: &[(Symbol, MultiPoly)],
) -> Result<bool> {
    for e in equations {
        let mut r = RatFunc::from_poly(e.clone());
        for (s, v) in assigns {
            r = r.substitute(s, v)?;
        }
        let mut p = r.num().clone();
        for (s, m) in roots {
            if p.is_zero() {
                break;
            }
            if m.contains_var(s) {
                p = prem(&p, m, s);
            }
        }
        if !p.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Verifies a branch against `sys` using its exact data.
pub fn verify_branch(sys: &AlgebraicSystem, b: &SolutionBranch) -> Result<bool> {
    if b.residual_bound.is_some() {
        return Ok(false);
    }
    let assigns: Vec<(Symbol, RatFunc)> = b.rational.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    verify(&sys.equations, &assigns, &b.minimal_polys)
}

fn numeric_branches(sys: &AlgebraicSystem, opts: &SolveOptions) -> Vec<SolutionBranch> {
    let roots = solve_numeric(&sys.equations, &sys.unknowns, &opts.numeric_params, opts.seed);
    let mut out: Vec<SolutionBranch> = roots
        .into_iter()
        .map(|r| {
            let assignments = sys
                .unknowns
                .iter()
                .zip(&r.values)
                .map(|(s, &x)| (s.clone(), Expr::num(approx_rational(x))))
                .collect();
            SolutionBranch {
                mode: sys.mode,
                assignments,
                rational: BTreeMap::new(),
                minimal_polys: Vec::new(),
                free: Vec::new(),
                verified_exact: false,
                residual_bound: Some(r.residual),
            }
        })
        .collect();
    sort_branches(&mut out);
    out
}

fn approx_rational(x: f64) -> Rational {
    num::rational::Ratio::<i64>::approximate_float(x)
        .map(|r| rational::frac(*r.numer(), *r.denom()))
        .unwrap_or_else(|| Rational::from_float(x).unwrap_or_else(Rational::zero))
}

/// Builds a system directly from expressions (test and CLI helper).
pub fn system_from_exprs(eqs: &[Expr], unknowns: &[&str], mode: Mode) -> Result<AlgebraicSystem> {
    let unknowns: Vec<Symbol> = unknowns.iter().map(|s| Symbol::new(s)).collect();
    let mut equations = Vec::new();
    let mut params = std::collections::BTreeSet::new();
    for e in eqs {
        let r = to_ratfunc_exact(e)?;
        for v in r.used_vars() {
            if !unknowns.contains(&v) {
                params.insert(v);
            }
        }
        equations.push(r.num().clone());
    }
    Ok(AlgebraicSystem {
        unknowns,
        parameters: params.into_iter().collect(),
        labels: (0..equations.len()).map(|i| format!("e{}", i)).collect(),
        equations,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: &str) -> Expr {
        Expr::sym(n)
    }

    #[test]
    fn unit_parameter_forces_zero() {
        let sys = system_from_exprs(&[e("g1"), e("g0") * e("p")], &["g0", "g1"], Mode::Strict).unwrap();
        let b = solve_system(&sys, &SolveOptions::default()).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].assignments[&Symbol::new("g0")].is_zero());
        assert!(b[0].assignments[&Symbol::new("g1")].is_zero());
        assert!(b[0].verified_exact);
    }

    #[test]
    fn cubic_constant_branches() {
        // g0 (q g0^2 - p) = 0 with p, q unknown too
        let eq = e("g0") * (e("q") * e("g0").powi(2) - e("p"));
        let sys = system_from_exprs(&[eq], &["g0", "p", "q"], Mode::Strict).unwrap();
        let b = solve_system(&sys, &SolveOptions::default()).unwrap();
        assert!(b.iter().all(|x| x.verified_exact));
        assert!(b.iter().any(|x| x.assignments.get(&Symbol::new("g0")).is_some_and(|v| v.is_zero())));
        assert!(b.iter().any(|x| !x.minimal_polys.is_empty()));
    }

    #[test]
    fn rational_roots_are_split() {
        let x = e("x");
        let sys = system_from_exprs(&[x.powi(2) - Expr::int(1)], &["x"], Mode::Strict).unwrap();
        let b = solve_system(&sys, &SolveOptions::default()).unwrap();
        let vals: Vec<String> = b.iter().map(|b| b.assignments[&Symbol::new("x")].to_sexpr()).collect();
        assert_eq!(vals, vec!["-1", "1"]);
    }

    #[test]
    fn inconsistent_is_empty() {
        let sys = system_from_exprs(&[e("x"), e("x") - Expr::one()], &["x"], Mode::Strict).unwrap();
        assert!(solve_system(&sys, &SolveOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn positive_dimensional_reports_free() {
        let sys = system_from_exprs(&[e("x") - e("y")], &["x", "y"], Mode::Strict).unwrap();
        let b = solve_system(&sys, &SolveOptions::default()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].free, vec![Symbol::new("y")]);
        assert_eq!(b[0].assignments[&Symbol::new("x")], e("y"));
    }

    #[test]
    fn fallback_on_budget() {
        let (x, y) = (e("x"), e("y"));
        let sys = system_from_exprs(
            &[x.powi(2) + y.powi(2) - Expr::int(2), x.clone() - y.clone()],
            &["x", "y"],
            Mode::Strict,
        )
        .unwrap();
        let opts = SolveOptions { budget: 0, ..SolveOptions::default() };
        let b = solve_system(&sys, &opts).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.iter().all(|b| !b.verified_exact && b.residual_bound.unwrap() < 1e-12));
    }
}
