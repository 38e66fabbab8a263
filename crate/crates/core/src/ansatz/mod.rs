//! Finite-series ansatz `U = sum g_k z^k` over a solution `z` of an
//! auxiliary equation, index filtering, coefficient matching and balancing.

pub mod audit;
pub mod groebner;
pub mod numeric;
pub mod solve;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use solve::{solve_system, verify_branch, AlgebraicSystem, Mode, SolutionBranch, SolveOptions};

use crate::error::{Error, Result};
use crate::fiblucas::{aux_ode, polynomial_solution, AuxiliaryEquation, Family, FamilyId, Variant};
use crate::reduction::{OdeSpec, SimilarityTransform};
use crate::symkernel::convert::{collect_ratfunc, poly_to_expr, to_ratfunc_exact};
use crate::symkernel::{substitute, Expr, MultiPoly, RatFunc, Symbol};
use crate::verify::{eval_expr, EvalPoint, Grid};

/// Symbol standing for `z(xi)`.
pub fn z_symbol() -> Symbol {
    Symbol::new("z")
}

/// Symbol standing for `z'(xi)`.
pub fn zp_symbol() -> Symbol {
    Symbol::new("zp")
}

/// `g0`, `g1`, `gm1`, ... for the power `k`.
pub fn coefficient_symbol(k: i32) -> Symbol {
    if k < 0 {
        Symbol::new(&format!("gm{}", -k))
    } else {
        Symbol::new(&format!("g{}", k))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzSpec {
    /// Sorted ascending.
    pub powers: Vec<i32>,
    pub coefficients: Vec<Symbol>,
    pub aux: AuxiliaryEquation,
}

impl AnsatzSpec {
    pub fn new(mut powers: Vec<i32>, aux: AuxiliaryEquation) -> AnsatzSpec {
        powers.sort_unstable();
        powers.dedup();
        let coefficients = powers.iter().map(|&k| coefficient_symbol(k)).collect();
        AnsatzSpec { powers, coefficients, aux }
    }

    /// Powers `0..=n` or, when `reciprocal`, `-n..=0`.
    pub fn series(n: u32, reciprocal: bool, aux: AuxiliaryEquation) -> AnsatzSpec {
        let n = n as i32;
        let powers = if reciprocal { (-n..=0).collect() } else { (0..=n).collect() };
        AnsatzSpec::new(powers, aux)
    }

    pub fn order(&self) -> u32 {
        self.powers.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    /// Coefficient of the power of largest magnitude.
    pub fn top(&self) -> &Symbol {
        let i = (0..self.powers.len()).max_by_key(|&i| self.powers[i].unsigned_abs()).expect("nonempty ansatz");
        &self.coefficients[i]
    }

    /// `sum g_k z^k` as a rational function in the coefficients and `z`.
    pub fn ratfunc(&self) -> Result<RatFunc> {
        let z = RatFunc::var(&z_symbol());
        let mut acc = RatFunc::zero();
        for (k, g) in self.powers.iter().zip(&self.coefficients) {
            acc = &acc + &(&RatFunc::var(g) * &z.pow(*k)?);
        }
        Ok(acc)
    }

    /// Unknowns in elimination order: coefficients by decreasing `|power|`.
    fn unknowns(&self) -> Vec<Symbol> {
        let mut idx: Vec<usize> = (0..self.powers.len()).collect();
        idx.sort_by_key(|&i| std::cmp::Reverse((self.powers[i].unsigned_abs(), self.powers[i])));
        idx.into_iter().map(|i| self.coefficients[i].clone()).collect()
    }
}

/// The total `xi`-derivative on functions of `(xi, z, z')` with
/// `z'' = alpha z' + beta z`.
pub fn derivation(r: &RatFunc, aux: &AuxiliaryEquation) -> Result<RatFunc> {
    let (z, zp) = (z_symbol(), zp_symbol());
    let zpv = RatFunc::var(&zp);
    let zpp = &(&aux.alpha * &zpv) + &(&aux.beta * &RatFunc::var(&z));
    let a = r.derivative(&aux.variable);
    let b = &zpv * &r.derivative(&z);
    let c = &zpp * &r.derivative(&zp);
    Ok(&(&a + &b) + &c)
}

fn monomial_label(names: &[Symbol], exps: &[i32]) -> String {
    let parts: Vec<String> = names
        .iter()
        .zip(exps)
        .filter(|(_, &e)| e != 0)
        .map(|(s, &e)| if e == 1 { s.to_string() } else { format!("{}^{}", s, e) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn primitive_rational(p: &MultiPoly) -> MultiPoly {
    if p.is_zero() {
        return p.clone();
    }
    let scaled = p.scale(&p.integer_normalizer());
    let mut g = num::BigInt::from(0);
    for (_, c) in scaled.terms() {
        g = num::Integer::gcd(&g, c.numer());
    }
    scaled.scale(&num::BigRational::new(1.into(), g))
}

/// Substitutes the ansatz into the reduced ODE, eliminates `z''` through the
/// auxiliary equation and sets every coefficient of `z^i z'^j` to zero. In
/// strict mode each coefficient is further split by monomials in `xi` and
/// the surviving coordinate.
pub fn substitute_and_collect(ode: &OdeSpec, ansatz: &AnsatzSpec, mode: Mode) -> Result<AlgebraicSystem> {
    if ode.variable != ansatz.aux.variable {
        return Err(Error::Config(format!(
            "ODE variable `{}` differs from auxiliary variable `{}`",
            ode.variable, ansatz.aux.variable
        )));
    }
    let lhs = to_ratfunc_exact(&ode.reduced)?;
    let mut d = ansatz.ratfunc()?;
    let mut r = lhs;
    for k in 0..=ode.m {
        r = r.substitute(&ode.jet(k), &d)?;
        d = derivation(&d, &ansatz.aux)?;
    }
    let basis = [z_symbol(), zp_symbol()];
    let parts = collect_ratfunc(&r, &basis)?;

    let mut split: Vec<Symbol> = vec![ode.variable.clone()];
    split.extend(ode.kept.iter().cloned());
    let mut equations: Vec<MultiPoly> = Vec::new();
    let mut labels = Vec::new();
    for (mono, c) in &parts {
        let label = monomial_label(&basis, mono);
        match mode {
            Mode::Paper => {
                equations.push(primitive_rational(c.num()));
                labels.push(label);
            }
            Mode::Strict => {
                for (k, coeff) in c.num().collect_by(&split) {
                    let ks: Vec<i32> = k.iter().map(|&e| e as i32).collect();
                    equations.push(primitive_rational(&coeff));
                    labels.push(format!("{} [{}]", label, monomial_label(&split, &ks)));
                }
            }
        }
    }
    let mut unknowns = ansatz.unknowns();
    let mut present: Vec<Symbol> = Vec::new();
    for e in &equations {
        for v in e.used_vars() {
            if !present.contains(&v) {
                present.push(v);
            }
        }
    }
    for p in &ode.parameters {
        if present.contains(p) && !unknowns.contains(p) {
            unknowns.push(p.clone());
        }
    }
    let mut parameters: Vec<Symbol> = present.into_iter().filter(|v| !unknowns.contains(v)).collect();
    parameters.sort();
    Ok(AlgebraicSystem { unknowns, parameters, equations, labels, mode })
}

// ---- index rule --------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexRule {
    pub m: u32,
}

impl IndexRule {
    pub fn new(m: u32) -> Result<IndexRule> {
        if m == 0 {
            return Err(Error::Config("index rule needs m >= 1".into()));
        }
        Ok(IndexRule { m })
    }

    pub fn admits(&self, n: i64) -> bool {
        let r = n.rem_euclid(self.m as i64);
        let m = self.m as i64;
        r == 0 || r == 1 % m || r == m - 1
    }
}

/// Preference rank: `1, -1, 0`, then increasing `|n|` with negatives first.
pub fn preference_key(n: i64) -> (u8, u64, i64) {
    match n {
        1 => (0, 0, 0),
        -1 => (1, 0, 0),
        0 => (2, 0, 0),
        _ => (3, n.unsigned_abs(), n),
    }
}

/// Candidates passing `n = -1, 0, 1 (mod m)`, in preference order.
pub fn admissible_indices<I: IntoIterator<Item = i64>>(rule: IndexRule, candidates: I) -> Result<Vec<i64>> {
    let mut out: Vec<i64> = candidates.into_iter().filter(|&n| rule.admits(n)).collect();
    out.sort_by_key(|&n| preference_key(n));
    out.dedup();
    if out.is_empty() {
        return Err(Error::NoAdmissibleIndex);
    }
    Ok(out)
}

// ---- balancing ---------------------------------------------------------------

pub const DEFAULT_N_MAX: u32 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceAttempt {
    pub order: u32,
    pub branches: usize,
    pub nontrivial: bool,
}

/// Smallest `N` whose ansatz admits a branch with a nonzero top coefficient.
pub fn balance(ode: &OdeSpec, aux: &AuxiliaryEquation) -> Result<u32> {
    balance_with(ode, aux, false, Mode::Paper, DEFAULT_N_MAX, &SolveOptions::default()).map(|(n, _)| n)
}

pub fn balance_with(
    ode: &OdeSpec,
    aux: &AuxiliaryEquation,
    reciprocal: bool,
    mode: Mode,
    n_max: u32,
    opts: &SolveOptions,
) -> Result<(u32, Vec<BalanceAttempt>)> {
    let attempts = balance_attempts(ode, aux, reciprocal, mode, n_max, opts)?;
    match attempts.last() {
        Some(a) if a.nontrivial => Ok((a.order, attempts)),
        _ => Err(Error::BalanceFailure { n_max }),
    }
}

/// Orders `1..=n_max` tried in turn, stopping at the first nontrivial one.
pub fn balance_attempts(
    ode: &OdeSpec,
    aux: &AuxiliaryEquation,
    reciprocal: bool,
    mode: Mode,
    n_max: u32,
    opts: &SolveOptions,
) -> Result<Vec<BalanceAttempt>> {
    let mut attempts = Vec::new();
    for n in 1..=n_max {
        let ansatz = AnsatzSpec::series(n, reciprocal, aux.clone());
        let sys = substitute_and_collect(ode, &ansatz, mode)?;
        let branches = solve_system(&sys, opts)?;
        let nontrivial = branches.iter().any(|b| b.nonzero(ansatz.top()));
        attempts.push(BalanceAttempt { order: n, branches: branches.len(), nontrivial });
        if nontrivial {
            break;
        }
    }
    Ok(attempts)
}

// ---- screening ---------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzTemplate {
    pub family: Family,
    pub variant: Variant,
    pub reciprocal: bool,
    pub order: u32,
}

impl AnsatzTemplate {
    pub fn aux(&self, n: i64) -> AuxiliaryEquation {
        aux_ode(FamilyId::new(self.family, self.variant, n))
    }

    pub fn ansatz(&self, n: i64) -> AnsatzSpec {
        AnsatzSpec::series(self.order, self.reciprocal, self.aux(n))
    }
}

/// Reference data for the real-boundedness test.
#[derive(Clone, Debug)]
pub struct ScreenContext {
    pub transform: SimilarityTransform,
    pub grid: Grid,
    /// Values for parameters and free unknowns that a branch leaves open.
    pub params: BTreeMap<Symbol, f64>,
    pub mode: Mode,
    pub solve: SolveOptions,
}

pub const BOUND: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Screening {
    Accepted { branch: usize, solution: String },
    Rejected { reason: String },
}

#[derive(Clone, Debug)]
pub struct ScreenResult {
    pub n: i64,
    pub outcome: Screening,
    pub system: AlgebraicSystem,
    pub branches: Vec<SolutionBranch>,
}

/// `u(x, t)` from a branch: the ansatz with `z` the polynomial solution of
/// index `n`, assignments applied and `xi` replaced by its definition.
pub fn branch_solution(
    template: &AnsatzTemplate,
    n: i64,
    branch: &SolutionBranch,
    transform: &SimilarityTransform,
) -> Result<Expr> {
    let ansatz = template.ansatz(n);
    let vanishes = |g: &Symbol| branch.assignments.get(g).map(|e| e.is_zero()).unwrap_or(false);
    // z is only needed when some nonconstant term survives.
    let needs_z = ansatz.powers.iter().zip(&ansatz.coefficients).any(|(k, g)| *k != 0 && !vanishes(g));
    let z = if needs_z {
        poly_to_expr(&polynomial_solution(FamilyId::new(template.family, template.variant, n))?)
    } else {
        Expr::one()
    };
    let mut u = Expr::zero();
    for (k, g) in ansatz.powers.iter().zip(&ansatz.coefficients) {
        if *k == 0 || !vanishes(g) {
            u = u + Expr::symbol(g) * z.powi(*k as i64);
        }
    }
    let u = substitute(&u, &branch.assignments);
    let mut b = BTreeMap::new();
    b.insert(transform.variable.clone(), transform.definition.clone());
    Ok(substitute(&u, &b))
}

fn bounded_on(u: &Expr, ctx: &ScreenContext) -> Result<std::result::Result<(), String>> {
    let mut pt = EvalPoint::default();
    for (k, v) in &ctx.params {
        pt = pt.with(k, *v);
    }
    for s in u.free_symbols() {
        if !pt.bindings.contains_key(&s) && s.name() != "x" && s.name() != "t" && s.name() != "pi" {
            pt = pt.with(&s, 1.0);
        }
    }
    let (xs, ts) = (Symbol::new("x"), Symbol::new("t"));
    let mut inside = 0usize;
    for (x, t) in ctx.grid.points() {
        match eval_expr(u, &pt.clone().with(&xs, x).with(&ts, t)) {
            Ok(v) if v.abs() <= BOUND => inside += 1,
            Ok(v) => return Ok(Err(format!("unbounded: |u| = {:e} at x={}, t={}", v.abs(), x, t))),
            Err(Error::OutOfDomain { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if inside == 0 {
        return Ok(Err("not real anywhere on the reference grid".into()));
    }
    Ok(Ok(()))
}

/// Accepts `n` iff some branch with a nonzero top coefficient yields a real,
/// bounded solution on the reference grid.
pub fn screen_index(ode: &OdeSpec, template: &AnsatzTemplate, n: i64, ctx: &ScreenContext) -> Result<ScreenResult> {
    let ansatz = template.ansatz(n);
    let system = substitute_and_collect(ode, &ansatz, ctx.mode)?;
    let branches = solve_system(&system, &ctx.solve)?;
    let reject = |reason: String, system: AlgebraicSystem, branches: Vec<SolutionBranch>| ScreenResult {
        n,
        outcome: Screening::Rejected { reason },
        system,
        branches,
    };
    if branches.is_empty() {
        return Ok(reject("inconsistent coefficient system".into(), system, branches));
    }
    let top = ansatz.top().clone();
    let nontrivial: Vec<usize> = (0..branches.len()).filter(|&i| branches[i].nonzero(&top)).collect();
    if nontrivial.is_empty() {
        let reason = format!("no nontrivial branch: every branch forces {} = 0", top);
        return Ok(reject(reason, system, branches));
    }
    let mut last = String::new();
    for i in nontrivial {
        let u = match branch_solution(template, n, &branches[i], &ctx.transform) {
            Ok(u) => u,
            Err(e) => {
                last = format!("no closed-form z for n = {}: {}", n, e);
                continue;
            }
        };
        match bounded_on(&u, ctx)? {
            Ok(()) => {
                return Ok(ScreenResult {
                    n,
                    outcome: Screening::Accepted { branch: i, solution: u.to_sexpr() },
                    system,
                    branches,
                })
            }
            Err(reason) => last = reason,
        }
    }
    Ok(reject(last, system, branches))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiblucas::Index;
    use crate::reduction::{reduce_pde, PdeSpec};

    fn s(n: &str) -> Symbol {
        Symbol::new(n)
    }

    fn heat(sign: i64) -> PdeSpec {
        crate::grammar::parse_pde(if sign > 0 {
            "u_t - (u^2)_xx - p*u + q*u^3 = 0"
        } else {
            "u_t - (u^2)_xx - p*u - q*u^3 = 0"
        })
        .unwrap()
    }

    #[test]
    fn index_filter_examples() {
        let r2 = IndexRule::new(2).unwrap();
        assert_eq!(admissible_indices(r2, -2..=4).unwrap(), vec![1, -1, 0, -2, 2, 3, 4]);
        let r3 = IndexRule::new(3).unwrap();
        assert_eq!(admissible_indices(r3, 0..=4).unwrap(), vec![1, 0, 2, 3, 4]);
        let r1 = IndexRule::new(1).unwrap();
        assert_eq!(admissible_indices(r1, -3..=3).unwrap().len(), 7);
        assert!(matches!(admissible_indices(r3, std::iter::empty()), Err(Error::NoAdmissibleIndex)));
        assert!(matches!(admissible_indices(IndexRule::new(5).unwrap(), [2, 3]), Err(Error::NoAdmissibleIndex)));
    }

    #[test]
    fn constant_derivative_system() {
        let aux = aux_ode(FamilyId::symbolic(Family::Lucas, Variant::Zeta));
        let ode = OdeSpec::direct("zeta", Expr::sym("U'"), &[]);
        let sys = substitute_and_collect(&ode, &AnsatzSpec::series(1, false, aux), Mode::Paper).unwrap();
        assert_eq!(sys.equations, vec![MultiPoly::var(&s("g1"))]);
        assert_eq!(sys.labels, vec!["zp"]);
    }

    #[test]
    fn aux_consistent_ode_leaves_alpha() {
        // U'' - beta U with U = z: the z coefficient cancels, z' keeps alpha
        let aux = aux_ode(FamilyId::new(Family::Lucas, Variant::Zeta, 2));
        let beta = crate::symkernel::convert::ratfunc_to_expr(&aux.beta);
        let ode = OdeSpec::direct("zeta", Expr::sym("U''") - beta * Expr::sym("U"), &[]);
        let ansatz = AnsatzSpec::new(vec![1], aux.clone());
        let sys = substitute_and_collect(&ode, &ansatz, Mode::Paper).unwrap();
        assert_eq!(sys.labels, vec!["zp"]);
        // numerator of alpha * g1
        let expect = primitive_rational(&(&MultiPoly::var(&s("g1")) * aux.alpha.num()));
        assert_eq!(sys.equations, vec![expect]);
    }

    #[test]
    fn reciprocal_elimination_matches_direct_formula() {
        // (1/z)'' = 2 z'^2 / z^3 - (alpha z' + beta z) / z^2
        let aux = aux_ode(FamilyId::symbolic(Family::Fibonacci, Variant::Zeta));
        let z = RatFunc::var(&z_symbol());
        let zp = RatFunc::var(&zp_symbol());
        let inv = z.recip().unwrap();
        let d2 = derivation(&derivation(&inv, &aux).unwrap(), &aux).unwrap();
        let zpp = &(&aux.alpha * &zp) + &(&aux.beta * &z);
        let direct = &(&(&RatFunc::int(2) * &zp.pow(2).unwrap()) * &z.pow(-3).unwrap()) - &(&zpp * &z.pow(-2).unwrap());
        assert_eq!(d2, direct);
    }

    #[test]
    fn derivation_is_order_independent() {
        // differentiating a product equals the product rule applied by hand
        let aux = aux_ode(FamilyId::symbolic(Family::Fibonacci, Variant::Eta));
        let a = &RatFunc::var(&z_symbol()) * &RatFunc::var(&s("eta"));
        let b = &RatFunc::var(&zp_symbol()) + &RatFunc::int(3);
        let lhs = derivation(&(&a * &b), &aux).unwrap();
        let rhs = &(&derivation(&a, &aux).unwrap() * &b) + &(&a * &derivation(&b, &aux).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn heat_reduction_forces_top_coefficient_to_zero() {
        let ode = reduce_pde(&heat(1), &SimilarityTransform::eta()).unwrap();
        let aux = aux_ode(FamilyId::symbolic(Family::Fibonacci, Variant::Eta));
        let sys = substitute_and_collect(&ode, &AnsatzSpec::series(1, false, aux.clone()), Mode::Paper).unwrap();
        assert_eq!(sys.unknowns, vec![s("g1"), s("g0"), s("p"), s("q")]);
        let branches = solve_system(&sys, &SolveOptions::default()).unwrap();
        assert!(!branches.is_empty());
        for b in &branches {
            assert!(b.verified_exact);
            assert!(!b.nonzero(&s("g1")));
        }
        assert!(matches!(balance(&ode, &aux), Err(Error::BalanceFailure { n_max: 3 })));
    }

    #[test]
    fn linear_ode_has_no_nontrivial_balance() {
        let aux = aux_ode(FamilyId { family: Family::Lucas, variant: Variant::Zeta, index: Index::Symbolic });
        let ode = OdeSpec::direct("zeta", Expr::sym("U'") - Expr::sym("U"), &[]);
        assert!(matches!(balance(&ode, &aux), Err(Error::BalanceFailure { .. })));
    }

    #[test]
    fn screening_rejects_with_reason() {
        let ode = reduce_pde(&heat(1), &SimilarityTransform::eta()).unwrap();
        let template = AnsatzTemplate { family: Family::Fibonacci, variant: Variant::Eta, reciprocal: false, order: 1 };
        let ctx = ScreenContext {
            transform: SimilarityTransform::eta(),
            grid: Grid::parse("x=1:2:5,t=-0.9:-0.1:5").unwrap(),
            params: [(s("p"), 1.0), (s("q"), 1.0)].into_iter().collect(),
            mode: Mode::Paper,
            solve: SolveOptions::default(),
        };
        let r = screen_index(&ode, &template, 4, &ctx).unwrap();
        match r.outcome {
            Screening::Rejected { reason } => assert!(reason.contains("g1 = 0"), "{}", reason),
            other => panic!("unexpected {:?}", other),
        }
    }
}
