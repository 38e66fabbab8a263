//! Generalized Fibonacci and Lucas polynomials and their auxiliary ODEs.
//!
//! `F_1 = 1, F_2 = x, F_n = x F_{n-1} + y F_{n-2}` and
//! `L_0 = 2, L_1 = x, L_n = x L_{n-1} + y L_{n-2}`. The eta form fixes
//! `x = 1, y = eta`; the zeta form fixes `x = zeta, y = 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symkernel::convert::poly_to_expr;
use crate::symkernel::{Expr, Func, MultiPoly, RatFunc, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Fibonacci,
    Lucas,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Eta,
    Zeta,
}

impl Variant {
    pub fn variable(self) -> Symbol {
        match self {
            Variant::Eta => Symbol::new("eta"),
            Variant::Zeta => Symbol::new("zeta"),
        }
    }
}

/// Polynomial index, either a concrete integer or the free symbol `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Index {
    Symbolic,
    Fixed(i64),
}

impl Index {
    fn ratfunc(self) -> RatFunc {
        match self {
            Index::Symbolic => RatFunc::var(&index_symbol()),
            Index::Fixed(k) => RatFunc::int(k),
        }
    }
}

pub fn index_symbol() -> Symbol {
    Symbol::new("n")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyId {
    pub family: Family,
    pub variant: Variant,
    pub index: Index,
}

impl FamilyId {
    pub fn new(family: Family, variant: Variant, n: i64) -> Self {
        FamilyId { family, variant, index: Index::Fixed(n) }
    }

    pub fn symbolic(family: Family, variant: Variant) -> Self {
        FamilyId { family, variant, index: Index::Symbolic }
    }

    pub fn with_index(self, n: i64) -> Self {
        FamilyId { index: Index::Fixed(n), ..self }
    }

    fn fixed(&self) -> Result<i64> {
        match self.index {
            Index::Fixed(n) => Ok(n),
            Index::Symbolic => Err(Error::Config("a concrete index n is required".into())),
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            Family::Fibonacci => "F",
            Family::Lucas => "L",
        };
        let var = match self.variant {
            Variant::Eta => "eta",
            Variant::Zeta => "zeta",
        };
        match self.index {
            Index::Fixed(n) => write!(f, "{}_{}({})", fam, n, var),
            Index::Symbolic => write!(f, "{}_n({})", fam, var),
        }
    }
}

/// `z'' = alpha z' + beta z` in the variable `variable`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxiliaryEquation {
    pub variable: Symbol,
    pub alpha: RatFunc,
    pub beta: RatFunc,
    pub source: FamilyId,
}

impl AuxiliaryEquation {
    /// The leading coefficient of the uncleared form: `eta(1+4 eta)` or
    /// `4 + zeta^2`.
    pub fn leading(&self) -> MultiPoly {
        leading_poly(self.source.variant)
    }

    /// `(a2, a1, a0)` with `a2 z'' + a1 z' + a0 z = 0`.
    pub fn cleared(&self) -> (MultiPoly, MultiPoly, MultiPoly) {
        let a2 = RatFunc::from_poly(self.leading());
        let a1 = -(&a2 * &self.alpha);
        let a0 = -(&a2 * &self.beta);
        debug_assert!(a1.is_polynomial() && a0.is_polynomial());
        (a2.num().clone(), a1.num().clone(), a0.num().clone())
    }

    pub fn with_index(&self, n: i64) -> AuxiliaryEquation {
        aux_ode(self.source.with_index(n))
    }
}

fn leading_poly(variant: Variant) -> MultiPoly {
    let v = MultiPoly::var(&variant.variable());
    match variant {
        Variant::Eta => &v * &(&MultiPoly::one() + &v.scale(&crate::symkernel::rational::int(4))),
        Variant::Zeta => &MultiPoly::int(4) + &v.pow(2),
    }
}

fn recurrence(n: i64, first: (i64, MultiPoly), second: MultiPoly, x: &MultiPoly, y: &MultiPoly) -> MultiPoly {
    let (start, mut a) = first;
    if n == start {
        return a;
    }
    let mut b = second;
    for _ in start + 2..=n {
        let c = &(x * &b) + &(y * &a);
        a = b;
        b = c;
    }
    b
}

fn xy() -> (MultiPoly, MultiPoly) {
    (MultiPoly::var(&Symbol::new("x")), MultiPoly::var(&Symbol::new("y")))
}

fn fib_general(n: i64, x: &MultiPoly, y: &MultiPoly) -> Result<MultiPoly> {
    if n < 1 {
        return Err(Error::OutOfRange { what: "Fibonacci", value: n });
    }
    Ok(recurrence(n, (1, MultiPoly::one()), x.clone(), x, y))
}

fn lucas_general(n: i64, x: &MultiPoly, y: &MultiPoly) -> Result<MultiPoly> {
    if n < 0 {
        return Err(Error::OutOfRange { what: "Lucas", value: n });
    }
    Ok(recurrence(n, (0, MultiPoly::int(2)), x.clone(), x, y))
}

/// `F_n(x, y)` for `n >= 1`.
pub fn fib_poly(n: i64) -> Result<MultiPoly> {
    let (x, y) = xy();
    fib_general(n, &x, &y)
}

/// `L_n(x, y)` for `n >= 0`.
pub fn lucas_poly(n: i64) -> Result<MultiPoly> {
    let (x, y) = xy();
    lucas_general(n, &x, &y)
}

/// `P_n` of the given family, specialized to the variant's variable.
pub fn family_poly(family: Family, variant: Variant, n: i64) -> Result<MultiPoly> {
    let v = MultiPoly::var(&variant.variable());
    let (x, y) = match variant {
        Variant::Eta => (MultiPoly::one(), v),
        Variant::Zeta => (v, MultiPoly::one()),
    };
    match family {
        Family::Fibonacci => fib_general(n, &x, &y),
        Family::Lucas => lucas_general(n, &x, &y),
    }
}

/// The polynomial solution of the auxiliary ODE. On the zeta form only `n^2`
/// enters the ODE, so a negative index uses `|n|`.
pub fn polynomial_solution(id: FamilyId) -> Result<MultiPoly> {
    let n = id.fixed()?;
    let n = match id.variant {
        Variant::Zeta => n.abs(),
        Variant::Eta => n,
    };
    family_poly(id.family, id.variant, n)
}

pub fn aux_ode(id: FamilyId) -> AuxiliaryEquation {
    let var = id.variant.variable();
    let v = RatFunc::var(&var);
    let n = id.index.ratfunc();
    let one = RatFunc::one();
    let c = |k: i64| RatFunc::int(k);
    let lead = RatFunc::from_poly(leading_poly(id.variant));
    let (alpha_num, beta_num) = match (id.family, id.variant) {
        // eta(1+4eta) F'' - [(n-1) + 2(2n-5)eta] F' + (n-1)(n-2) F = 0
        (Family::Fibonacci, Variant::Eta) => (
            &(&n - &one) + &(&(&c(2) * &(&(&c(2) * &n) - &c(5))) * &v),
            -(&(&n - &one) * &(&n - &c(2))),
        ),
        // eta(1+4eta) L'' - [(n-1) + 2(2n-3)eta] L' + n(n-1) L = 0
        (Family::Lucas, Variant::Eta) => (
            &(&n - &one) + &(&(&c(2) * &(&(&c(2) * &n) - &c(3))) * &v),
            -(&n * &(&n - &one)),
        ),
        // (4+zeta^2) F'' + 3 zeta F' - (n^2-1) F = 0
        (Family::Fibonacci, Variant::Zeta) => (&c(-3) * &v, &(&n * &n) - &one),
        // (4+zeta^2) L'' + zeta L' - n^2 L = 0
        (Family::Lucas, Variant::Zeta) => (-v.clone(), &n * &n),
    };
    AuxiliaryEquation {
        variable: var,
        alpha: &alpha_num / &lead,
        beta: &beta_num / &lead,
        source: id,
    }
}

/// `a2 P'' + a1 P' + a0 P` for a univariate candidate `P`; zero iff `P`
/// solves the ODE.
pub fn ode_residual_exact(candidate: &MultiPoly, ode: &AuxiliaryEquation) -> MultiPoly {
    let (a2, a1, a0) = ode.cleared();
    let d1 = candidate.derivative(&ode.variable);
    let d2 = d1.derivative(&ode.variable);
    &(&(&a2 * &d2) + &(&a1 * &d1)) + &(&a0 * candidate)
}

/// The nonpolynomial companion solution:
/// `L_n(1,eta)/sqrt|1+4eta|`, `sqrt|1+4eta| F_n(1,eta)`,
/// `L_n(zeta,1)/sqrt(zeta^2+4)`, `sqrt(zeta^2+4) F_n(zeta,1)`.
pub fn second_solution(id: FamilyId) -> Result<Expr> {
    let n = id.fixed()?;
    let v = Expr::symbol(&id.variant.variable());
    let weight = match id.variant {
        Variant::Eta => Expr::sqrt_real(Expr::apply1(Func::Abs, Expr::one() + Expr::int(4) * v)),
        Variant::Zeta => Expr::sqrt_real(v.powi(2) + Expr::int(4)),
    };
    let n = match id.variant {
        Variant::Zeta => n.abs(),
        Variant::Eta => n,
    };
    Ok(match id.family {
        Family::Fibonacci => poly_to_expr(&family_poly(Family::Lucas, id.variant, n)?) / weight,
        Family::Lucas => weight * poly_to_expr(&family_poly(Family::Fibonacci, id.variant, n)?),
    })
}

/// Binet form in zeta: `F_n = (phi^n - psi^n)/(phi - psi)`, `L_n = phi^n + psi^n`
/// with `phi, psi = (zeta +- sqrt(zeta^2+4))/2`.
pub fn binet_closed_form(id: FamilyId) -> Result<Expr> {
    if id.variant != Variant::Zeta {
        return Err(Error::Unsupported("Binet closed form is defined for the zeta variant".into()));
    }
    let n = id.fixed()?;
    let z = Expr::symbol(&id.variant.variable());
    let root = Expr::sqrt_real(z.powi(2) + Expr::int(4));
    let half = Expr::frac(1, 2);
    let phi = &half * &(&z + &root);
    let psi = &half * &(&z - &root);
    Ok(match id.family {
        Family::Fibonacci => (phi.powi(n) - psi.powi(n)) / root,
        Family::Lucas => phi.powi(n) + psi.powi(n),
    })
}

/// Table selector for [`table_tsv`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableForm {
    Bivariate,
    Specialized(Variant),
}

/// Tab-separated `n<TAB>polynomial` rows.
pub fn table_tsv(family: Family, form: TableForm, n_max: i64) -> Result<String> {
    let start = match family {
        Family::Fibonacci => 1,
        Family::Lucas => 0,
    };
    if n_max < start {
        return Err(Error::OutOfRange { what: "table", value: n_max });
    }
    let mut out = String::from("n\tpolynomial\n");
    for n in start..=n_max {
        let p = match (family, form) {
            (Family::Fibonacci, TableForm::Bivariate) => fib_poly(n)?,
            (Family::Lucas, TableForm::Bivariate) => lucas_poly(n)?,
            (_, TableForm::Specialized(v)) => family_poly(family, v, n)?,
        };
        out.push_str(&format!("{}\t{}\n", n, p));
    }
    Ok(out)
}
