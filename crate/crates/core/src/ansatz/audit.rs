//! Comparison of printed coefficient values against the coefficient system.

use serde::{Deserialize, Serialize};

use super::{AlgebraicSystem, SolutionBranch};
use crate::error::{Error, Result};
use crate::symkernel::convert::{ratfunc_to_expr, to_ratfunc, to_ratfunc_exact};
use crate::symkernel::{Expr, MultiPoly, RatFunc, Symbol};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientAudit {
    pub symbol: String,
    pub equation: String,
    /// Value from the single equation solved alone, if it is linear.
    pub single_equation: Option<String>,
    pub printed: String,
    /// `single_equation / printed`.
    pub ratio: Option<String>,
    pub single_equation_matches: bool,
    /// Some emitted branch assigns exactly the printed value.
    pub branch_matches: bool,
}

/// Solves equation `label` alone for `target`, after removing monomial
/// factors in the other unknowns. `None` if it is not linear in `target`.
pub fn single_equation_value(sys: &AlgebraicSystem, label: &str, target: &Symbol) -> Result<Option<RatFunc>> {
    let i = sys
        .labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::Config(format!("no equation labelled `{}`", label)))?;
    let mut f = sys.equations[i].clone();
    for u in sys.unknowns.iter().filter(|u| *u != target) {
        if let Some(k) = f.index_of(u) {
            let e = f.terms().map(|(ex, _)| ex[k]).min().unwrap_or(0);
            if e > 0 {
                f = f.div_exact(&MultiPoly::var(u).pow(e)).expect("monomial factor divides");
            }
        }
    }
    if f.degree_in(target) != 1 {
        return Ok(None);
    }
    let c = f.coeffs_in(target);
    Ok(Some(RatFunc::new(-&c[0], c[1].clone())?))
}

/// True when some branch assigns `target` the rational value `printed`.
pub fn branch_matches(branches: &[SolutionBranch], target: &Symbol, printed: &RatFunc) -> bool {
    branches.iter().any(|b| match b.assignments.get(target) {
        Some(e) => to_ratfunc_exact(e).map(|r| &r == printed).unwrap_or(false),
        None => false,
    })
}

pub fn audit_coefficient(
    sys: &AlgebraicSystem,
    branches: &[SolutionBranch],
    label: &str,
    target: &Symbol,
    printed: &Expr,
) -> Result<CoefficientAudit> {
    let single = single_equation_value(sys, label, target)?;
    let (printed_r, atoms) = to_ratfunc(printed)?;
    let exact = atoms.is_empty();
    let single_matches = exact && single.as_ref() == Some(&printed_r);
    let ratio = match (&single, exact && !printed_r.is_zero()) {
        (Some(s), true) => Some(ratfunc_to_expr(&s.checked_div(&printed_r)?).to_infix()),
        _ => None,
    };
    Ok(CoefficientAudit {
        symbol: target.to_string(),
        equation: label.to_string(),
        single_equation: single.as_ref().map(|s| ratfunc_to_expr(s).to_infix()),
        printed: printed.to_infix(),
        ratio,
        single_equation_matches: single_matches,
        branch_matches: exact && branch_matches(branches, target, &printed_r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{solve_system, substitute_and_collect, AnsatzSpec, Mode, SolveOptions};
    use crate::fiblucas::{aux_ode, Family, FamilyId, Variant};
    use crate::grammar::{parse_expr, parse_pde};
    use crate::reduction::{reduce_pde, SimilarityTransform};

    #[test]
    fn printed_g0_differs_by_the_leading_coefficient_ratio() {
        let pde = parse_pde("u_t - (u^2)_xx - p*u + q*u^3 = 0").unwrap();
        let ode = reduce_pde(&pde, &SimilarityTransform::eta()).unwrap();
        let aux = aux_ode(FamilyId::symbolic(Family::Fibonacci, Variant::Eta));
        let sys = substitute_and_collect(&ode, &AnsatzSpec::series(1, false, aux), Mode::Paper).unwrap();
        let branches = solve_system(&sys, &SolveOptions::default()).unwrap();
        let printed = parse_expr("-8*eta*(2 - 3*n + n^2)/(3*q*x^2*(1 + eta))").unwrap();
        let a = audit_coefficient(&sys, &branches, "z^2", &Symbol::new("g0"), &printed).unwrap();
        assert!(!a.single_equation_matches);
        assert!(!a.branch_matches);
        let ratio = parse_expr(a.ratio.as_deref().unwrap()).unwrap();
        let expect = parse_expr("(1 + eta)/(1 + 4*eta)").unwrap();
        assert!(crate::symkernel::convert::equal_rational(&ratio, &expect).unwrap());
    }
}
