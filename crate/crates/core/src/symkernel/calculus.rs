//! Differentiation and substitution on [`Expr`].

use std::collections::BTreeMap;

use super::expr::{Expr, Func, Node};
use super::symbol::Symbol;
use crate::error::KernelError;

/// Exact derivative of `e` with respect to `sym`.
pub fn diff(e: &Expr, sym: &Symbol) -> Result<Expr, KernelError> {
    if !e.contains(sym) {
        return Ok(Expr::zero());
    }
    Ok(match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Sym(s) => {
            if s == sym {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(ts) => {
            let mut parts = Vec::with_capacity(ts.len());
            for t in ts {
                parts.push(diff(t, sym)?);
            }
            Expr::add_all(parts)
        }
        Node::Mul(fs) => {
            let mut parts = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let d = diff(f, sym)?;
                if d.is_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> = fs.clone();
                factors[i] = d;
                parts.push(Expr::mul_all(factors));
            }
            Expr::add_all(parts)
        }
        Node::Pow(b, ex) => {
            let db = diff(b, sym)?;
            if !ex.contains(sym) {
                let em1 = Expr::add_all([ex.clone(), Expr::int(-1)]);
                Expr::mul_all([ex.clone(), Expr::pow(b, &em1), db])
            } else {
                let de = diff(ex, sym)?;
                let ln_b = Expr::apply1(Func::Ln, b.clone());
                let inner = Expr::add_all([de * ln_b, Expr::mul_all([ex.clone(), db, b.recip()])]);
                Expr::mul_all([e.clone(), inner])
            }
        }
        Node::Apply(func, args) => diff_apply(func, args, sym)?,
    })
}

fn diff_apply(func: &Func, args: &[Expr], sym: &Symbol) -> Result<Expr, KernelError> {
    if let Func::Hyp2f1 = func {
        let (a, b, c, z) = (&args[0], &args[1], &args[2], &args[3]);
        if a.contains(sym) || b.contains(sym) || c.contains(sym) {
            return Err(KernelError::UnsupportedFunction(
                "hyp2f1 (parameter derivative)".to_string(),
            ));
        }
        let dz = diff(z, sym)?;
        let one = Expr::one();
        let shifted = Expr::hyp2f1(a + &one, b + &one, c + &one, z.clone());
        return Ok(Expr::mul_all([a.clone(), b.clone(), c.recip(), shifted, dz]));
    }
    if let Func::Other(name) = func {
        return Err(KernelError::UnsupportedFunction(name.to_string()));
    }
    let u = &args[0];
    let du = diff(u, sym)?;
    let outer = match func {
        Func::Sqrt => Expr::frac(1, 2) * Expr::sqrt(u.clone()).recip(),
        Func::Abs => Expr::apply1(Func::Abs, u.clone()) * u.recip(),
        Func::Sin => Expr::apply1(Func::Cos, u.clone()),
        Func::Cos => -Expr::apply1(Func::Sin, u.clone()),
        Func::Arctan => (Expr::one() + u.powi(2)).recip(),
        Func::Exp => Expr::apply1(Func::Exp, u.clone()),
        Func::Ln => u.recip(),
        Func::Hyp2f1 | Func::Other(_) => unreachable!(),
    };
    Ok(outer * du)
}

/// Simultaneous substitution followed by canonical folding.
pub fn substitute(e: &Expr, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
    if bindings.is_empty() {
        return e.clone();
    }
    e.map_bottom_up(&mut |n: &Expr| match n.node() {
        Node::Sym(s) => bindings.get(s).cloned().unwrap_or_else(|| n.clone()),
        _ => n.clone(),
    })
}

pub fn substitute1(e: &Expr, sym: &Symbol, value: &Expr) -> Expr {
    let mut m = BTreeMap::new();
    m.insert(sym.clone(), value.clone());
    substitute(e, &m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: &str) -> Symbol {
        Symbol::new(n)
    }

    #[test]
    fn power_rule() {
        let x = Expr::sym("x");
        assert_eq!(diff(&x.powi(3), &s("x")).unwrap(), Expr::int(3) * x.powi(2));
    }

    #[test]
    fn arctan_rule() {
        let x = Expr::sym("x");
        let d = diff(&Expr::apply1(Func::Arctan, x.clone()), &s("x")).unwrap();
        assert_eq!(d, (Expr::one() + x.powi(2)).recip());
    }

    #[test]
    fn hyp2f1_rule_structure() {
        let z = Expr::sym("z");
        let h = Expr::hyp2f1(Expr::int(1), Expr::int(1), Expr::int(2), z.clone());
        let d = diff(&h, &s("z")).unwrap();
        let expect = Expr::frac(1, 2) * Expr::hyp2f1(Expr::int(2), Expr::int(2), Expr::int(3), z);
        assert_eq!(d, expect);
    }

    #[test]
    fn unknown_function_is_rejected() {
        let g = Expr::apply(Func::Other(s("g")), vec![Expr::sym("x")]);
        assert!(matches!(diff(&g, &s("x")), Err(KernelError::UnsupportedFunction(_))));
        // constant with respect to another symbol is fine
        assert!(diff(&g, &s("t")).unwrap().is_zero());
    }

    #[test]
    fn substitution_examples() {
        let eta = Expr::sym("eta");
        let t_over_x2 = Expr::sym("t") / Expr::sym("x").powi(2);
        let mut b = BTreeMap::new();
        b.insert(s("eta"), t_over_x2);
        assert_eq!(
            substitute(&eta.powi(2), &b),
            Expr::sym("t").powi(2) * Expr::sym("x").powi(-4)
        );
        assert_eq!(substitute(&Expr::sym("x"), &BTreeMap::new()), Expr::sym("x"));
        let e = eta.clone() * (Expr::one() + Expr::int(4) * eta.clone());
        assert_eq!(substitute1(&e, &s("eta"), &Expr::one()), Expr::int(5));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let e = Expr::sym("x") - Expr::sym("y");
        let mut b = BTreeMap::new();
        b.insert(s("x"), Expr::sym("y"));
        b.insert(s("y"), Expr::sym("x"));
        assert_eq!(substitute(&e, &b), Expr::sym("y") - Expr::sym("x"));
    }
}
