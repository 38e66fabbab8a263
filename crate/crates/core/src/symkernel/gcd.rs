//! Multivariate GCD over Q by recursive primitive pseudo-remainder sequences.
//!
//! Results are monic in the lex order of the (unified) variable ordering;
//! `gcd(0, 0) = 0`.

use std::collections::HashMap;
use std::sync::Arc;

use num::traits::Zero;

use super::poly::MultiPoly;
use super::rational::Rational;
use super::symbol::Symbol;

pub fn gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let (a, b) = MultiPoly::unify(a, b);
    gcd_same(&a, &b)
}

fn gcd_same(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one().with_vars(&Arc::new(a.vars().to_vec()));
    }
    if a == b {
        return a.monic();
    }
    let ua = a.used_indices();
    let ub = b.used_indices();
    if let Some(&v) = ua.iter().find(|i| !ub.contains(i)) {
        return gcd_with_coeffs(b, &a.coeffs_at(v));
    }
    if let Some(&v) = ub.iter().find(|i| !ua.contains(i)) {
        return gcd_with_coeffs(a, &b.coeffs_at(v));
    }
    // both polynomials mention exactly the same variables
    let v = ua[0];
    let ca = content_at(a, v);
    let cb = content_at(b, v);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd_same(&ca, &cb);
    if images_coprime(&pa, &pb, v) {
        return c.monic();
    }
    let g = subresultant_prs(pa, pb, v);
    (&c * &g).monic()
}

/// True when the images of `a, b` at some point of the other variables,
/// taken where both leading coefficients in `v` survive, are coprime. A
/// common factor of positive degree in `v` would survive in every such image,
/// so `true` proves the primitive parts coprime; `false` decides nothing.
fn images_coprime(a: &MultiPoly, b: &MultiPoly, v: usize) -> bool {
    let main = a.vars()[v].clone();
    let others: Vec<Symbol> = a.used_vars().into_iter().filter(|s| *s != main).collect();
    if others.is_empty() {
        return false;
    }
    let (da, db) = (a.degree_at(v), b.degree_at(v));
    for trial in 0..3i64 {
        let values: HashMap<Symbol, Rational> = others
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), Rational::from_integer((2 + 5 * trial + 3 * i as i64).into())))
            .collect();
        let (ia, ib) = (a.eval_partial(&values), b.eval_partial(&values));
        if ia.degree_in(&main) != da || ib.degree_in(&main) != db {
            continue;
        }
        return gcd(&ia, &ib).degree_in(&main) == 0;
    }
    false
}

/// gcd(p, c_0, c_1, ...)
fn gcd_with_coeffs(p: &MultiPoly, coeffs: &[MultiPoly]) -> MultiPoly {
    let mut g = p.clone();
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        g = gcd_same(&g, &c.with_vars(&Arc::new(g.vars().to_vec())));
        if g.is_constant() {
            break;
        }
    }
    g.monic()
}

/// Content with respect to variable `v`: gcd of the coefficients.
pub(crate) fn content_at(p: &MultiPoly, v: usize) -> MultiPoly {
    let coeffs = p.coeffs_at(v);
    let mut g = MultiPoly::zero().with_vars(&Arc::new(p.vars().to_vec()));
    for c in coeffs.iter().rev() {
        if c.is_zero() {
            continue;
        }
        g = gcd_same(&g, c);
        if g.is_constant() {
            return MultiPoly::one().with_vars(&Arc::new(p.vars().to_vec()));
        }
    }
    g
}

fn primitive_part_at(p: &MultiPoly, v: usize) -> MultiPoly {
    if p.is_zero() {
        return p.clone();
    }
    let c = content_at(p, v);
    p.div_exact(&c).expect("content divides")
}

/// Pseudo-remainder of `a` by `b` with respect to variable `v`.
pub fn prem_at(a: &MultiPoly, b: &MultiPoly, v: usize) -> MultiPoly {
    let db = b.degree_at(v);
    let bc = b.coeffs_at(v);
    let lc = bc.last().unwrap().clone();
    let vars = Arc::new(a.vars().to_vec());
    let mut r = a.clone();
    let mut steps = 0;
    let da = a.degree_at(v);
    while !r.is_zero() && r.degree_at(v) >= db {
        let dr = r.degree_at(v);
        let rc = r.coeffs_at(v);
        let lr = rc.last().unwrap().clone();
        let mut shift = vec![0u32; vars.len()];
        shift[v] = dr - db;
        let mono = MultiPoly::from_terms(vars.to_vec(), [(shift, num::BigRational::from_integer(1.into()))]);
        r = &(&lc * &r) - &(&(&lr * &mono) * b);
        steps += 1;
    }
    // normalise to the classical prem = lc^(da-db+1) a mod b
    let expected = if da >= db { da - db + 1 } else { 0 };
    if steps < expected {
        r = &r * &lc.pow(expected - steps);
    }
    r
}

pub fn prem(a: &MultiPoly, b: &MultiPoly, sym: &Symbol) -> MultiPoly {
    let (a, b) = MultiPoly::unify(a, b);
    match a.index_of(sym) {
        Some(v) => prem_at(&a, &b, v),
        None => {
            if b.contains_var(sym) {
                a
            } else {
                MultiPoly::zero()
            }
        }
    }
}

/// Subresultant PRS; only the last nonzero remainder has its content removed,
/// so no gcds of coefficients are taken along the way.
fn subresultant_prs(a: MultiPoly, b: MultiPoly, v: usize) -> MultiPoly {
    let (mut a, mut b) = if a.degree_at(v) >= b.degree_at(v) {
        (a, b)
    } else {
        (b, a)
    };
    let one = MultiPoly::one().with_vars(&Arc::new(a.vars().to_vec()));
    let (mut g, mut h) = (one.clone(), one.clone());
    loop {
        if b.is_zero() {
            return primitive_part_at(&a, v).monic();
        }
        if b.degree_at(v) == 0 {
            return one;
        }
        let d = a.degree_at(v) - b.degree_at(v);
        let r = prem_at(&a, &b, v);
        let divisor = &g * &h.pow(d);
        a = b;
        b = r.div_exact(&divisor).expect("subresultant division is exact");
        g = a.coeffs_at(v).last().unwrap().clone();
        h = match d {
            0 => h,
            1 => g.clone(),
            _ => g.pow(d).div_exact(&h.pow(d - 1)).expect("subresultant division is exact"),
        };
    }
}

/// Least common multiple, monic.
pub fn lcm(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() || b.is_zero() {
        return MultiPoly::zero();
    }
    let g = gcd(a, b);
    (a * &b.div_exact(&g).expect("gcd divides")).monic()
}

/// True when `d` divides `p` exactly.
pub fn divides(d: &MultiPoly, p: &MultiPoly) -> bool {
    if d.is_zero() {
        return p.is_zero();
    }
    p.div_exact(d).is_some() || p.constant_value().is_some_and(|c| c.is_zero())
}
