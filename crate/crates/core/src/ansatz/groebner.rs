//! Buchberger's algorithm over `K[u_1, ..., u_k]` with `K` the field of
//! rational functions in every other symbol.
//!
//! Coefficients are kept fraction-free as polynomials in the field
//! generators; every intermediate result is made primitive, so bases agree
//! with the field-coefficient ones up to units of `K`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::symkernel::gcd::gcd;
use crate::symkernel::{MultiPoly, Symbol};

pub const DEFAULT_BUDGET: usize = 500;

type Mono = Vec<u32>;

/// Polynomial in the unknowns with coefficients in `K`, lex ordered with the
/// first unknown largest.
#[derive(Clone, Debug, PartialEq)]
pub struct KPoly {
    terms: BTreeMap<Mono, MultiPoly>,
}

impl KPoly {
    pub fn from_poly(p: &MultiPoly, unknowns: &[Symbol]) -> KPoly {
        let terms = p.collect_by(unknowns).into_iter().filter(|(_, c)| !c.is_zero()).collect();
        KPoly { terms }
    }

    pub fn to_poly(&self, unknowns: &[Symbol]) -> MultiPoly {
        let mut acc = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (u, &k) in unknowns.iter().zip(m) {
                if k > 0 {
                    t = &t * &MultiPoly::var(u).pow(k);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no unknown occurs (a nonzero element of `K` is a unit).
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&k| k == 0))
    }

    pub fn lead(&self) -> Option<(&Mono, &MultiPoly)> {
        self.terms.iter().next_back()
    }

    fn lm(&self) -> &Mono {
        self.lead().unwrap().0
    }

    fn lc(&self) -> &MultiPoly {
        self.lead().unwrap().1
    }

    fn scaled_shift(&self, c: &MultiPoly, shift: &[u32]) -> KPoly {
        KPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.iter().zip(shift).map(|(a, b)| a + b).collect(), k * c))
                .collect(),
        }
    }

    fn sub(&self, other: &KPoly) -> KPoly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let v = match terms.remove(m) {
                Some(a) => &a - c,
                None => -c,
            };
            if !v.is_zero() {
                terms.insert(m.clone(), v);
            }
        }
        KPoly { terms }
    }

    /// Divides out the gcd of the coefficients and fixes the sign and scale of
    /// the leading coefficient.
    pub fn primitive(&self) -> KPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = MultiPoly::zero();
        for c in self.terms.values().rev() {
            g = gcd(&g, c);
            if g.is_constant() {
                break;
            }
        }
        let lc = self.lc().div_exact(&g).expect("content divides");
        let scale = lc.leading_coeff().recip();
        KPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.div_exact(&g).expect("content divides").scale(&scale)))
                .collect(),
        }
    }
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm_mono(a: &[u32], b: &[u32]) -> Mono {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn diff_mono(a: &[u32], b: &[u32]) -> Mono {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Full reduction of `f` modulo `basis`.
pub fn reduce(f: &KPoly, basis: &[KPoly]) -> KPoly {
    let mut rem = KPoly { terms: BTreeMap::new() };
    let mut f = f.clone();
    while let Some((m, c)) = f.lead().map(|(m, c)| (m.clone(), c.clone())) {
        match basis.iter().find(|g| divides(g.lm(), &m)) {
            Some(g) => {
                // lc(g) f - c x^(m - lm g) g, with the remainder scaled alike
                let shift = diff_mono(&m, g.lm());
                let lcg = g.lc().clone();
                f = f.scaled_shift(&lcg, &vec![0; m.len()]).sub(&g.scaled_shift(&c, &shift));
                rem = rem.scaled_shift(&lcg, &vec![0; m.len()]);
            }
            None => {
                f.terms.remove(&m);
                rem.terms.insert(m, c);
            }
        }
    }
    rem.primitive()
}

fn spoly(f: &KPoly, g: &KPoly) -> KPoly {
    let l = lcm_mono(f.lm(), g.lm());
    let a = f.scaled_shift(g.lc(), &diff_mono(&l, f.lm()));
    let b = g.scaled_shift(f.lc(), &diff_mono(&l, g.lm()));
    a.sub(&b)
}

/// Reduced lex Groebner basis of `polys` over `K[unknowns]`. Fails with
/// [`Error::GroebnerBudget`] after `budget` S-polynomial reductions.
pub fn groebner(polys: &[KPoly], budget: usize) -> Result<Vec<KPoly>> {
    let mut basis: Vec<KPoly> = Vec::new();
    for p in polys {
        let r = reduce(p, &basis);
        if !r.is_zero() {
            if r.is_constant() {
                return Ok(vec![r]);
            }
            basis.push(r);
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    let mut spent = 0usize;
    while let Some((i, j)) = pairs.pop() {
        let (fi, fj) = (&basis[i], &basis[j]);
        // coprime leading monomials reduce to zero
        if fi.lm().iter().zip(fj.lm()).all(|(a, b)| *a == 0 || *b == 0) {
            continue;
        }
        spent += 1;
        if spent > budget {
            return Err(Error::GroebnerBudget { budget });
        }
        let r = reduce(&spoly(fi, fj), &basis);
        if r.is_zero() {
            continue;
        }
        if r.is_constant() {
            return Ok(vec![r]);
        }
        let k = basis.len();
        basis.push(r);
        for i in 0..k {
            pairs.insert(0, (i, k));
        }
    }
    Ok(interreduce(basis))
}

fn interreduce(mut basis: Vec<KPoly>) -> Vec<KPoly> {
    // drop elements whose leading monomial is divisible by another's
    basis.sort_by(|a, b| a.lm().cmp(b.lm()));
    let mut minimal: Vec<KPoly> = Vec::new();
    for g in basis {
        if !minimal.iter().any(|h| divides(h.lm(), g.lm())) {
            minimal.push(g);
        }
    }
    let mut out = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<KPoly> = minimal
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| g.clone())
            .collect();
        out.push(reduce(&minimal[i], &others));
    }
    out.retain(|g| !g.is_zero());
    out.sort_by(|a, b| a.lm().cmp(b.lm()));
    out
}

/// Convenience wrapper on plain polynomials.
pub fn groebner_lex(polys: &[MultiPoly], unknowns: &[Symbol], budget: usize) -> Result<Vec<MultiPoly>> {
    let k: Vec<KPoly> = polys.iter().map(|p| KPoly::from_poly(p, unknowns)).collect();
    Ok(groebner(&k, budget)?.iter().map(|g| g.to_poly(unknowns)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::rational::int;

    fn v(n: &str) -> MultiPoly {
        MultiPoly::var(&Symbol::new(n))
    }
    fn s(n: &str) -> Symbol {
        Symbol::new(n)
    }

    #[test]
    fn redundant_generator_collapses() {
        let x = v("x");
        let g = groebner_lex(&[&x.pow(2) - &MultiPoly::one(), &x - &MultiPoly::one()], &[s("x")], 100).unwrap();
        assert_eq!(g, vec![&x - &MultiPoly::one()]);
    }

    #[test]
    fn hand_buchberger_two_generators() {
        let (x, y) = (v("x"), v("y"));
        let polys = [&(&x * &y) - &MultiPoly::one(), &y - &x];
        let g = groebner_lex(&polys, &[s("y"), s("x")], 100).unwrap();
        assert_eq!(g, vec![&x.pow(2) - &MultiPoly::one(), &y - &x]);
    }

    #[test]
    fn field_parameters_are_units() {
        let g = groebner_lex(&[&v("g1") * &v("beta")], &[s("g1")], 100).unwrap();
        assert_eq!(g, vec![v("g1")]);
    }

    #[test]
    fn inconsistent_system_gives_unit() {
        let x = v("x");
        let g = groebner_lex(&[x.clone(), &x - &MultiPoly::one()], &[s("x")], 100).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g[0].is_constant());
    }

    #[test]
    fn budget_is_enforced() {
        let (x, y, z) = (v("x"), v("y"), v("z"));
        let polys = [
            &(&x.pow(3) - &(&y * &z).scale(&int(2))) + &z,
            &(&y.pow(3) - &(&x * &z)) + &x.pow(2),
            &(&z.pow(3) - &(&x * &y)) - &MultiPoly::int(3),
        ];
        let r = groebner_lex(&polys, &[s("x"), s("y"), s("z")], 1);
        assert!(matches!(r, Err(Error::GroebnerBudget { budget: 1 })));
    }
}
