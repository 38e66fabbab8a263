//! Multi-start damped Gauss-Newton over the reals.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::symkernel::{MultiPoly, Symbol};

pub const STARTS: usize = 64;
pub const BOX: f64 = 5.0;
pub const TOLERANCE: f64 = 1e-12;
pub const DEDUP_RADIUS: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct NumericRoot {
    pub values: Vec<f64>,
    /// Max absolute equation value, each equation scaled to unit max
    /// coefficient.
    pub residual: f64,
}

struct Compiled {
    eqs: Vec<MultiPoly>,
    jac: Vec<Vec<MultiPoly>>,
}

/// Real roots of `eqs` in `unknowns` with every other symbol bound by
/// `params`. Deterministic for a fixed seed.
pub fn solve_numeric(
    eqs: &[MultiPoly],
    unknowns: &[Symbol],
    params: &HashMap<Symbol, f64>,
    seed: u64,
) -> Vec<NumericRoot> {
    let compiled = compile(eqs, unknowns, params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = unknowns.len();
    let mut roots: Vec<NumericRoot> = Vec::new();
    for _ in 0..STARTS {
        let start: Vec<f64> = (0..k).map(|_| rng.gen_range(-BOX..BOX)).collect();
        if let Some(root) = newton(&compiled, unknowns, start) {
            if !roots.iter().any(|r| distance(&r.values, &root.values) < DEDUP_RADIUS) {
                roots.push(root);
            }
        }
    }
    roots.sort_by(|a, b| a.values.partial_cmp(&b.values).unwrap_or(std::cmp::Ordering::Equal));
    roots
}

fn compile(eqs: &[MultiPoly], unknowns: &[Symbol], params: &HashMap<Symbol, f64>) -> Compiled {
    // bind parameters exactly where possible so the Jacobian stays polynomial
    let mut bound = Vec::with_capacity(eqs.len());
    for e in eqs {
        let mut p = e.clone();
        for v in e.used_vars() {
            if unknowns.contains(&v) {
                continue;
            }
            let val = params.get(&v).copied().unwrap_or(1.0);
            let r = num::BigRational::from_float(val).unwrap_or_else(|| num::BigRational::from_integer(1.into()));
            p = p.substitute(&v, &MultiPoly::constant(r));
        }
        let scale = p
            .terms()
            .map(|(_, c)| crate::symkernel::rational::to_f64(c).abs())
            .fold(0.0, f64::max);
        if scale > 0.0 {
            p = p.scale(&num::BigRational::from_float(1.0 / scale).unwrap());
        }
        bound.push(p);
    }
    let jac = bound
        .iter()
        .map(|p| unknowns.iter().map(|u| p.derivative(u)).collect())
        .collect();
    Compiled { eqs: bound, jac }
}

fn eval(p: &MultiPoly, unknowns: &[Symbol], x: &[f64]) -> f64 {
    p.eval_with(|s| unknowns.iter().position(|u| u == s).map(|i| x[i])).unwrap_or(f64::NAN)
}

fn residuals(c: &Compiled, unknowns: &[Symbol], x: &[f64]) -> DVector<f64> {
    DVector::from_iterator(c.eqs.len(), c.eqs.iter().map(|p| eval(p, unknowns, x)))
}

fn newton(c: &Compiled, unknowns: &[Symbol], mut x: Vec<f64>) -> Option<NumericRoot> {
    let k = unknowns.len();
    let mut f = residuals(c, unknowns, &x);
    for _ in 0..200 {
        let norm = f.amax();
        if !norm.is_finite() {
            return None;
        }
        if norm < TOLERANCE {
            return Some(NumericRoot { values: x, residual: norm });
        }
        let j = DMatrix::from_fn(c.eqs.len(), k, |r, col| eval(&c.jac[r][col], unknowns, &x));
        let svd = j.svd(true, true);
        let step = svd.solve(&(-&f), 1e-14).ok()?;
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            let ft = residuals(c, unknowns, &trial);
            if ft.norm() < f.norm() {
                x = trial;
                f = ft;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let norm = f.amax();
    (norm < TOLERANCE).then_some(NumericRoot { values: x, residual: norm })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
