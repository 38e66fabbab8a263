//! Floating-point evaluation with domain checks, the Gauss hypergeometric
//! function, and residual audits of closed-form solutions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiblucas::AuxiliaryEquation;
use crate::reduction::{parse_jet, OdeSpec, PdeSpec};
use crate::symkernel::convert::ratfunc_to_expr;
use crate::symkernel::rational;
use crate::symkernel::{diff, substitute, Expr, Func, Node, Symbol};

// ---- hypergeometric ----------------------------------------------------------

const SERIES_TOL: f64 = 1e-15;
const SERIES_MAX: usize = 10_000;

fn nonpositive_integer(v: f64) -> Option<u64> {
    (v <= 0.0 && v.fract() == 0.0).then_some((-v) as u64)
}

fn series(a: f64, b: f64, c: f64, z: f64, terms: usize) -> f64 {
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 0..terms {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term == 0.0 || term.abs() < SERIES_TOL * sum.abs() {
            break;
        }
    }
    sum
}

/// `2F1(a, b; c; z)` by the Gauss series, using the Pfaff transform
/// `(1-z)^(-a) 2F1(a, c-b; c; z/(z-1))` when it converges faster.
///
/// A nonpositive-integer `c` is accepted only when the series terminates
/// before the pole: `a` or `b` equal to `-m` with `m <= -c`.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let terminating = [a, b].iter().filter_map(|&v| nonpositive_integer(v)).min();
    if let Some(mc) = nonpositive_integer(c) {
        match terminating {
            Some(m) if m <= mc => {}
            _ => return Err(Error::Pole { c }),
        }
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if let Some(m) = terminating {
        return Ok(series(a, b, c, z, m as usize));
    }
    let w = z / (z - 1.0);
    if z.abs() < 1.0 && z.abs() <= w.abs() {
        return Ok(series(a, b, c, z, SERIES_MAX));
    }
    if w.abs() < 1.0 {
        return Ok((1.0 - z).powf(-a) * series(a, c - b, c, w, SERIES_MAX));
    }
    Err(Error::OutOfDomain { node: format!("hyp2f1({}, {}, {}, {})", a, b, c, z) })
}

// ---- evaluation --------------------------------------------------------------

/// Numeric bindings for the free symbols of an expression.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalPoint {
    pub bindings: BTreeMap<Symbol, f64>,
}

impl EvalPoint {
    pub fn new<I: IntoIterator<Item = (&'static str, f64)>>(it: I) -> EvalPoint {
        EvalPoint { bindings: it.into_iter().map(|(k, v)| (Symbol::new(k), v)).collect() }
    }

    pub fn with(mut self, sym: &Symbol, v: f64) -> EvalPoint {
        self.bindings.insert(sym.clone(), v);
        self
    }
}

fn ood(e: &Expr) -> Error {
    let mut s = e.to_infix();
    if s.len() > 120 {
        s.truncate(117);
        s.push_str("...");
    }
    Error::OutOfDomain { node: s }
}

/// IEEE evaluation. Real radicals of negative numbers, logarithms of
/// nonpositive numbers, division by zero and divergent hypergeometric
/// arguments are out of domain. `pi` evaluates to the constant unless bound.
pub fn eval_expr(e: &Expr, pt: &EvalPoint) -> Result<f64> {
    let v = match e.node() {
        Node::Num(r) => rational::to_f64(r),
        Node::Sym(s) => match pt.bindings.get(s) {
            Some(v) => *v,
            None if s.name() == "pi" => std::f64::consts::PI,
            None => return Err(Error::Config(format!("unbound symbol `{}`", s))),
        },
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval_expr(t, pt)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_expr(f, pt)?;
            }
            acc
        }
        Node::Pow(b, x) => {
            let bv = eval_expr(b, pt)?;
            match x.as_rational() {
                Some(r) if rational::is_integer(r) => {
                    let k = rational::as_i64(r).ok_or_else(|| ood(e))?;
                    if bv == 0.0 && k < 0 {
                        return Err(ood(e));
                    }
                    bv.powi(k as i32)
                }
                Some(r) => {
                    if bv < 0.0 || (bv == 0.0 && rational::to_f64(r) < 0.0) {
                        return Err(ood(e));
                    }
                    bv.powf(rational::to_f64(r))
                }
                None => {
                    let xv = eval_expr(x, pt)?;
                    if bv < 0.0 || (bv == 0.0 && xv <= 0.0) {
                        return Err(ood(e));
                    }
                    bv.powf(xv)
                }
            }
        }
        Node::Apply(f, args) => {
            let vals = args.iter().map(|a| eval_expr(a, pt)).collect::<Result<Vec<f64>>>()?;
            match f {
                Func::Sqrt => {
                    if vals[0] < 0.0 {
                        return Err(ood(e));
                    }
                    vals[0].sqrt()
                }
                Func::Abs => vals[0].abs(),
                Func::Sin => vals[0].sin(),
                Func::Cos => vals[0].cos(),
                Func::Arctan => vals[0].atan(),
                Func::Exp => vals[0].exp(),
                Func::Ln => {
                    if vals[0] <= 0.0 {
                        return Err(ood(e));
                    }
                    vals[0].ln()
                }
                Func::Hyp2f1 => match hyp2f1(vals[0], vals[1], vals[2], vals[3]) {
                    Err(Error::OutOfDomain { .. }) => return Err(ood(e)),
                    other => other?,
                },
                Func::Other(name) => {
                    return Err(Error::Unsupported(format!("cannot evaluate function `{}`", name)))
                }
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ood(e))
    }
}

fn in_domain(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::OutOfDomain { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

// ---- ODE residuals -----------------------------------------------------------

/// `candidate'' - alpha candidate' - beta candidate` at each point, max
/// absolute value over in-domain points.
pub fn aux_residual_numeric(aux: &AuxiliaryEquation, candidate: &Expr, points: &[EvalPoint]) -> Result<f64> {
    let v = &aux.variable;
    let d1 = diff(candidate, v)?;
    let d2 = diff(&d1, v)?;
    let residual = d2 - ratfunc_to_expr(&aux.alpha) * d1 - ratfunc_to_expr(&aux.beta) * candidate.clone();
    max_over(&residual, points)
}

/// Residual of a reduced ODE with `U = candidate(variable)`.
pub fn ode_residual_numeric(ode: &OdeSpec, candidate: &Expr, points: &[EvalPoint]) -> Result<f64> {
    let mut b = BTreeMap::new();
    let mut d = candidate.clone();
    for k in 0..=ode.m.max(2) {
        b.insert(ode.jet(k), d.clone());
        d = diff(&d, &ode.variable)?;
    }
    max_over(&substitute(&ode.reduced, &b), points)
}

fn max_over(residual: &Expr, points: &[EvalPoint]) -> Result<f64> {
    let mut best: Option<f64> = None;
    for p in points {
        if let Some(v) = in_domain(eval_expr(residual, p))? {
            best = Some(best.map_or(v.abs(), |b: f64| b.max(v.abs())));
        }
    }
    best.ok_or(Error::EmptyReport)
}

// ---- grids -------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        if self.points == 1 {
            return self.min;
        }
        self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64
    }
}

/// Tensor grid over `(x, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x: Axis,
    pub t: Axis,
}

impl Grid {
    pub fn new(x: (f64, f64, usize), t: (f64, f64, usize)) -> Result<Grid> {
        let g = Grid {
            x: Axis { min: x.0, max: x.1, points: x.2 },
            t: Axis { min: t.0, max: t.1, points: t.2 },
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("x", self.x), ("t", self.t)] {
            if a.points < 2 {
                return Err(Error::Config(format!("grid axis {} needs at least 2 points", name)));
            }
            if !(a.min.is_finite() && a.max.is_finite()) || a.min >= a.max {
                return Err(Error::Config(format!("grid axis {} has an empty range", name)));
            }
        }
        Ok(())
    }

    /// Parses `x=a:b:k,t=c:d:k`.
    pub fn parse(text: &str) -> Result<Grid> {
        let mut axes: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
        for part in text.split(',') {
            let bad = || Error::Config(format!("malformed grid axis `{}` (expected v=a:b:k)", part.trim()));
            let (name, spec) = part.split_once('=').ok_or_else(bad)?;
            let fields: Vec<&str> = spec.split(':').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(bad());
            }
            let a: f64 = fields[0].parse().map_err(|_| bad())?;
            let b: f64 = fields[1].parse().map_err(|_| bad())?;
            let k: usize = fields[2].parse().map_err(|_| bad())?;
            axes.insert(name.trim().to_string(), (a, b, k));
        }
        let get = |n: &str| axes.get(n).copied().ok_or_else(|| Error::Config(format!("grid axis {} missing", n)));
        Grid::new(get("x")?, get("t")?)
    }

    /// `(x, t)` in t-major order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.x.points * self.t.points);
        for j in 0..self.t.points {
            for i in 0..self.x.points {
                out.push((self.x.value(i), self.t.value(j)));
            }
        }
        out
    }

    pub fn spec(&self) -> String {
        format!(
            "x={}:{}:{},t={}:{}:{}",
            self.x.min, self.x.max, self.x.points, self.t.min, self.t.max, self.t.points
        )
    }
}

/// Substitutes expression-valued parameters, then numeric ones.
pub fn bind_parameters(e: &Expr, exprs: &BTreeMap<Symbol, Expr>, numbers: &BTreeMap<Symbol, f64>) -> Expr {
    let mut all: BTreeMap<Symbol, Expr> = exprs.clone();
    for (k, v) in numbers {
        all.entry(k.clone()).or_insert_with(|| Expr::num(float_rational(*v)));
    }
    substitute(e, &all)
}

/// Exact rational with the same decimal text as `v`.
pub fn float_rational(v: f64) -> rational::Rational {
    rational::parse(&format!("{}", v))
        .or_else(|| rational::Rational::from_float(v))
        .unwrap_or_else(|| rational::int(0))
}

// ---- PDE residuals -----------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub t: f64,
    pub u: Option<f64>,
    pub residual: Option<f64>,
    pub in_domain: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub case: String,
    pub solution: String,
    pub grid: Grid,
    pub grid_spec: String,
    pub points: usize,
    pub in_domain: usize,
    pub out_of_domain: usize,
    pub max_abs_residual: f64,
    pub mean_abs_residual: f64,
    /// Points where symbolic and finite-difference residuals disagree by more
    /// than `1e-4` relative.
    pub fd_disagreements: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Sample>>,
}

impl ResidualReport {
    pub fn coverage(&self) -> f64 {
        self.in_domain as f64 / self.points as f64
    }
}

const FD_REL: f64 = 1e-4;

/// Finite-difference jets at `(x, t)` by 4th-order central stencils.
fn fd_jets(u: &Expr, pt: &EvalPoint, xs: &Symbol, ts: &Symbol, h: (f64, f64), counts: &[Vec<u32>]) -> Result<Vec<f64>> {
    let (x0, t0) = (pt.bindings[xs], pt.bindings[ts]);
    let f = |dx: f64, dt: f64| -> Result<f64> {
        let p = pt.clone().with(xs, x0 + dx).with(ts, t0 + dt);
        eval_expr(u, &p)
    };
    let w1 = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
    let w2 = [(-2.0, -1.0 / 12.0), (-1.0, 16.0 / 12.0), (0.0, -30.0 / 12.0), (1.0, 16.0 / 12.0), (2.0, -1.0 / 12.0)];
    let mut out = Vec::with_capacity(counts.len());
    for c in counts {
        let v = match (c[0], c[1]) {
            (0, 0) => f(0.0, 0.0)?,
            (1, 0) => w1.iter().map(|(k, w)| f(k * h.0, 0.0).map(|v| w * v)).sum::<Result<f64>>()? / h.0,
            (0, 1) => w1.iter().map(|(k, w)| f(0.0, k * h.1).map(|v| w * v)).sum::<Result<f64>>()? / h.1,
            (2, 0) => w2.iter().map(|(k, w)| f(k * h.0, 0.0).map(|v| w * v)).sum::<Result<f64>>()? / (h.0 * h.0),
            (0, 2) => w2.iter().map(|(k, w)| f(0.0, k * h.1).map(|v| w * v)).sum::<Result<f64>>()? / (h.1 * h.1),
            (1, 1) => {
                let mut acc = 0.0;
                for (i, wi) in w1 {
                    for (j, wj) in w1 {
                        acc += wi * wj * f(i * h.0, j * h.1)?;
                    }
                }
                acc / (h.0 * h.1)
            }
            _ => return Err(Error::Unsupported("finite differences above second order".into())),
        };
        out.push(v);
    }
    Ok(out)
}

/// Options for [`pde_residual_grid`].
#[derive(Clone, Debug, Default)]
pub struct ResidualOptions {
    pub case: String,
    pub solution: String,
    pub keep_samples: bool,
    /// Worker threads; `0` or `1` evaluates sequentially.
    pub threads: usize,
}

struct PointResult {
    u: Option<f64>,
    residual: Option<f64>,
    disagree: bool,
}

/// Audits `candidate(x, t)` against `pde` on `grid`. Every symbol other than
/// `x, t` must already be bound in `candidate` and `pde`.
pub fn pde_residual_grid(pde: &PdeSpec, candidate: &Expr, grid: &Grid, opts: &ResidualOptions) -> Result<ResidualReport> {
    grid.validate()?;
    let xs = pde.independents[0].clone();
    let ts = pde.independents[1].clone();
    let mut jets: Vec<(Symbol, Vec<u32>)> = Vec::new();
    for s in pde.lhs.free_symbols() {
        if let Some(c) = parse_jet(&s, &pde.unknown, &pde.independents) {
            jets.push((s, c));
        }
    }
    let mut jet_exprs = BTreeMap::new();
    for (s, c) in &jets {
        let mut d = candidate.clone();
        for (k, &n) in c.iter().enumerate() {
            for _ in 0..n {
                d = diff(&d, &pde.independents[k])?;
            }
        }
        jet_exprs.insert(s.clone(), d);
    }
    let symbolic = substitute(&pde.lhs, &jet_exprs);
    let counts: Vec<Vec<u32>> = jets.iter().map(|(_, c)| c.clone()).collect();
    let h = (1e-4 * (grid.x.max - grid.x.min), 1e-4 * (grid.t.max - grid.t.min));

    let eval_point = |&(x, t): &(f64, f64)| -> Result<PointResult> {
        let pt = EvalPoint::default().with(&xs, x).with(&ts, t);
        let u = in_domain(eval_expr(candidate, &pt))?;
        let ra = match u {
            Some(_) => in_domain(eval_expr(&symbolic, &pt))?,
            None => None,
        };
        let mut disagree = false;
        if let Some(ra) = ra {
            if let Ok(vals) = fd_jets(candidate, &pt, &xs, &ts, h, &counts) {
                let mut p2 = pt.clone();
                for ((s, _), v) in jets.iter().zip(&vals) {
                    p2 = p2.with(s, *v);
                }
                if let Some(rb) = in_domain(eval_expr(&pde.lhs, &p2))? {
                    let scale = 1.0 + vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    disagree = (ra - rb).abs() > FD_REL * scale;
                }
            }
        }
        Ok(PointResult { u, residual: ra, disagree })
    };

    let pts = grid.points();
    let results: Vec<PointResult> = if opts.threads > 1 {
        let chunk = pts.len().div_ceil(opts.threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = pts
                .chunks(chunk)
                .map(|c| scope.spawn(|| c.iter().map(eval_point).collect::<Result<Vec<_>>>()))
                .collect();
            let mut all = Vec::with_capacity(pts.len());
            for h in handles {
                all.extend(h.join().expect("residual worker panicked")?);
            }
            Ok::<_, Error>(all)
        })?
    } else {
        pts.iter().map(eval_point).collect::<Result<Vec<_>>>()?
    };

    let mut max_abs = 0.0f64;
    let mut sum = 0.0f64;
    let mut inside = 0usize;
    let mut disagreements = 0usize;
    let mut samples = Vec::new();
    for (&(x, t), r) in pts.iter().zip(&results) {
        if let Some(v) = r.residual {
            inside += 1;
            max_abs = max_abs.max(v.abs());
            sum += v.abs();
        }
        disagreements += r.disagree as usize;
        if opts.keep_samples {
            samples.push(Sample { x, t, u: r.u, residual: r.residual, in_domain: r.residual.is_some() });
        }
    }
    if inside == 0 {
        return Err(Error::EmptyReport);
    }
    Ok(ResidualReport {
        case: opts.case.clone(),
        solution: opts.solution.clone(),
        grid: *grid,
        grid_spec: grid.spec(),
        points: pts.len(),
        in_domain: inside,
        out_of_domain: pts.len() - inside,
        max_abs_residual: max_abs,
        mean_abs_residual: sum / inside as f64,
        fd_disagreements: disagreements,
        samples: opts.keep_samples.then_some(samples),
    })
}

// ---- CSV ---------------------------------------------------------------------

fn fmt17(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{:.16e}", v),
        None => String::new(),
    }
}

/// Samples `solution(x, t)` on `grid`. Columns `x,t,u,in_domain`, t-major.
pub fn emit_grid(solution: &Expr, grid: &Grid) -> Result<String> {
    grid.validate()?;
    let (xs, ts) = (Symbol::new("x"), Symbol::new("t"));
    let mut out = String::from("x,t,u,in_domain\n");
    let mut inside = 0usize;
    for (x, t) in grid.points() {
        let pt = EvalPoint::default().with(&xs, x).with(&ts, t);
        let u = in_domain(eval_expr(solution, &pt))?;
        inside += u.is_some() as usize;
        let _ = writeln!(out, "{},{},{},{}", fmt17(Some(x)), fmt17(Some(t)), fmt17(u), u.is_some());
    }
    if inside == 0 {
        return Err(Error::EmptyReport);
    }
    Ok(out)
}

/// Samples of a report as CSV: `x,t,u,residual,in_domain`.
pub fn report_csv(report: &ResidualReport) -> String {
    let mut out = String::from("x,t,u,residual,in_domain\n");
    for s in report.samples.iter().flatten() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt17(Some(s.x)),
            fmt17(Some(s.t)),
            fmt17(s.u),
            fmt17(s.residual),
            s.in_domain
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_expr, parse_pde};

    #[test]
    fn hyp2f1_at_zero_and_log_identity() {
        assert_eq!(hyp2f1(0.3, 0.2, 1.5, 0.0).unwrap(), 1.0);
        let v = hyp2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!((v - 1.3862943611198906).abs() < 1e-13);
    }

    #[test]
    fn pfaff_matches_direct_series() {
        let via = hyp2f1(0.3, 0.7, 1.1, -3.0).unwrap();
        let direct = 4.0f64.powf(-0.3) * series(0.3, 1.1 - 0.7, 1.1, 0.75, SERIES_MAX);
        assert!((via - direct).abs() < 1e-12);
    }

    #[test]
    fn hyp2f1_poles_and_termination() {
        assert!(matches!(hyp2f1(0.5, 0.5, -2.0, 0.3), Err(Error::Pole { .. })));
        // b = 0 terminates before the pole at c = -4
        assert_eq!(hyp2f1(-5.0, 0.0, -4.0, 0.7).unwrap(), 1.0);
        assert!(matches!(hyp2f1(0.5, 0.5, 1.5, 3.0), Err(Error::OutOfDomain { .. })));
        // polynomial case is valid anywhere: 2F1(-1, b; c; z) = 1 - b z / c
        assert!((hyp2f1(-1.0, 2.0, 4.0, 7.0).unwrap() - (1.0 - 3.5)).abs() < 1e-15);
    }

    #[test]
    fn eval_domain_checks() {
        let e = parse_expr("sqrt(-4*t - x^2)").unwrap();
        let pt = EvalPoint::new([("x", 1.0), ("t", 1.0)]);
        assert!(matches!(eval_expr(&e, &pt), Err(Error::OutOfDomain { .. })));
        let a = parse_expr("arctan(x/sqrt(-4*t - x^2))").unwrap();
        let v = eval_expr(&a, &EvalPoint::new([("x", 1.0), ("t", -1.0)])).unwrap();
        assert!((v - 0.5235987755982989).abs() < 1e-12);
        let b = parse_expr("eta*(1 + 4*eta)").unwrap();
        assert_eq!(eval_expr(&b, &EvalPoint::new([("eta", 0.5)])).unwrap(), 1.5);
    }

    #[test]
    fn grid_parsing_and_order() {
        let g = Grid::parse("x=0:1:2,t=5:6:3").unwrap();
        assert_eq!(g.points(), vec![(0.0, 5.0), (1.0, 5.0), (0.0, 5.5), (1.0, 5.5), (0.0, 6.0), (1.0, 6.0)]);
        assert!(Grid::parse("x=0:1:1,t=0:1:2").is_err());
        assert!(Grid::parse("x=0:1").is_err());
    }

    #[test]
    fn zero_candidate_has_zero_residual() {
        let pde = parse_pde("u_t - (u^2)_xx - u + u^3 = 0").unwrap();
        let g = Grid::parse("x=1:2:5,t=0.1:1:5").unwrap();
        let r = pde_residual_grid(&pde, &Expr::zero(), &g, &ResidualOptions::default()).unwrap();
        assert_eq!(r.max_abs_residual, 0.0);
        assert_eq!(r.in_domain, 25);
    }

    #[test]
    fn non_solution_is_reported_not_rejected() {
        let pde = parse_pde("u_t - (u^2)_xx - u + u^3 = 0").unwrap();
        let cand = parse_expr("exp(t)*sin(x)").unwrap();
        let g = Grid::parse("x=1:2:6,t=0.1:1:6").unwrap();
        let r = pde_residual_grid(&pde, &cand, &g, &ResidualOptions::default()).unwrap();
        assert!(r.max_abs_residual > 1e-3);
        assert_eq!(r.fd_disagreements, 0);
    }

    #[test]
    fn threaded_report_is_identical() {
        let pde = parse_pde("u_t - (u^2)_xx - u + u^3 = 0").unwrap();
        let cand = parse_expr("sqrt(x)*cos(t)").unwrap();
        let g = Grid::parse("x=0.5:2:9,t=0:1:7").unwrap();
        let a = pde_residual_grid(&pde, &cand, &g, &ResidualOptions::default()).unwrap();
        let b = pde_residual_grid(&pde, &cand, &g, &ResidualOptions { threads: 4, ..Default::default() }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_grid_csv() {
        let g = Grid::parse("x=0:1:2,t=0:1:2").unwrap();
        let csv = emit_grid(&Expr::one(), &g).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[1..].iter().all(|l| l.contains(",1.0000000000000000e0,true")));
    }

    #[test]
    fn all_out_of_domain_is_an_error() {
        let g = Grid::parse("x=1:2:2,t=1:2:2").unwrap();
        let e = parse_expr("sqrt(-t)").unwrap();
        assert!(matches!(emit_grid(&e, &g), Err(Error::EmptyReport)));
    }
}
