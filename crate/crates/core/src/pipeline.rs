//! End-to-end runs: reduce, balance, screen indices, solve, verify, and the
//! audits of printed closed forms. Stage failures are recorded, not raised.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ansatz::audit::{branch_matches, CoefficientAudit};
use crate::ansatz::{
    admissible_indices, balance_attempts, branch_solution, screen_index, solve_system, substitute_and_collect,
    AlgebraicSystem, AnsatzSpec, AnsatzTemplate, BalanceAttempt, IndexRule, Mode, Screening, SolutionBranch,
    SolveOptions, DEFAULT_N_MAX,
};
use crate::case::Case;
use crate::error::{Error, Result};
use crate::fiblucas::{aux_ode, FamilyId};
use crate::grammar::parse_expr;
use crate::reduction::{reduce_pde, OdeRecord, OdeSpec, PdeSpec};
use crate::symkernel::convert::to_ratfunc;
use crate::symkernel::{Expr, Symbol};
use crate::verify::{bind_parameters, emit_grid, pde_residual_grid, report_csv, Grid, ResidualOptions, ResidualReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub code: String,
    pub message: String,
}

impl StageError {
    pub fn new(stage: &str, e: &Error) -> StageError {
        StageError { stage: stage.into(), code: e.code().into(), message: e.to_string() }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    /// Inclusive candidate range for the index `n`.
    pub n_range: (i64, i64),
    /// Overrides the case's reference grid.
    pub grid: Option<Grid>,
    pub seed: u64,
    pub threads: usize,
    pub n_max: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { mode: Mode::Paper, n_range: (-4, 4), grid: None, seed: 0, threads: 1, n_max: DEFAULT_N_MAX }
    }
}

impl RunConfig {
    fn solve_options(&self) -> SolveOptions {
        SolveOptions { seed: self.seed, ..SolveOptions::default() }
    }
}

/// Serializable solution branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub case: String,
    pub mode: Mode,
    /// `None` for the system with symbolic index.
    pub n: Option<i64>,
    pub index: usize,
    /// S-expressions.
    pub assignments: BTreeMap<String, String>,
    pub display: BTreeMap<String, String>,
    pub minimal_polys: Vec<(String, String)>,
    pub free: Vec<String>,
    pub verified_exact: bool,
    pub residual_bound: Option<f64>,
}

impl BranchRecord {
    pub fn new(case: &str, n: Option<i64>, index: usize, b: &SolutionBranch) -> BranchRecord {
        BranchRecord {
            case: case.into(),
            mode: b.mode,
            n,
            index,
            assignments: b.assignments.iter().map(|(k, v)| (k.to_string(), v.to_sexpr())).collect(),
            display: b.assignments.iter().map(|(k, v)| (k.to_string(), v.to_infix())).collect(),
            minimal_polys: b.minimal_polys.iter().map(|(k, p)| (k.to_string(), p.to_string())).collect(),
            free: b.free.iter().map(|s| s.to_string()).collect(),
            verified_exact: b.verified_exact,
            residual_bound: b.residual_bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalanceOutcome {
    Balanced { order: u32 },
    Failed { error: StageError },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceRecord {
    pub outcome: BalanceOutcome,
    /// `(order, branches, nontrivial)` per attempted order.
    pub attempts: Vec<(u32, usize, bool)>,
}

/// Balancing with the template's family at symbolic index.
pub fn stage_balance(ode: &OdeSpec, template: &AnsatzTemplate, mode: Mode, n_max: u32, opts: &SolveOptions) -> BalanceRecord {
    let aux = aux_ode(FamilyId::symbolic(template.family, template.variant));
    match balance_attempts(ode, &aux, template.reciprocal, mode, n_max, opts) {
        Ok(attempts) => {
            let outcome = match attempts.last() {
                Some(a) if a.nontrivial => BalanceOutcome::Balanced { order: a.order },
                _ => BalanceOutcome::Failed { error: StageError::new("balance", &Error::BalanceFailure { n_max }) },
            };
            BalanceRecord { outcome, attempts: tuples(&attempts) }
        }
        Err(e) => BalanceRecord { outcome: BalanceOutcome::Failed { error: StageError::new("balance", &e) }, attempts: vec![] },
    }
}

fn tuples(a: &[BalanceAttempt]) -> Vec<(u32, usize, bool)> {
    a.iter().map(|a| (a.order, a.branches, a.nontrivial)).collect()
}

/// The coefficient system and its branches; `n = None` keeps the index
/// symbolic.
pub fn stage_solve(
    ode: &OdeSpec,
    template: &AnsatzTemplate,
    n: Option<i64>,
    mode: Mode,
    opts: &SolveOptions,
) -> Result<(AlgebraicSystem, Vec<SolutionBranch>)> {
    let aux = match n {
        Some(n) => template.aux(n),
        None => aux_ode(FamilyId::symbolic(template.family, template.variant)),
    };
    let sys = substitute_and_collect(ode, &AnsatzSpec::series(template.order, template.reciprocal, aux), mode)?;
    let branches = solve_system(&sys, opts)?;
    Ok((sys, branches))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenRecord {
    pub n: i64,
    #[serde(flatten)]
    pub outcome: Screening,
    pub branches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selected {
    pub n: i64,
    pub branch: usize,
    pub solution: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchResidual {
    pub n: i64,
    pub branch: usize,
    pub report: Option<ResidualReport>,
    pub error: Option<StageError>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrintedAudit {
    pub id: String,
    pub expr: Option<String>,
    pub report: Option<ResidualReport>,
    pub error: Option<StageError>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeAudit {
    pub printed: Vec<String>,
    /// Free symbols of the branches that assign a nonzero top coefficient.
    pub derived: Vec<Vec<String>>,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub case: String,
    pub label: String,
    pub mode: Mode,
    pub seed: u64,
    pub grid: String,
    pub ode: Option<OdeRecord>,
    pub candidates: Vec<i64>,
    pub admissible: Vec<i64>,
    pub balance: Option<BalanceRecord>,
    pub screening: Vec<ScreenRecord>,
    pub selected: Option<Selected>,
    pub selected_report: Option<ResidualReport>,
    pub branch_residuals: Vec<BranchResidual>,
    pub coefficient_audits: Vec<CoefficientAudit>,
    pub free_audit: Option<FreeAudit>,
    pub printed: Vec<PrintedAudit>,
    pub errors: Vec<StageError>,
}

pub struct PipelineRun {
    pub report: PipelineReport,
    pub branches: Vec<BranchRecord>,
    /// `x,t,u,residual,in_domain` for the selected solution.
    pub grid_csv: String,
}

impl PipelineRun {
    pub fn accepted(&self) -> bool {
        self.report.selected.is_some()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("branches.json"), to_json(&self.branches)?)?;
        std::fs::write(dir.join("report.json"), to_json(&self.report)?)?;
        std::fs::write(dir.join("grid.csv"), &self.grid_csv)?;
        Ok(())
    }
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Binds a branch's parameters into the PDE and the candidate. Parameters a
/// branch leaves open take the reference values; free unknowns take 1.
fn bind_branch(
    pde: &PdeSpec,
    u: &Expr,
    branch: &SolutionBranch,
    params: &BTreeMap<Symbol, f64>,
) -> (PdeSpec, Expr) {
    let mut numbers = params.clone();
    for s in &branch.free {
        numbers.entry(s.clone()).or_insert(1.0);
    }
    let lhs = bind_parameters(&pde.lhs, &branch.assignments, &numbers);
    let mut u = bind_parameters(u, &branch.assignments, &numbers);
    for s in u.free_symbols() {
        if !["x", "t", "pi"].contains(&s.name()) {
            let mut one = BTreeMap::new();
            one.insert(s, 1.0);
            u = bind_parameters(&u, &BTreeMap::new(), &one);
        }
    }
    let mut bound = pde.clone();
    bound.lhs = lhs;
    (bound, u)
}

/// Residual of one branch of the index-`n` system on `grid`.
pub fn branch_residual(
    case: &Case,
    n: i64,
    index: usize,
    branch: &SolutionBranch,
    grid: &Grid,
    threads: usize,
) -> Result<ResidualReport> {
    let u = branch_solution(&case.template, n, branch, &case.transform)?;
    let (pde, u) = bind_branch(&case.pde, &u, branch, &case.params);
    let opts = ResidualOptions {
        case: case.name().into(),
        solution: format!("n={} branch={}", n, index),
        keep_samples: false,
        threads,
    };
    pde_residual_grid(&pde, &u, grid, &opts)
}

/// The PDE with the reference parameters, or those of a printed caption.
fn printed_pde(case: &Case, id: &str) -> Result<PdeSpec> {
    let sol = case.file.printed_solutions.iter().find(|s| s.id == id);
    let mut exprs = BTreeMap::new();
    if let Some(sol) = sol {
        for (k, v) in &sol.params {
            if case.pde.parameters.iter().any(|p| p.name() == k) {
                exprs.insert(Symbol::new(k), parse_expr(v)?);
            }
        }
    }
    let mut pde = case.pde.clone();
    pde.lhs = bind_parameters(&pde.lhs, &exprs, &case.params);
    Ok(pde)
}

/// Residual audit of a printed closed form.
pub fn printed_residual(case: &Case, id: &str, grid: &Grid, threads: usize, keep_samples: bool) -> Result<ResidualReport> {
    let u = case.printed_solution(id)?;
    let pde = printed_pde(case, id)?;
    let opts = ResidualOptions { case: case.name().into(), solution: id.into(), keep_samples, threads };
    pde_residual_grid(&pde, &u, grid, &opts)
}

/// `x,t,u,in_domain` samples of a printed closed form.
pub fn plot_data(case: &Case, id: &str, grid: &Grid) -> Result<String> {
    emit_grid(&case.printed_solution(id)?, grid)
}

/// Audits the printed coefficient values against the symbolic-index system.
pub fn coefficient_audits(case: &Case, sys: &AlgebraicSystem, branches: &[SolutionBranch]) -> Result<Vec<CoefficientAudit>> {
    let mut out = Vec::new();
    for pc in &case.file.printed_coefficients {
        let target = Symbol::new(&pc.symbol);
        let printed = parse_expr(&pc.value)?;
        let audit = match &pc.equation {
            Some(label) => crate::ansatz::audit::audit_coefficient(sys, branches, label, &target, &printed)?,
            None => {
                let (r, atoms) = to_ratfunc(&printed)?;
                CoefficientAudit {
                    symbol: pc.symbol.clone(),
                    equation: String::new(),
                    single_equation: None,
                    printed: printed.to_infix(),
                    ratio: None,
                    single_equation_matches: false,
                    branch_matches: atoms.is_empty() && branch_matches(branches, &target, &r),
                }
            }
        };
        out.push(audit);
    }
    Ok(out)
}

fn free_audit(case: &Case, template: &AnsatzTemplate, branches: &[SolutionBranch]) -> FreeAudit {
    let top = template.ansatz(1).top().clone();
    let derived: Vec<Vec<String>> = branches
        .iter()
        .filter(|b| b.nonzero(&top))
        .map(|b| {
            let mut f: Vec<String> = b.free.iter().map(|s| s.to_string()).collect();
            f.sort();
            f
        })
        .collect();
    let mut printed = case.file.printed_free.clone();
    printed.sort();
    let matches = derived.iter().any(|d| *d == printed);
    FreeAudit { printed, derived, matches }
}

pub fn run_pipeline(case: &Case, cfg: &RunConfig) -> Result<PipelineRun> {
    let grid = cfg.grid.unwrap_or(case.grid);
    grid.validate()?;
    let opts = cfg.solve_options();
    let mut report = PipelineReport {
        case: case.name().into(),
        label: case.file.label.clone(),
        mode: cfg.mode,
        seed: cfg.seed,
        grid: grid.spec(),
        ode: None,
        candidates: (cfg.n_range.0..=cfg.n_range.1).collect(),
        admissible: vec![],
        balance: None,
        screening: vec![],
        selected: None,
        selected_report: None,
        branch_residuals: vec![],
        coefficient_audits: vec![],
        free_audit: None,
        printed: vec![],
        errors: vec![],
    };
    let mut branches_out = Vec::new();
    let mut grid_csv = String::from("x,t,u,residual,in_domain\n");

    for id in case.printed_ids() {
        let expr = case.printed_solution(&id).ok().map(|e| e.to_infix());
        let audit = match printed_residual(case, &id, &grid, cfg.threads, false) {
            Ok(r) => PrintedAudit { id, expr, report: Some(r), error: None },
            Err(e) => {
                let err = StageError::new("verify", &e);
                report.errors.push(StageError { stage: format!("verify:{}", id), ..err.clone() });
                PrintedAudit { id, expr, report: None, error: Some(err) }
            }
        };
        report.printed.push(audit);
    }

    let ode = match reduce_pde(&case.pde, &case.transform) {
        Ok(o) => o,
        Err(e) => {
            report.errors.push(StageError::new("reduce", &e));
            return Ok(PipelineRun { report, branches: branches_out, grid_csv });
        }
    };
    report.ode = Some(OdeRecord::from(&ode));

    let balance = stage_balance(&ode, &case.template, cfg.mode, cfg.n_max, &opts);
    if let BalanceOutcome::Failed { error } = &balance.outcome {
        report.errors.push(error.clone());
    }
    report.balance = Some(balance);

    match stage_solve(&ode, &case.template, None, cfg.mode, &opts) {
        Ok((sys, branches)) => {
            // Printed coefficient equations are labelled by powers of z alone.
            let audit_sys = match cfg.mode {
                Mode::Paper => Ok(sys),
                Mode::Strict => {
                    let aux = aux_ode(FamilyId::symbolic(case.template.family, case.template.variant));
                    let spec = AnsatzSpec::series(case.template.order, case.template.reciprocal, aux);
                    substitute_and_collect(&ode, &spec, Mode::Paper)
                }
            };
            match audit_sys.and_then(|s| coefficient_audits(case, &s, &branches)) {
                Ok(a) => report.coefficient_audits = a,
                Err(e) => report.errors.push(StageError::new("audit", &e)),
            }
            report.free_audit = Some(free_audit(case, &case.template, &branches));
            for (i, b) in branches.iter().enumerate() {
                branches_out.push(BranchRecord::new(case.name(), None, i, b));
            }
        }
        Err(e) => report.errors.push(StageError::new("solve", &e)),
    }

    let admissible = IndexRule::new(ode.m).and_then(|r| admissible_indices(r, report.candidates.clone()));
    let admissible = match admissible {
        Ok(a) => a,
        Err(e) => {
            report.errors.push(StageError::new("index", &e));
            return Ok(PipelineRun { report, branches: branches_out, grid_csv });
        }
    };
    report.admissible = admissible.clone();

    let ctx = case.screen_context(cfg.mode, opts.clone(), Some(grid));
    for n in admissible {
        let res = match screen_index(&ode, &case.template, n, &ctx) {
            Ok(r) => r,
            Err(e) => {
                report.errors.push(StageError { stage: format!("screen:{}", n), ..StageError::new("screen", &e) });
                continue;
            }
        };
        for (i, b) in res.branches.iter().enumerate() {
            branches_out.push(BranchRecord::new(case.name(), Some(n), i, b));
            let (rep, error) = match branch_residual(case, n, i, b, &grid, cfg.threads) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(StageError::new("verify", &e))),
            };
            report.branch_residuals.push(BranchResidual { n, branch: i, report: rep, error });
        }
        if let (Screening::Accepted { branch, solution }, None) = (&res.outcome, &report.selected) {
            report.selected = Some(Selected { n, branch: *branch, solution: solution.clone() });
            let b = &res.branches[*branch];
            let u = branch_solution(&case.template, n, b, &case.transform)?;
            let (pde, u) = bind_branch(&case.pde, &u, b, &case.params);
            let ro = ResidualOptions {
                case: case.name().into(),
                solution: format!("n={} branch={}", n, branch),
                keep_samples: true,
                threads: cfg.threads,
            };
            match pde_residual_grid(&pde, &u, &grid, &ro) {
                Ok(mut r) => {
                    grid_csv = report_csv(&r);
                    r.samples = None;
                    report.selected_report = Some(r);
                }
                Err(e) => report.errors.push(StageError::new("verify", &e)),
            }
        }
        report.screening.push(ScreenRecord { n, outcome: res.outcome, branches: res.branches.len() });
    }
    if report.selected.is_none() {
        report.errors.push(StageError {
            stage: "select".into(),
            code: "E_NO_SOLUTION".into(),
            message: "no admissible index yields an accepted branch".into(),
        });
    }
    Ok(PipelineRun { report, branches: branches_out, grid_csv })
}
