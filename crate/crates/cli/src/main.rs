//! `fiblucas`: command-line front end for the reduction, ansatz and audit
//! pipeline.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use fiblucas_core::ansatz::{AnsatzTemplate, Mode, SolutionBranch, SolveOptions, DEFAULT_N_MAX};
use fiblucas_core::case::Case;
use fiblucas_core::fiblucas::{table_tsv, Family, TableForm, Variant};
use fiblucas_core::grammar::parse_expr;
use fiblucas_core::pipeline::{
    branch_residual, plot_data, printed_residual, run_pipeline, stage_balance, stage_solve, to_json, BalanceOutcome,
    BranchRecord, RunConfig,
};
use fiblucas_core::reduction::{reduce_pde, OdeRecord, OdeSpec};
use fiblucas_core::symkernel::{parse_sexpr, Symbol};
use fiblucas_core::verify::{bind_parameters, pde_residual_grid, Grid, ResidualOptions};
use fiblucas_core::{Error, Result};

const OUT_ENV: &str = "FIBLUCAS_OUT";
const THREADS_ENV: &str = "FIBLUCAS_THREADS";

#[derive(Parser)]
#[command(name = "fiblucas", version, about = "Fibonacci/Lucas auxiliary-equation solutions of nonlinear PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    #[value(alias = "fibonacci")]
    F,
    #[value(alias = "lucas")]
    L,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::F => Family::Fibonacci,
            FamilyArg::L => Family::Lucas,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Eta,
    Zeta,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Eta => Variant::Eta,
            VariantArg::Zeta => Variant::Zeta,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableVariant {
    Eta,
    Zeta,
    Bivariate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Strict,
    Paper,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Paper => Mode::Paper,
        }
    }
}

/// Where the PDE comes from: a case file or inline text.
#[derive(Args, Clone, Debug, Default)]
struct SourceArgs {
    /// Bundled case name (`case1`..`case4`) or path to a case JSON file.
    #[arg(long, conflicts_with_all = ["pde", "transform"])]
    case: Option<String>,
    /// PDE text, e.g. `u_t - (u^2)_xx - p*u + q*u^3 = 0`.
    #[arg(long, requires = "transform")]
    pde: Option<String>,
    /// Similarity variable, e.g. `eta = t/x^2` or `zeta = x/sqrt(t)`.
    #[arg(long, requires = "pde")]
    transform: Option<String>,
    #[arg(long, value_enum, ignore_case = true)]
    family: Option<FamilyArg>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Use powers `z^-k` instead of `z^k`.
    #[arg(long)]
    reciprocal: bool,
    /// Reference parameter value for inline runs, `name=value`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Grid `x=a:b:k,t=c:d:k`; defaults to the case's reference window.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
}

#[derive(Args, Clone, Debug)]
struct CommonArgs {
    #[arg(long, value_enum, default_value = "paper")]
    mode: ModeArg,
    /// Seed for the numeric fallback solver.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; `FIBLUCAS_OUT` applies when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; `FIBLUCAS_THREADS` applies when absent.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate Fibonacci or Lucas polynomials as TSV.
    Table {
        #[arg(long, value_enum, ignore_case = true)]
        family: FamilyArg,
        #[arg(long, value_enum, default_value = "bivariate")]
        variant: TableVariant,
        #[arg(long, default_value_t = 12)]
        n_max: i64,
    },
    /// Reduce a PDE to an ODE; writes `ode.json`.
    Reduce {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Find the smallest ansatz order with a nonzero top coefficient.
    Balance {
        #[command(flatten)]
        source: SourceArgs,
        /// Reduced ODE from `reduce` instead of a PDE.
        #[arg(long)]
        ode: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve the coefficient system; writes `branches.json`.
    Solve {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        ode: Option<PathBuf>,
        /// Concrete index; symbolic `n` when absent.
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Residual audits of printed solutions, solved branches or an expression.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        /// Printed solution id of the case; all of them when absent.
        #[arg(long)]
        solution: Option<String>,
        /// Branches from `solve` to audit instead.
        #[arg(long)]
        branches: Option<PathBuf>,
        /// Candidate `u(x, t)` to audit instead.
        #[arg(long)]
        expr: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sample printed solutions on a grid as CSV.
    PlotData {
        #[command(flatten)]
        source: SourceArgs,
        /// Printed solution id; all of them when absent.
        #[arg(long)]
        solution: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run every stage; writes `branches.json`, `report.json`, `grid.csv`.
    Pipeline {
        #[command(flatten)]
        source: SourceArgs,
        /// Run every bundled case, each into its own subdirectory.
        #[arg(long, conflicts_with_all = ["case", "pde"])]
        all: bool,
        /// JSON run configuration; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Inclusive index candidates `a..b`.
        #[arg(long, allow_hyphen_values = true)]
        n_range: Option<String>,
        #[arg(long)]
        n_max: Option<u32>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    /// Ran, but a stage reported failure.
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::from(2)
        }
    }
}

fn error_line(e: &Error) -> String {
    let msg = e.to_string().replace(['\n', '\r'], " ");
    format!("ERROR {}: {}", e.code(), msg)
}

fn run(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Table { family, variant, n_max } => {
            let form = match variant {
                TableVariant::Bivariate => TableForm::Bivariate,
                TableVariant::Eta => TableForm::Specialized(Variant::Eta),
                TableVariant::Zeta => TableForm::Specialized(Variant::Zeta),
            };
            print!("{}", table_tsv(family.into(), form, n_max)?);
            Ok(Status::Ok)
        }
        Command::Reduce { source, common } => {
            let case = load_source(&source)?;
            let ode = reduce_pde(&case.pde, &case.transform)?;
            emit(&common, "ode.json", &to_json(&OdeRecord::from(&ode))?)?;
            Ok(Status::Ok)
        }
        Command::Balance { source, ode, n_max, common } => {
            let (ode, template) = ode_and_template(&source, ode.as_deref())?;
            let opts = SolveOptions { seed: common.seed, ..SolveOptions::default() };
            let record = stage_balance(&ode, &template, common.mode.into(), n_max, &opts);
            emit(&common, "balance.json", &to_json(&record)?)?;
            match record.outcome {
                BalanceOutcome::Balanced { .. } => Ok(Status::Ok),
                BalanceOutcome::Failed { error } => {
                    eprintln!("ERROR {}: {}", error.code, error.message);
                    Ok(Status::Failed)
                }
            }
        }
        Command::Solve { source, ode, n, common } => {
            let (ode, template) = ode_and_template(&source, ode.as_deref())?;
            let name = source.case.clone().unwrap_or_else(|| "inline".into());
            let opts = SolveOptions { seed: common.seed, ..SolveOptions::default() };
            let (_, branches) = stage_solve(&ode, &template, n, common.mode.into(), &opts)?;
            let records: Vec<BranchRecord> =
                branches.iter().enumerate().map(|(i, b)| BranchRecord::new(&name, n, i, b)).collect();
            emit(&common, "branches.json", &to_json(&records)?)?;
            Ok(Status::Ok)
        }
        Command::Verify { source, solution, branches, expr, common } => verify(&source, solution, branches, expr, &common),
        Command::PlotData { source, solution, common } => {
            let case = load_source(&source)?;
            let grid = grid_of(&source, &case)?;
            let ids = match solution {
                Some(id) => vec![id],
                None => case.printed_ids(),
            };
            if ids.is_empty() {
                return Err(Error::Config(format!("case {} has no printed solutions", case.name())));
            }
            let dir = out_dir(&common);
            std::fs::create_dir_all(&dir)?;
            let threads = threads(&common);
            let mut status = Status::Ok;
            for id in ids {
                match plot_data(&case, &id, &grid) {
                    Ok(csv) => {
                        std::fs::write(dir.join(format!("{}.csv", id)), &csv)?;
                        let inside = csv.lines().skip(1).filter(|l| l.ends_with("true")).count();
                        let coverage = inside as f64 / grid.points().len() as f64;
                        let residual = match printed_residual(&case, &id, &grid, threads, false) {
                            Ok(r) => {
                                std::fs::write(dir.join(format!("{}.report.json", id)), to_json(&r)?)?;
                                format!("{:e}", r.max_abs_residual)
                            }
                            Err(e) => error_line(&e),
                        };
                        println!("{} coverage={:.4} max_abs_residual={}", id, coverage, residual);
                    }
                    Err(e) => {
                        println!("{} {}", id, error_line(&e));
                        status = Status::Failed;
                    }
                }
            }
            Ok(status)
        }
        Command::Pipeline { source, all, config, n_range, n_max, common } => {
            pipeline(source, all, config.as_deref(), n_range, n_max, &common)
        }
    }
}

fn out_dir(common: &CommonArgs) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn threads(common: &CommonArgs) -> usize {
    common
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
}

/// Prints `text`, and writes it to `<out>/<file>` when an output directory
/// is configured.
fn emit(common: &CommonArgs, file: &str, text: &str) -> Result<()> {
    if common.out.is_some() || std::env::var_os(OUT_ENV).is_some() {
        let dir = out_dir(common);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join(file), text)?;
    }
    print!("{}", text);
    Ok(())
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("parameter `{}` is not name=value", item)))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("parameter `{}` is not numeric", item)))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn variant_of(source: &SourceArgs, transform: &str) -> Result<Variant> {
    if let Some(v) = source.variant {
        return Ok(v.into());
    }
    let var = transform.split_once('=').map(|(v, _)| v.trim()).unwrap_or("");
    match var {
        "eta" => Ok(Variant::Eta),
        "zeta" => Ok(Variant::Zeta),
        _ => Err(Error::Config("cannot infer --variant from the transform; name it eta or zeta".into())),
    }
}

fn load_source(source: &SourceArgs) -> Result<Case> {
    match (&source.case, &source.pde, &source.transform) {
        (Some(c), None, None) => {
            let mut case = Case::resolve(c)?;
            if let Some(f) = source.family {
                case.template.family = f.into();
            }
            if source.reciprocal {
                case.template.reciprocal = true;
            }
            for (k, v) in parse_params(&source.params)? {
                case.params.insert(Symbol::new(&k), v);
            }
            Ok(case)
        }
        (None, Some(pde), Some(tf)) => {
            let template = AnsatzTemplate {
                family: source.family.map(Family::from).unwrap_or(Family::Fibonacci),
                variant: variant_of(source, tf)?,
                reciprocal: source.reciprocal,
                order: 1,
            };
            let grid = match &source.grid {
                Some(g) => Grid::parse(g)?,
                None => return Err(Error::Config("inline runs need --grid".into())),
            };
            Case::inline(pde, tf, template, grid, &parse_params(&source.params)?)
        }
        _ => Err(Error::Config("give exactly one of --case or --pde with --transform".into())),
    }
}

fn grid_of(source: &SourceArgs, case: &Case) -> Result<Grid> {
    match &source.grid {
        Some(g) => Grid::parse(g),
        None => Ok(case.grid),
    }
}

fn ode_and_template(source: &SourceArgs, ode: Option<&Path>) -> Result<(OdeSpec, AnsatzTemplate)> {
    match ode {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
            let record: OdeRecord = serde_json::from_str(&text)?;
            let spec = record.to_spec()?;
            let variant = match source.variant {
                Some(v) => v.into(),
                None => match spec.variable.name() {
                    "eta" => Variant::Eta,
                    "zeta" => Variant::Zeta,
                    v => return Err(Error::Config(format!("cannot infer --variant from ODE variable `{}`", v))),
                },
            };
            let template = AnsatzTemplate {
                family: source.family.map(Family::from).unwrap_or(Family::Fibonacci),
                variant,
                reciprocal: source.reciprocal,
                order: 1,
            };
            Ok((spec, template))
        }
        None => {
            let case = load_source(source)?;
            Ok((reduce_pde(&case.pde, &case.transform)?, case.template))
        }
    }
}

/// Rebuilds a branch from its JSON record; exact-only fields stay empty.
fn branch_from_record(r: &BranchRecord) -> Result<SolutionBranch> {
    let mut assignments = BTreeMap::new();
    for (k, v) in &r.assignments {
        assignments.insert(Symbol::new(k), parse_sexpr(v)?);
    }
    Ok(SolutionBranch {
        mode: r.mode,
        assignments,
        rational: BTreeMap::new(),
        minimal_polys: vec![],
        free: r.free.iter().map(|s| Symbol::new(s)).collect(),
        verified_exact: r.verified_exact,
        residual_bound: r.residual_bound,
    })
}

fn verify(
    source: &SourceArgs,
    solution: Option<String>,
    branches: Option<PathBuf>,
    expr: Option<String>,
    common: &CommonArgs,
) -> Result<Status> {
    let case = load_source(source)?;
    let grid = grid_of(source, &case)?;
    let threads = threads(common);
    let mut reports = Vec::new();
    let mut failed = false;
    let mut push = |label: String, r: Result<fiblucas_core::verify::ResidualReport>| match r {
        Ok(r) => reports.push(serde_json::json!({ "id": label, "report": r })),
        Err(e) => {
            failed = true;
            reports.push(serde_json::json!({ "id": label, "error": { "code": e.code(), "message": e.to_string() } }))
        }
    };
    if let Some(text) = expr {
        let u = parse_expr(&text)?;
        let numbers: BTreeMap<Symbol, f64> = case.params.clone();
        let u = bind_parameters(&u, &BTreeMap::new(), &numbers);
        let mut pde = case.pde.clone();
        pde.lhs = bind_parameters(&pde.lhs, &BTreeMap::new(), &numbers);
        let opts = ResidualOptions { case: case.name().into(), solution: text.clone(), keep_samples: false, threads };
        push(text, pde_residual_grid(&pde, &u, &grid, &opts));
    } else if let Some(path) = branches {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
        let records: Vec<BranchRecord> = serde_json::from_str(&text)?;
        for r in &records {
            let label = format!("n={} branch={}", r.n.map(|n| n.to_string()).unwrap_or_else(|| "n".into()), r.index);
            let result = match r.n {
                Some(n) => branch_from_record(r).and_then(|b| branch_residual(&case, n, r.index, &b, &grid, threads)),
                None => Err(Error::Config("branch has a symbolic index; solve with --n".into())),
            };
            push(label, result);
        }
    } else {
        let ids = match solution {
            Some(id) => vec![id],
            None => case.printed_ids(),
        };
        for id in ids {
            let r = printed_residual(&case, &id, &grid, threads, false);
            push(id, r);
        }
    }
    emit(common, "report.json", &to_json(&reports)?)?;
    Ok(if failed { Status::Failed } else { Status::Ok })
}

/// Optional JSON run configuration.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    case: Option<String>,
    pde: Option<String>,
    transform: Option<String>,
    family: Option<Family>,
    variant: Option<Variant>,
    reciprocal: Option<bool>,
    mode: Option<Mode>,
    n_range: Option<String>,
    n_max: Option<u32>,
    grid: Option<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

fn parse_n_range(text: &str) -> Result<(i64, i64)> {
    let bad = || Error::Config(format!("n-range `{}` is not a..b", text));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn pipeline(
    mut source: SourceArgs,
    all: bool,
    config: Option<&Path>,
    n_range: Option<String>,
    n_max: Option<u32>,
    common: &CommonArgs,
) -> Result<Status> {
    let file: ConfigFile = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {}", p.display(), e)))?;
            serde_json::from_str(&text)?
        }
        None => ConfigFile::default(),
    };
    let mut common = common.clone();
    if source.case.is_none() && source.pde.is_none() {
        source.case = file.case.clone();
        source.pde = file.pde.clone();
        source.transform = file.transform.clone();
    }
    if source.family.is_none() {
        source.family = file.family.map(|f| match f {
            Family::Fibonacci => FamilyArg::F,
            Family::Lucas => FamilyArg::L,
        });
    }
    if source.variant.is_none() {
        source.variant = file.variant.map(|v| match v {
            Variant::Eta => VariantArg::Eta,
            Variant::Zeta => VariantArg::Zeta,
        });
    }
    source.reciprocal |= file.reciprocal.unwrap_or(false);
    source.grid = source.grid.or(file.grid.clone());
    for (k, v) in &file.params {
        source.params.push(format!("{}={}", k, v));
    }
    if common.out.is_none() {
        common.out = file.out.clone();
    }
    // The config file's mode applies only where the flag kept its default.
    let mode = match (common.mode, file.mode) {
        (ModeArg::Paper, Some(m)) => m,
        (m, _) => m.into(),
    };
    let seed = if common.seed == 0 { file.seed.unwrap_or(0) } else { common.seed };
    let n_range = match n_range.or(file.n_range.clone()) {
        Some(r) => parse_n_range(&r)?,
        None => RunConfig::default().n_range,
    };
    let cfg = RunConfig {
        mode,
        n_range,
        grid: source.grid.as_deref().map(Grid::parse).transpose()?,
        seed,
        threads: threads(&common),
        n_max: n_max.or(file.n_max).unwrap_or(DEFAULT_N_MAX),
    };
    let out = out_dir(&common);
    let cases = if all { Case::bundled_all()? } else { vec![load_source(&source)?] };
    let mut status = Status::Ok;
    for case in &cases {
        let run = run_pipeline(case, &cfg)?;
        let dir = if all { out.join(case.name()) } else { out.clone() };
        run.write(&dir)?;
        let selected = match &run.report.selected {
            Some(s) => format!("selected n={} branch={}", s.n, s.branch),
            None => "no accepted branch".to_string(),
        };
        println!("{} {} -> {}", case.name(), selected, dir.display());
        for e in &run.report.errors {
            println!("  {} [{}] {}", e.code, e.stage, e.message.replace('\n', " "));
        }
        if !run.accepted() {
            status = Status::Failed;
        }
    }
    Ok(status)
}
