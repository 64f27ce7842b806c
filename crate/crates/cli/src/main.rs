use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wamls::bounds::{amls_bound, brute_bound, BoundParams};
use wamls::driver::{approximate_extension, approximate_membership, verify_run, MembershipMode, RunReport};
use wamls::families::{
    build_unweighted_covering, build_unweighted_extension, family_cost, parse_dump, verify_covering, verify_extension,
    write_dump, FamilyDump, Verdict,
};
use wamls::limits::Limits;
use wamls::oracles::{
    BranchingHsOracle, BranchingVcOracle, ExactOracle, ExtensionOracle, LocalRatioFvs, LocalRatioHs, LocalRatioVc,
};
use wamls::problems::{emit_instance, parse_instance, random_instance, Instance, ProblemKind, RandomSpec, SetSystem};
use wamls::suites::{self, Suite, SuiteConfig};
use wamls::table::{self, Preset};
use wamls::weighted::{build_weighted_covering, build_weighted_extension, CoveringMode};
use wamls::Error;

/// Weighted approximate monotone local search: running-time bounds,
/// covering and extension families, and approximation drivers.
#[derive(Parser, Debug)]
#[command(name = "wamls", version)]
struct Cli {
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate brute(beta) and amls(alpha, c, beta)
    Bound(BoundArgs),
    /// Print a bound table for a preset or a custom grid
    Table(TableArgs),
    /// Build or verify covering and extension families
    #[command(subcommand)]
    Family(FamilyCommand),
    /// Approximate a weighted instance
    Solve(SolveArgs),
    /// Run a self-check suite
    Verify(VerifyArgs),
    /// Write a seeded random instance
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// Approximation factor of the extension oracle
    #[arg(long)]
    alpha: f64,
    /// Per-query cost base of the extension oracle
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Target approximation factor
    #[arg(long)]
    beta: f64,
    /// Absolute tolerance on amls
    #[arg(long, default_value_t = 1e-6)]
    precision: f64,
    /// Output format
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// One of vc, fvs, tfvs, 3hs, 4hs, 5hs
    #[arg(long, conflicts_with_all = ["alphas", "cs", "betas"])]
    preset: Option<String>,
    /// Comma-separated alpha values of a custom grid
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Comma-separated c values of a custom grid
    #[arg(long, value_delimiter = ',')]
    cs: Vec<f64>,
    /// Comma-separated beta values of a custom grid
    #[arg(long, value_delimiter = ',')]
    betas: Vec<f64>,
    /// Absolute tolerance on amls
    #[arg(long, default_value_t = 1e-6)]
    precision: f64,
    /// Output format
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyKind {
    Covering,
    Extension,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Schedule,
    Fixed,
    Exhaustive,
}

/// Where element weights come from.
#[derive(Args, Debug)]
struct WeightSource {
    /// Instance file supplying the weights
    #[arg(long, conflicts_with_all = ["n", "weights"])]
    instance: Option<PathBuf>,
    /// Universe size with unit weights
    #[arg(long, conflicts_with = "weights")]
    n: Option<usize>,
    /// Comma-separated positive weights
    #[arg(long, value_delimiter = ',')]
    weights: Vec<u64>,
}

#[derive(Subcommand, Debug)]
enum FamilyCommand {
    /// Construct a family and write it as a dump
    Build(FamilyBuildArgs),
    /// Exhaustively check a dumped family against weights
    Verify(FamilyVerifyArgs),
}

#[derive(Args, Debug)]
struct FamilyBuildArgs {
    /// Family type
    #[arg(long, value_enum)]
    kind: FamilyKind,
    #[command(flatten)]
    source: WeightSource,
    /// Covering factor, or the oracle factor for extension families
    #[arg(long)]
    alpha: f64,
    /// Oracle cost base (extension families)
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Target factor (extension families)
    #[arg(long)]
    beta: Option<f64>,
    /// Cost slack (extension families)
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    /// Covering construction mode (schedule or fixed)
    #[arg(long, value_enum, default_value_t = ModeArg::Schedule)]
    mode: ModeArg,
    /// Build the uniform family directly, without weight classes
    #[arg(long)]
    unweighted: bool,
    /// Dump file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FamilyVerifyArgs {
    /// Dump file to check
    #[arg(long)]
    dump: PathBuf,
    #[command(flatten)]
    source: WeightSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    Membership,
    Extension,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Instance file
    #[arg(long)]
    instance: PathBuf,
    /// Oracle model
    #[arg(long, value_enum, default_value_t = Model::Extension)]
    model: Model,
    /// exact, branching or local-ratio (extension model)
    #[arg(long, default_value = "local-ratio")]
    oracle: String,
    /// Approximation factor (membership model)
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Covering family mode (membership model)
    #[arg(long, value_enum, default_value_t = ModeArg::Schedule)]
    mode: ModeArg,
    /// Target factor (extension model)
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    /// Cost slack of the extension family
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    /// Cost base reported for the exact oracle
    #[arg(long)]
    c: Option<f64>,
    /// Seed echoed into the report
    #[arg(long)]
    seed: Option<u64>,
    /// Compare against an exhaustive optimum
    #[arg(long)]
    verify: bool,
    /// Report file (default: stdout)
    #[arg(long)]
    report: Option<PathBuf>,
    /// Query ledger as JSON lines
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// bounds, families, oracles, end-to-end or all
    #[arg(long, default_value = "all")]
    suite: String,
    /// Seed for the random cases
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest universe size drawn
    #[arg(long, default_value_t = 10)]
    max_n: usize,
    /// Random cases per suite
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// wvc, whs, wfvs or wpvc
    #[arg(long)]
    problem: String,
    /// Number of vertices or elements
    #[arg(long)]
    n: usize,
    /// Edge probability, or sets per element and unit of d
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    /// Smallest weight
    #[arg(long, default_value_t = 1)]
    wmin: u64,
    /// Largest weight
    #[arg(long, default_value_t = 100)]
    wmax: u64,
    /// Maximum set size (whs)
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Verification(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, Error> {
    let text = read(path)?;
    parse_instance(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Domain(format!("{}:{line}: {msg}", path.display())),
        other => other,
    })
}

fn weights_from(src: &WeightSource) -> Result<Vec<u64>, Error> {
    if let Some(path) = &src.instance {
        return Ok(load_instance(path)?.weights().to_vec());
    }
    if let Some(n) = src.n {
        return Ok(vec![1; n]);
    }
    if src.weights.is_empty() {
        return Err(Error::Domain("give one of --instance, --n or --weights".into()));
    }
    if src.weights.contains(&0) {
        return Err(Error::Domain("weights must be ≥ 1".into()));
    }
    Ok(src.weights.clone())
}

fn covering_mode(mode: ModeArg) -> Result<CoveringMode, Error> {
    match mode {
        ModeArg::Schedule => Ok(CoveringMode::Schedule),
        ModeArg::Fixed => Ok(CoveringMode::Fixed),
        ModeArg::Exhaustive => Err(Error::Domain("exhaustive mode applies to `solve` only".into())),
    }
}

fn cmd_bound(a: &BoundArgs) -> CmdResult {
    let brute = brute_bound(a.beta)?;
    let params = BoundParams::new(a.alpha, a.c, a.beta).with_precision(a.precision);
    let sp = amls_bound(params)?;
    match a.format {
        TextFormat::Text => {
            println!("brute({}) = {}", a.beta, table::fmt_sig(brute, 6));
            println!(
                "amls({}, {}, {}) = {} ± {}",
                a.alpha,
                a.c,
                a.beta,
                table::fmt_sig(sp.value, 6),
                table::fmt_sig(sp.err_bound, 2)
            );
            println!("kappa* = {}  tau* = {}", table::fmt_sig(sp.kappa_star, 6), table::fmt_sig(sp.tau_star, 6));
        }
        TextFormat::Json => {
            let v = serde_json::json!({
                "alpha": a.alpha, "c": a.c, "beta": a.beta, "brute": brute, "amls": sp.value,
                "kappa_star": sp.kappa_star, "tau_star": sp.tau_star, "err_bound": sp.err_bound,
            });
            println!("{v}");
        }
    }
    Ok(())
}

fn cmd_table(a: &TableArgs) -> CmdResult {
    let grid = match &a.preset {
        Some(name) => Preset::parse(name)
            .ok_or_else(|| Error::Domain(format!("unknown preset `{name}` (vc, fvs, tfvs, 3hs, 4hs, 5hs)")))?
            .grid(),
        None => table::custom_grid(&a.alphas, &a.cs, &a.betas)?,
    };
    let rows = table::bound_table(&grid, a.precision)?;
    let text = match a.format {
        TableFormat::Csv => table::to_csv(&rows),
        TableFormat::Json => table::to_json_lines(&rows),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(())
}

fn verdict_line(v: &Verdict) -> String {
    match v {
        Verdict::Pass => "verdict: pass".into(),
        Verdict::Fail { witness } => {
            let elems: Vec<String> = witness.iter().map(|e| (e + 1).to_string()).collect();
            format!("verdict: fail, witness S = {{{}}} (mask {witness:x})", elems.join(","))
        }
    }
}

fn cmd_family_build(a: &FamilyBuildArgs, limits: &Limits) -> CmdResult {
    let weights = weights_from(&a.source)?;
    let n = weights.len();
    let (dump, comments, verdict, cost) = match a.kind {
        FamilyKind::Covering if a.unweighted => {
            let f = build_unweighted_covering(n, a.alpha, limits)?;
            let fam = FamilyDump::Covering(f);
            (fam, vec![], None, None)
        }
        FamilyKind::Covering => {
            let r = build_weighted_covering(&weights, a.alpha, covering_mode(a.mode)?, limits)?;
            (FamilyDump::Covering(r.family), vec![r.schedule.dump_comment()], r.verdict, None)
        }
        FamilyKind::Extension => {
            let beta = a.beta.ok_or_else(|| Error::Domain("extension families need --beta".into()))?;
            if a.unweighted {
                let f = build_unweighted_extension(n, a.alpha, a.c, beta, limits)?;
                let cost = family_cost(&f, a.c);
                (FamilyDump::Extension(f), vec![format!("c={}", a.c)], None, Some(cost))
            } else {
                let r = build_weighted_extension(&weights, a.alpha, a.c, beta, a.eps, limits)?;
                let comments = vec![r.schedule.dump_comment(), format!("c={} eps={}", a.c, a.eps)];
                (FamilyDump::Extension(r.family), comments, r.verdict, r.cost_log)
            }
        }
    };
    let text = write_dump(&dump, &comments);
    emit(a.out.as_deref(), &text)?;
    let size = match &dump {
        FamilyDump::Covering(f) => f.len(),
        FamilyDump::Extension(f) => f.len(),
    };
    let mut summary = format!("family size: {size}");
    if let Some(c) = cost {
        summary += &format!(", ln c-cost: {}", table::fmt_sig(c, 6));
    }
    eprintln!("{summary}");
    if let Some(v) = verdict {
        eprintln!("{}", verdict_line(&v));
        if !v.is_pass() {
            return Err(Failure::Verification("constructed family failed verification".into()));
        }
    }
    Ok(())
}

fn cmd_family_verify(a: &FamilyVerifyArgs, limits: &Limits) -> CmdResult {
    let text = read(&a.dump)?;
    let dump = parse_dump(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Domain(format!("{}:{line}: {msg}", a.dump.display())),
        other => other,
    })?;
    let weights = match (&a.source.instance, a.source.n, a.source.weights.is_empty()) {
        (None, None, true) => vec![1; dump.universe_size()],
        _ => weights_from(&a.source)?,
    };
    if weights.len() != dump.universe_size() {
        return Err(Error::Domain(format!(
            "dump has n = {} but {} weights were given",
            dump.universe_size(),
            weights.len()
        ))
        .into());
    }
    let verdict = match &dump {
        FamilyDump::Covering(f) => verify_covering(f, &weights, limits)?,
        FamilyDump::Extension(f) => verify_extension(f, &weights, limits)?,
    };
    println!("{}", verdict_line(&verdict));
    if verdict.is_pass() {
        Ok(())
    } else {
        Err(Failure::Verification("family is not valid".into()))
    }
}

fn pick_oracle<'a>(inst: &'a Instance, name: &str, c: Option<f64>, limits: &Limits) -> Result<Box<dyn ExtensionOracle + 'a>, Error> {
    let missing = || Error::Domain(format!("no `{name}` oracle for {} instances", inst.kind().name()));
    Ok(match (name, inst) {
        ("exact", _) => {
            let o = ExactOracle::new(inst, limits)?;
            Box::new(match c {
                Some(c) => o.with_c(c),
                None => o,
            })
        }
        ("branching", Instance::Vc(i)) => Box::new(BranchingVcOracle::new(i)),
        ("branching", Instance::Hs(i)) => Box::new(BranchingHsOracle::new(i)),
        ("local-ratio", Instance::Vc(i)) => Box::new(LocalRatioVc::new(i)),
        ("local-ratio", Instance::Hs(i)) => Box::new(LocalRatioHs::new(i)),
        ("local-ratio", Instance::Fvs(i)) => Box::new(LocalRatioFvs::new(i)),
        ("branching" | "local-ratio", _) => return Err(missing()),
        _ => return Err(Error::Domain(format!("unknown oracle `{name}` (exact, branching, local-ratio)"))),
    })
}

fn cmd_solve(a: &SolveArgs, limits: &Limits) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let mut report: RunReport = match a.model {
        Model::Membership => {
            let mode = match a.mode {
                ModeArg::Schedule => MembershipMode::Schedule,
                ModeArg::Fixed => MembershipMode::Fixed,
                ModeArg::Exhaustive => MembershipMode::Exhaustive,
            };
            approximate_membership(&inst, a.alpha, mode, limits)?
        }
        Model::Extension => {
            let oracle = pick_oracle(&inst, &a.oracle, a.c, limits)?;
            approximate_extension(&inst, oracle.as_ref(), a.beta, a.eps, limits)?
        }
    }
    .with_seed(a.seed);
    let mut failure = None;
    if a.verify {
        let verdict = verify_run(&inst, &report, report.target_factor(), limits)?;
        report.attach(&verdict);
        if !verdict.passed {
            failure = verdict.reason;
        }
    }
    emit(a.report.as_deref(), &(report.to_json() + "\n"))?;
    eprintln!("queries: {}, wall time: {:.3}s", report.ledger.len(), report.ledger.wall_time.as_secs_f64());
    if let Some(path) = &a.ledger {
        emit(Some(path), &report.ledger.to_json_lines())?;
    }
    match failure {
        Some(reason) => Err(Failure::Verification(reason)),
        None => Ok(()),
    }
}

fn cmd_verify(a: &VerifyArgs, limits: &Limits) -> CmdResult {
    let suite = Suite::parse(&a.suite)
        .ok_or_else(|| Error::Domain(format!("unknown suite `{}` (bounds, families, oracles, end-to-end, all)", a.suite)))?;
    let cfg = SuiteConfig { max_n: a.max_n, trials: a.trials, seed: a.seed, limits: *limits };
    let reports = suites::run(suite, &cfg)?;
    let mut failed = 0;
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!("{status} {}: {} checks, {} failures", r.suite, r.checks, r.failures);
        for m in &r.messages {
            println!("  {m}");
        }
        failed += r.failures;
    }
    if failed > 0 {
        Err(Failure::Verification(format!("{failed} checks failed")))
    } else {
        Ok(())
    }
}

fn cmd_generate(a: &GenerateArgs) -> CmdResult {
    let kind = ProblemKind::parse(&a.problem)
        .ok_or_else(|| Error::Domain(format!("unknown problem `{}` (wvc, whs, wfvs, wpvc)", a.problem)))?;
    let spec = RandomSpec::new(kind, a.n, a.density, (a.wmin, a.wmax), a.seed).with_d(a.d);
    let inst = random_instance(&spec)?;
    let text = format!(
        "# generated: problem={} n={} density={} weights={}..{} seed={}\n{}",
        kind.name(),
        a.n,
        a.density,
        a.wmin,
        a.wmax,
        a.seed,
        emit_instance(&inst)
    );
    emit(a.out.as_deref(), &text)?;
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let limits = Limits::from_env();
    match &cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Table(a) => cmd_table(a),
        Command::Family(FamilyCommand::Build(a)) => cmd_family_build(a, &limits),
        Command::Family(FamilyCommand::Verify(a)) => cmd_family_verify(a, &limits),
        Command::Solve(a) => cmd_solve(a, &limits),
        Command::Verify(a) => cmd_verify(a, &limits),
        Command::Generate(a) => cmd_generate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Resource { .. } | Error::FamilyTooLarge { .. } => 3,
                Error::Internal(_) => 1,
                _ => 2,
            })
        }
    }
}
