use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::RangedU64ValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gmodal::corpus;
use gmodal::hypersequent::{check_derivation_with, CheckOptions, CutError};
use gmodal::prover::{JSearch, Limit};
use gmodal::relations::looks_like_sequent;
use gmodal::semantics::validity_sequent;
use gmodal::{
    check_trace, countermodel_search, eliminate_cuts, eval_formula, parse_formula, parse_sequent, HDerivation, KripkeModel, Logic, Prover,
    ProverConfig, ProverError, SearchConfig, SearchMode, SemanticsError, SequentOfRelations,
};
use serde_json::{json, Value};

const VALID: u8 = 0;
const INVALID: u8 = 1;
const USAGE: u8 = 2;
const BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "gmodal", version, about = "Decide, check and refute formulas of Goedel modal logics")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Calculus {
    /// Propositional hypersequent calculus.
    Gg,
    /// With the box rule.
    GgkBox,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Search {
    Gfp,
    Exhaustive,
}

#[derive(Subcommand)]
enum Command {
    /// Decide validity of a formula or a sequent of relations.
    Decide(DecideArgs),
    /// Check a hypersequent derivation file rule by rule.
    CheckProof {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Calculus::Gg)]
        calculus: Calculus,
    },
    /// Eliminate cuts from a derivation file.
    CutElim {
        input: PathBuf,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Calculus::GgkBox)]
        calculus: Calculus,
    },
    /// Search bounded finite models for a countermodel.
    Countermodel(CountermodelArgs),
    /// Evaluate a formula at a world of a model file.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        world: usize,
        formula: String,
    },
    /// Run the built-in regression corpus.
    Selftest,
}

#[derive(Args)]
struct DecideArgs {
    #[arg(long)]
    logic: Logic,
    /// Emit the proof trace or the failing-leaf diagnostic.
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = ProverConfig::default().max_nodes, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
    max_nodes: usize,
    #[arg(long, default_value_t = ProverConfig::default().max_depth, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
    max_depth: usize,
    /// Search strategy for modal index sets.
    #[arg(long, value_enum, default_value_t = Search::Gfp)]
    search: Search,
    /// Formula (validity means `top <= F`) or sequent `A <= B ; C < D`.
    input: String,
}

#[derive(Args)]
struct CountermodelArgs {
    #[arg(long)]
    logic: Logic,
    #[arg(long, default_value_t = 3, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
    max_worlds: usize,
    /// Largest grid denominator.
    #[arg(long, default_value_t = 5, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
    grid: usize,
    #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Models sampled in random mode.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Maximum number of models examined.
    #[arg(long, default_value_t = SearchConfig::default().budget, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Search fuzzy frames for box formulas.
    #[arg(long)]
    fuzzy_box: bool,
    input: String,
}

struct Failure(u8, String);

impl Failure {
    fn usage(msg: impl ToString) -> Self {
        Failure(USAGE, msg.to_string())
    }
}

fn parse_input(input: &str) -> Result<SequentOfRelations, Failure> {
    if looks_like_sequent(input) {
        parse_sequent(input).map_err(Failure::usage)
    } else {
        Ok(validity_sequent(&parse_formula(input).map_err(Failure::usage)?))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_derivation(path: &Path) -> Result<HDerivation, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(format: Format, text: String, value: Value) {
    match format {
        Format::Text => println!("{text}"),
        Format::Json => println!("{value:#}"),
    }
}

fn decide(format: Format, a: &DecideArgs) -> Result<u8, Failure> {
    let s = parse_input(&a.input)?;
    let search = match a.search {
        Search::Gfp => JSearch::Gfp,
        Search::Exhaustive => JSearch::Exhaustive,
    };
    let config = ProverConfig { max_nodes: a.max_nodes, max_depth: a.max_depth, search, ..ProverConfig::default() };
    let v = Prover::new(a.logic, config).decide(&s).map_err(|e| match e {
        ProverError::LimitExceeded(Limit::Nodes) => Failure(BUDGET, "node limit exceeded".into()),
        ProverError::LimitExceeded(Limit::Depth) => Failure(BUDGET, "depth limit exceeded".into()),
        e => Failure::usage(e),
    })?;
    let verdict = if v.is_valid() { "valid" } else { "invalid" };
    let mut out = json!({ "logic": a.logic, "input": s.to_string(), "verdict": verdict });
    let mut text = format!("{verdict} in {}: {s}", a.logic);
    if a.trace {
        if let Some(t) = &v.trace {
            debug_assert!(check_trace(a.logic, &s, t));
            out["trace"] = json!(t);
            text.push_str(&format!("\ntrace: {}", json!(t)));
        }
        if let Some(d) = &v.diagnostic {
            out["diagnostic"] = json!(d);
            let assignment: Vec<String> = d.assignment.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            text.push_str(&format!("\nfailing leaf: {}\nassignment: {}", d.leaf, assignment.join(", ")));
        }
    }
    emit(format, text, out);
    Ok(if v.is_valid() { VALID } else { INVALID })
}

fn options(c: Calculus) -> CheckOptions {
    CheckOptions { modal: c == Calculus::GgkBox, allow_hyp: false }
}

fn check_proof(format: Format, file: &Path, calculus: Calculus) -> Result<u8, Failure> {
    let d = read_derivation(file)?;
    let result = check_derivation_with(&d, options(calculus));
    let out = json!({
        "file": file.display().to_string(),
        "accepted": result.is_ok(),
        "conclusion": d.conclusion,
        "error": result.as_ref().err().map(|e| json!({ "path": e.path, "rule": e.rule, "reason": e.reason })),
    });
    let text = match &result {
        Ok(()) => format!("accepted: {} ({} nodes)", d.conclusion, d.size()),
        Err(e) => format!("rejected at {e}"),
    };
    emit(format, text, out);
    Ok(if result.is_ok() { VALID } else { INVALID })
}

fn cut_elim(input: &Path, output: Option<&Path>, calculus: Calculus) -> Result<u8, Failure> {
    let d = read_derivation(input)?;
    check_derivation_with(&d, options(calculus)).map_err(|e| Failure::usage(format!("invalid input derivation: {e}")))?;
    let e = eliminate_cuts(&d).map_err(|e| match e {
        CutError::Check(c) => Failure::usage(format!("invalid input derivation: {c}")),
        CutError::Internal(m) => Failure(INVALID, format!("internal error: {m}")),
    })?;
    let body = serde_json::to_string_pretty(&e).expect("derivations serialize") + "\n";
    match output {
        Some(path) => fs::write(path, body).map_err(|err| Failure::usage(format!("{}: {err}", path.display())))?,
        None => print!("{body}"),
    }
    eprintln!("{} nodes with {} cuts -> {} nodes", d.size(), d.count_rule(gmodal::HRule::Cut), e.size());
    Ok(VALID)
}

fn countermodel(format: Format, a: &CountermodelArgs) -> Result<u8, Failure> {
    let s = parse_input(&a.input)?;
    let mode = match a.mode {
        Mode::Exhaustive => SearchMode::Exhaustive,
        Mode::Random => SearchMode::Random { seed: a.seed, samples: a.samples },
    };
    let cfg = SearchConfig { max_worlds: a.max_worlds, grid: a.grid, mode, budget: a.budget, fuzzy_box: a.fuzzy_box };
    match countermodel_search(a.logic, &s, &cfg) {
        Ok(Some(c)) => {
            let model = serde_json::to_string_pretty(&c.model).expect("models serialize");
            let out = json!({ "logic": a.logic, "input": s.to_string(), "found": true, "world": c.world, "model": c.model });
            emit(format, format!("countermodel at world {}:\n{model}", c.world), out);
            Ok(INVALID)
        }
        Ok(None) => {
            let out = json!({ "logic": a.logic, "input": s.to_string(), "found": false });
            emit(format, "no countermodel within the bounds".into(), out);
            Ok(VALID)
        }
        Err(SemanticsError::BudgetExhausted { examined }) => {
            Err(Failure(BUDGET, format!("budget exhausted after {examined} models without a countermodel")))
        }
        Err(e) => Err(Failure::usage(e)),
    }
}

fn eval(format: Format, model: &Path, world: usize, formula: &str) -> Result<u8, Failure> {
    let m: KripkeModel = serde_json::from_str(&read(model)?).map_err(|e| Failure::usage(format!("{}: {e}", model.display())))?;
    let f = parse_formula(formula).map_err(Failure::usage)?;
    let v = eval_formula(&m, &f, world).map_err(Failure::usage)?;
    emit(format, v.to_string(), json!({ "formula": f.to_string(), "world": world, "value": v.to_string() }));
    Ok(VALID)
}

fn selftest(format: Format) -> Result<u8, Failure> {
    let mut results = Vec::new();
    for c in corpus::axiom_regression().into_iter().chain(corpus::separation_suite()) {
        let s = validity_sequent(&c.formula);
        let got = Prover::new(c.logic, ProverConfig::default()).decide(&s).map(|v| {
            let traced = v.trace.as_ref().is_none_or(|t| check_trace(c.logic, &s, t));
            (v.outcome, traced)
        });
        let pass = matches!(got, Ok((o, true)) if o == c.expected);
        results.push((format!("{} [{}]", c.name, c.logic), pass));
    }
    let gg = CheckOptions { modal: false, allow_hyp: false };
    let ggk = CheckOptions { modal: true, allow_hyp: false };
    results.push(("prelinearity derivation".into(), check_derivation_with(&corpus::prelinearity_derivation(), gg).is_ok()));
    results.push(("box double negation derivation".into(), check_derivation_with(&corpus::box_double_negation_derivation(), ggk).is_ok()));
    let failed = results.iter().filter(|r| !r.1).count();
    let text = results.iter().map(|(n, p)| format!("{} {n}", if *p { "ok  " } else { "FAIL" })).collect::<Vec<_>>().join("\n");
    let out = json!({
        "passed": results.len() - failed,
        "failed": failed,
        "cases": results.iter().map(|(n, p)| json!({ "name": n, "pass": p })).collect::<Vec<_>>(),
    });
    emit(format, format!("{text}\n{} passed, {failed} failed", results.len() - failed), out);
    Ok(if failed == 0 { VALID } else { INVALID })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let f = cli.format;
    let result = match &cli.command {
        Command::Decide(a) => decide(f, a),
        Command::CheckProof { file, calculus } => check_proof(f, file, *calculus),
        Command::CutElim { input, output, calculus } => cut_elim(input, output.as_deref(), *calculus),
        Command::Countermodel(a) => countermodel(f, a),
        Command::Eval { model, world, formula } => eval(f, model, *world, formula),
        Command::Selftest => selftest(f),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
