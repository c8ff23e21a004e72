//! `asmgram`: assembly index of strings from the command line.

mod bench;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use asmgram::approx::approx_with;
use asmgram::bounds::BoundSource;
use asmgram::exact::DEFAULT_EXACT_LIMIT;
use asmgram::oracle::{asi_oracle_with, AuditOptions, OracleError};
use asmgram::{
    approx_best, asi_decide, asi_exact, bounds_report, decode_witness, encode_witness, expand_slp, format_grammar,
    format_plan, oracle_audit, parse_grammar, parse_plan, plan_to_slp, slp_to_plan, verify_plan, Alphabet,
    ApproxMethod, AssemblyPlan, DecisionOutcome, ExactConfig, ModelError, OracleConfig, Rejection, Slp, SolveError,
    Word, DEFAULT_MAX_EXPANSION,
};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

const SCHEMA_VERSION: u32 = 1;

const EXIT_REJECTED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_UNKNOWN: u8 = 4;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

type CliResult = Result<ExitCode, CliError>;

#[derive(Parser)]
#[command(name = "asmgram", version, about = "Assembly index of strings: exact search, bounds and grammar compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the assembly index of a word, or bounds on it.
    Compute(ComputeArgs),
    /// Decide whether the assembly index is at most K. Prints YES, NO or UNKNOWN.
    Decide(DecideArgs),
    /// Check a plan or binary witness against a target word.
    Verify(VerifyArgs),
    /// Convert between plan and grammar text formats.
    Convert(ConvertArgs),
    /// Run the exhaustive reference search on a short word.
    Oracle(OracleArgs),
    /// Cross-check oracle, exact solver, bounds and approximations on all short words.
    Audit(AuditArgs),
    /// Benchmark approximation methods over a corpus or random words.
    Bench(bench::BenchArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").args(["exact", "approx", "bounds_only"])))]
struct ComputeArgs {
    /// The word; every Unicode scalar value is one symbol.
    #[arg(required_unless_present = "file")]
    word: Option<String>,
    /// Read the word from a file (trailing newline ignored).
    #[arg(long, conflicts_with = "word")]
    file: Option<PathBuf>,
    /// Alphabet, either as a run of symbols ("01") or space-separated.
    #[arg(long)]
    alphabet: Option<String>,
    /// Exact search. Default when the word is at most --max-exact-len long.
    #[arg(long)]
    exact: bool,
    /// Grammar-compression upper bound only.
    #[arg(long)]
    approx: bool,
    /// Lower and trivial upper bounds only, no witness.
    #[arg(long)]
    bounds_only: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Best)]
    method: MethodArg,
    #[arg(long)]
    json: bool,
    #[arg(long, conflicts_with = "bounds_only")]
    emit_plan: Option<PathBuf>,
    #[arg(long, conflicts_with = "bounds_only")]
    emit_grammar: Option<PathBuf>,
    /// Write the binary witness encoding of the plan.
    #[arg(long, conflicts_with = "bounds_only")]
    emit_witness: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
    /// With --exact, exit 3 unless optimality is certified.
    #[arg(long, requires = "exact")]
    strict: bool,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    /// Wall-clock budget for exact search, in seconds.
    #[arg(long, value_parser = parse_seconds)]
    time_budget: Option<Duration>,
    /// Maximum number of search nodes for exact search.
    #[arg(long)]
    node_budget: Option<u64>,
    /// Longest word handed to the exact solver.
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    max_exact_len: usize,
}

impl BudgetArgs {
    fn config(&self, alphabet: &Alphabet, threads: usize) -> ExactConfig {
        ExactConfig {
            max_len: self.max_exact_len,
            node_budget: self.node_budget,
            time_budget: self.time_budget,
            threads,
            alphabet: Some(alphabet.clone()),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Repair,
    Balanced,
    Best,
}

#[derive(Args)]
struct DecideArgs {
    word: String,
    k: usize,
    #[arg(long)]
    alphabet: Option<String>,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").args(["plan", "witness"]).required(true)))]
struct VerifyArgs {
    /// Plan in text format.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Plan in binary witness format; needs --target.
    #[arg(long, requires = "target")]
    witness: Option<PathBuf>,
    /// Target word. Defaults to the plan file's `target:` line.
    #[arg(long)]
    target: Option<String>,
    /// Step budget. Defaults to the plan's own cost.
    #[arg(long)]
    k: Option<usize>,
    /// Alphabet for decoding a witness; defaults to the target's symbols.
    #[arg(long)]
    alphabet: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Plan,
    Grammar,
}

#[derive(Args)]
struct ConvertArgs {
    /// Output format; the input is read in the other one.
    #[arg(long, value_enum)]
    to: Format,
    input: PathBuf,
    /// Output path, or `-` for standard output.
    output: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    word: String,
    #[arg(long)]
    alphabet: Option<String>,
    /// Longest word accepted.
    #[arg(long, default_value_t = OracleConfig::default().limit)]
    limit: usize,
    /// Disable every pruning rule and the memo.
    #[arg(long)]
    unpruned: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    alphabet: String,
    #[arg(long)]
    max_n: usize,
    /// Write one CSV row per word.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also re-solve each word with one extra unused letter.
    #[arg(long)]
    enlarge_alphabet: bool,
}

fn parse_seconds(s: &str) -> Result<Duration, String> {
    let secs: f64 = s.parse().map_err(|_| format!("`{s}` is not a number of seconds"))?;
    Duration::try_from_secs_f64(secs).map_err(|e| e.to_string())
}

fn parse_alphabet(text: &str) -> Result<Alphabet, CliError> {
    let symbols: Vec<char> = if text.chars().any(char::is_whitespace) {
        text.split_whitespace()
            .map(|tok| {
                let mut chars = tok.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(CliError::Input(format!("alphabet entry `{tok}` is not a single symbol"))),
                }
            })
            .collect::<Result<_, _>>()?
    } else {
        text.chars().collect()
    };
    Ok(Alphabet::new(symbols)?)
}

/// Builds the word and the alphabet it is taken over.
fn load_word(text: &str, alphabet: Option<&str>) -> Result<(Word, Alphabet), CliError> {
    let word = Word::parse(text)?;
    let alphabet = match alphabet {
        Some(a) => parse_alphabet(a)?,
        None => word.inferred_alphabet(),
    };
    let word = Word::over(&alphabet, word.symbols().to_vec())?;
    Ok((word, alphabet))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if path == Path::new("-") {
        std::io::stdout().write_all(bytes).map_err(io)
    } else {
        fs::write(path, bytes).map_err(io)
    }
}

fn strip_newline(text: &str) -> &str {
    text.strip_suffix('\n')
        .map(|t| t.strip_suffix('\r').unwrap_or(t))
        .unwrap_or(text)
}

/// Worker count from `ASMGRAM_THREADS`, also applied to rayon's global pool.
fn configure_threads() -> Result<usize, CliError> {
    let Ok(value) = std::env::var("ASMGRAM_THREADS") else {
        return Ok(1);
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Input(format!("ASMGRAM_THREADS must be a positive integer, got `{value}`")))?;
    // Fails only if the pool was already built, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(threads)
}

fn with_alphabet(slp: &Slp, alphabet: &Alphabet) -> Slp {
    Slp::new(alphabet.clone(), slp.rules().to_vec(), slp.start()).expect("alphabet only grows")
}

struct Witness {
    value: usize,
    optimal: bool,
    method: String,
    plan: AssemblyPlan,
    slp: Slp,
    stats: Option<asmgram::SolveStats>,
}

fn approximate(w: &Word, alphabet: &Alphabet, method: MethodArg) -> Witness {
    let result = match method {
        MethodArg::Best => approx_best(w),
        MethodArg::Repair => approx_with(w, ApproxMethod::Repair),
        MethodArg::Balanced => approx_with(w, ApproxMethod::Balanced),
    };
    let mut plan = result.plan;
    plan.alphabet = alphabet.clone();
    Witness {
        value: result.value,
        optimal: w.len() == 1,
        method: result.method.name().to_string(),
        plan,
        slp: with_alphabet(&result.slp, alphabet),
        stats: None,
    }
}

fn cmd_compute(args: ComputeArgs, threads: usize) -> CliResult {
    let text = match (&args.word, &args.file) {
        (Some(word), _) => word.clone(),
        (None, Some(path)) => strip_newline(&read_text(path)?).to_string(),
        (None, None) => unreachable!("clap requires one of them"),
    };
    let (w, alphabet) = load_word(&text, args.alphabet.as_deref())?;
    let n = w.len();
    let mut bounds = bounds_report(&w);
    let mut notes = Vec::new();
    let mut exit = ExitCode::SUCCESS;

    let wants_exact = args.exact || !(args.approx || args.bounds_only);
    let witness = if args.bounds_only {
        None
    } else if wants_exact && n <= args.budget.max_exact_len {
        match asi_exact(&w, &args.budget.config(&alphabet, threads)) {
            Ok(r) => Some(Witness {
                value: r.value,
                optimal: r.optimal,
                method: r.method,
                plan: r.plan,
                slp: r.slp,
                stats: Some(r.stats),
            }),
            Err(SolveError::BudgetExhausted { best }) => {
                notes.push("search budget exhausted; value is an upper bound".to_string());
                if args.strict {
                    exit = ExitCode::from(EXIT_BUDGET);
                }
                Some(Witness {
                    value: best.value,
                    optimal: false,
                    method: best.method,
                    plan: best.plan,
                    slp: best.slp,
                    stats: Some(best.stats),
                })
            }
            Err(e @ SolveError::WordTooLong { .. }) => return Err(CliError::Input(e.to_string())),
        }
    } else {
        if args.exact {
            notes.push(format!(
                "word has {n} symbols, above --max-exact-len {}; reporting an approximation",
                args.budget.max_exact_len
            ));
            if args.strict {
                exit = ExitCode::from(EXIT_BUDGET);
            }
        }
        Some(approximate(&w, &alphabet, args.method))
    };

    let mut witness = witness;
    if let Some(wit) = &mut witness {
        wit.optimal |= wit.value == bounds.best_lower;
        bounds = bounds.with_upper(wit.value, &wit.method);
        let plan = wit.plan.clone().with_target(w.clone());
        if let Some(path) = &args.emit_plan {
            write_bytes(path, format_plan(&plan).as_bytes())?;
        }
        if let Some(path) = &args.emit_grammar {
            write_bytes(path, format_grammar(&wit.slp).as_bytes())?;
        }
        if let Some(path) = &args.emit_witness {
            write_bytes(path, &encode_witness(&plan)?)?;
        }
    }

    if args.json {
        let value = witness.as_ref().map(|wit| wit.value);
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "compute",
            "word": w,
            "n": n,
            "alphabet": alphabet,
            "mode": if args.bounds_only { "bounds" } else if witness.as_ref().is_some_and(|x| x.stats.is_some()) { "exact" } else { "approx" },
            "value": value,
            "optimal": witness.as_ref().is_some_and(|wit| wit.optimal),
            "method": witness.as_ref().map(|wit| wit.method.clone()),
            "bounds": bounds,
            "stats": witness.as_ref().and_then(|wit| wit.stats.clone()),
            "plan": witness.as_ref().map(|wit| &wit.plan),
            "grammar": witness.as_ref().map(|wit| &wit.slp),
            "files": {
                "plan": args.emit_plan,
                "grammar": args.emit_grammar,
                "witness": args.emit_witness,
            },
            "notes": notes,
        });
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        println!("word: {w} (n = {n}, alphabet: {alphabet})");
        match &witness {
            Some(wit) => {
                let status = if wit.optimal { "optimal" } else { "upper bound" };
                println!("value: {} ({status})", wit.value);
                println!("method: {}", wit.method);
            }
            None => println!("value: not computed"),
        }
        println!(
            "bounds: {} <= ASI <= {} (lower from {}, upper from {})",
            bounds.best_lower,
            bounds.best_upper,
            source_label(&bounds.best_lower_source),
            source_label(&bounds.best_upper_source)
        );
        println!(
            "log_lower: {}  lz_factors: {}  lz_lower: {}  trivial_upper: {}",
            bounds.log_lower, bounds.lz_factors, bounds.lz_lower, bounds.trivial_upper
        );
        for (label, path) in [("plan", &args.emit_plan), ("grammar", &args.emit_grammar), ("witness", &args.emit_witness)] {
            if let Some(path) = path {
                println!("{label}: {}", path.display());
            }
        }
        for note in &notes {
            eprintln!("note: {note}");
        }
    }
    Ok(exit)
}

fn source_label(source: &BoundSource) -> String {
    match source {
        BoundSource::Log => "log2 n".into(),
        BoundSource::Lz => "LZ77 factors".into(),
        BoundSource::Trivial => "n - 1".into(),
        BoundSource::Witness(method) => format!("{method} witness"),
    }
}

fn cmd_decide(args: DecideArgs, threads: usize) -> CliResult {
    let (w, alphabet) = load_word(&args.word, args.alphabet.as_deref())?;
    let decision = asi_decide(&w, args.k, &args.budget.config(&alphabet, threads));
    if args.json {
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "decide",
            "word": w,
            "k": args.k,
            "outcome": decision.outcome,
            "nodes": decision.nodes,
            "reason": decision.reason,
        });
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        let outcome = serde_json::to_value(decision.outcome).expect("serializable");
        println!("{}", outcome.as_str().expect("unit variant"));
    }
    Ok(match decision.outcome {
        DecisionOutcome::Yes => ExitCode::SUCCESS,
        DecisionOutcome::No => ExitCode::from(EXIT_REJECTED),
        DecisionOutcome::Unknown => ExitCode::from(EXIT_UNKNOWN),
    })
}

fn cmd_verify(args: VerifyArgs) -> CliResult {
    let (plan, target) = if let Some(path) = &args.plan {
        let plan = parse_plan(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let target = match &args.target {
            Some(t) => Word::parse(t)?,
            None => plan
                .declared_target
                .clone()
                .ok_or_else(|| CliError::Input("no --target given and the plan declares none".into()))?,
        };
        (plan, target)
    } else {
        let path = args.witness.as_ref().expect("clap requires plan or witness");
        let target = Word::parse(args.target.as_deref().expect("clap requires target"))?;
        let alphabet = match &args.alphabet {
            Some(a) => parse_alphabet(a)?,
            None => target.inferred_alphabet(),
        };
        let bytes = fs::read(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        (decode_witness(&bytes, &alphabet)?, target)
    };
    let k = args.k.unwrap_or(plan.cost());
    let verdict = verify_plan(&plan, &target, k)?;

    if args.json {
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "verify",
            "target": target,
            "k": k,
            "verdict": verdict,
        });
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        match &verdict.rejection {
            None => println!("accepted: {} steps, k = {k}", verdict.steps_used),
            Some(Rejection::Mismatch) => println!("rejected: the plan does not build {target}"),
            Some(Rejection::OverBudget { k }) => {
                println!("rejected: {} steps exceed k = {k}", verdict.steps_used)
            }
            Some(Rejection::Oversized { step, length }) => {
                println!("rejected: step {step} builds {length} symbols, more than the target's {}", target.len())
            }
        }
        if !verdict.accepted {
            if let Some(produced) = &verdict.produced {
                println!("produced: {produced}");
            }
        }
    }
    Ok(if verdict.accepted {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_REJECTED)
    })
}

fn cmd_convert(args: ConvertArgs) -> CliResult {
    let text = read_text(&args.input)?;
    let located = |e: asmgram::ParseError| CliError::Input(format!("{}: {e}", args.input.display()));
    let (out, summary) = match args.to {
        Format::Grammar => {
            let plan = parse_plan(&text).map_err(located)?;
            let slp = plan_to_slp(&plan)?;
            let summary = format!("plan of cost {} -> grammar of size {}", plan.cost(), slp.size());
            (format_grammar(&slp), summary)
        }
        Format::Plan => {
            let slp = parse_grammar(&text).map_err(located)?;
            let mut plan = slp_to_plan(&slp)?;
            if plan.declared_target.is_none() {
                if let Ok(word) = expand_slp(&slp, DEFAULT_MAX_EXPANSION) {
                    plan = plan.with_target(word);
                }
            }
            let summary = format!("grammar of size {} -> plan of cost {}", slp.size(), plan.cost());
            (format_plan(&plan), summary)
        }
    };
    write_bytes(&args.output, out.as_bytes())?;
    if args.output != Path::new("-") {
        println!("{summary}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(args: OracleArgs) -> CliResult {
    let (w, alphabet) = load_word(&args.word, args.alphabet.as_deref())?;
    let config = if args.unpruned {
        OracleConfig::unpruned(args.limit)
    } else {
        OracleConfig {
            limit: args.limit,
            ..OracleConfig::default()
        }
    };
    match asi_oracle_with(&w, &alphabet, &config) {
        Ok(value) => {
            println!("{value}");
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ OracleError::WordTooLong { .. }) => Err(CliError::Input(e.to_string())),
    }
}

fn cmd_audit(args: AuditArgs) -> CliResult {
    let alphabet = parse_alphabet(&args.alphabet)?;
    let options = AuditOptions {
        oracle: OracleConfig {
            limit: args.max_n.max(1),
            ..OracleConfig::default()
        },
        enlarge_alphabet: args.enlarge_alphabet,
    };
    let report = oracle_audit(&alphabet, args.max_n, &options);
    if let Some(path) = &args.report {
        let mut out = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "word", "n", "oracle", "exact", "log_lower", "lz_factors", "lz_lower", "approx_best", "trivial_upper",
        ];
        if args.enlarge_alphabet {
            header.push("enlarged");
        }
        out.write_record(&header)?;
        for row in &report.rows {
            let mut record = vec![
                row.word.clone(),
                row.n.to_string(),
                row.oracle.to_string(),
                row.exact.to_string(),
                row.log_lower.to_string(),
                row.lz_factors.to_string(),
                row.lz_lower.to_string(),
                row.approx_best.to_string(),
                row.trivial_upper.to_string(),
            ];
            if let Some(e) = row.enlarged {
                record.push(e.to_string());
            }
            out.write_record(&record)?;
        }
        let bytes = out.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
        write_bytes(path, &bytes)?;
    }
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    println!("{} words, {} violations", report.words(), report.violations.len());
    Ok(if report.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_REJECTED)
    })
}

fn run(cli: Cli) -> CliResult {
    let threads = configure_threads()?;
    match cli.command {
        Command::Compute(args) => cmd_compute(args, threads),
        Command::Decide(args) => cmd_decide(args, threads),
        Command::Verify(args) => cmd_verify(args),
        Command::Convert(args) => cmd_convert(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Bench(args) => bench::run(args, threads),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_INPUT)
    })
}
