use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use asmgram::approx::approx_with;
use asmgram::exact::DEFAULT_EXACT_LIMIT;
use asmgram::{approx_best, asi_exact, bounds_report, verify_plan, ApproxMethod, AssemblyPlan, ExactConfig, Word};
use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{parse_alphabet, parse_seconds, strip_newline, write_bytes, CliError, CliResult, EXIT_REJECTED};

#[derive(Args)]
pub struct BenchArgs {
    /// Directory with one word per file, processed in file-name order.
    #[arg(long, required_unless_present = "random", conflicts_with = "random")]
    corpus: Option<PathBuf>,
    /// COUNT random words of length N drawn with SEED.
    #[arg(long, num_args = 3, value_names = ["N", "COUNT", "SEED"])]
    random: Option<Vec<u64>>,
    /// Alphabet for random words.
    #[arg(long, default_value = "01")]
    alphabet: String,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "repair,balanced,best")]
    methods: Vec<BenchMethod>,
    /// Output path; standard output when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Add a `<method>_ms` column after each method.
    #[arg(long)]
    timings: bool,
    /// Words longer than this get an empty `exact` cell.
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    max_exact_len: usize,
    /// Per-word budget for the exact method, in seconds.
    #[arg(long, value_parser = parse_seconds)]
    time_budget: Option<Duration>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchMethod {
    Repair,
    Balanced,
    Best,
    Exact,
}

impl BenchMethod {
    fn name(self) -> &'static str {
        match self {
            BenchMethod::Repair => "repair",
            BenchMethod::Balanced => "balanced",
            BenchMethod::Best => "best",
            BenchMethod::Exact => "exact",
        }
    }
}

fn load_corpus(dir: &PathBuf) -> Result<Vec<(String, Word)>, CliError> {
    let io = |source| CliError::Io {
        path: dir.clone(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    paths.retain(|p| p.is_file());
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let word = Word::parse(strip_newline(&text))
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let id = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((id, word))
        })
        .collect()
}

fn random_corpus(n: u64, count: u64, seed: u64, alphabet: &str) -> Result<Vec<(String, Word)>, CliError> {
    if n == 0 {
        return Err(CliError::Input("random words need length at least 1".into()));
    }
    let alphabet = parse_alphabet(alphabet)?;
    let symbols = alphabet.symbols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let word: Vec<char> = (0..n).map(|_| symbols[rng.gen_range(0..symbols.len())]).collect();
            Ok((format!("r{i}"), Word::new(word)?))
        })
        .collect()
}

/// Value and witness of one method, or `None` when it did not certify.
fn measure(method: BenchMethod, w: &Word, args: &BenchArgs, threads: usize) -> Option<(usize, AssemblyPlan)> {
    let approx = |m| {
        let r = approx_with(w, m);
        Some((r.value, r.plan))
    };
    match method {
        BenchMethod::Repair => approx(ApproxMethod::Repair),
        BenchMethod::Balanced => approx(ApproxMethod::Balanced),
        BenchMethod::Best => {
            let r = approx_best(w);
            Some((r.value, r.plan))
        }
        BenchMethod::Exact => {
            let config = ExactConfig {
                max_len: args.max_exact_len,
                time_budget: args.time_budget,
                threads,
                ..ExactConfig::default()
            };
            asi_exact(w, &config).ok().map(|r| (r.value, r.plan))
        }
    }
}

pub fn run(args: BenchArgs, threads: usize) -> CliResult {
    let words = match (&args.corpus, &args.random) {
        (Some(dir), _) => load_corpus(dir)?,
        (None, Some(params)) => random_corpus(params[0], params[1], params[2], &args.alphabet)?,
        (None, None) => unreachable!("clap requires a source"),
    };

    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["id", "n", "log_lower", "lz_lower", "trivial_upper"]
        .map(String::from)
        .to_vec();
    for m in &args.methods {
        header.push(m.name().to_string());
        if args.timings {
            header.push(format!("{}_ms", m.name()));
        }
    }
    out.write_record(&header)?;

    let mut violations = Vec::new();
    for (id, w) in &words {
        let bounds = bounds_report(w);
        let mut record = vec![
            id.clone(),
            w.len().to_string(),
            bounds.log_lower.to_string(),
            bounds.lz_lower.to_string(),
            bounds.trivial_upper.to_string(),
        ];
        for &m in &args.methods {
            let started = Instant::now();
            let measured = measure(m, w, &args, threads);
            let ms = started.elapsed().as_secs_f64() * 1e3;
            match measured {
                Some((value, plan)) => {
                    if value < bounds.best_lower || value > bounds.trivial_upper {
                        violations.push(format!(
                            "{id}: {} = {value} outside [{}, {}]",
                            m.name(),
                            bounds.best_lower,
                            bounds.trivial_upper
                        ));
                    }
                    let accepted = verify_plan(&plan, w, value).map(|v| v.accepted).unwrap_or(false);
                    if !accepted {
                        violations.push(format!("{id}: {} witness does not verify", m.name()));
                    }
                    record.push(value.to_string());
                }
                None => record.push(String::new()),
            }
            if args.timings {
                record.push(format!("{ms:.3}"));
            }
        }
        out.write_record(&record)?;
    }

    let bytes = out.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    match &args.csv {
        Some(path) => write_bytes(path, &bytes)?,
        None => write_bytes(std::path::Path::new("-"), &bytes)?,
    }
    for v in &violations {
        eprintln!("violation: {v}");
    }
    eprintln!("{} words, {} violations", words.len(), violations.len());
    Ok(if violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_REJECTED)
    })
}
