//! The `compsense` command line.
//!
//! Exit codes: 0 on success, 1 when an operation fails (I/O, malformed
//! input files), 2 on usage errors (bad flags, unknown words, unmet
//! preconditions). Errors are reported as one `error: ...` line on stderr.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use compsense_core::disambig::DisambiguationQuery;
use compsense_core::eval::{sweep_csv, SweepRow};
use compsense_core::{
    baseline_disambiguate, build_index, disambiguate, evaluate, evaluate_baseline, expand,
    load_index, load_synonyms, load_test_items, parse_conllu, rho_sweep, save_index,
    tokenize_plain, ApmiConfig, ApmiIndex, ContextScheme, Estimator, ExpansionParams, InputSet,
    LogBase, Sentence, Taxonomy, TestItem, Vocabulary, DEFAULT_RHO_GRID,
};

pub const DEFAULT_K: f64 = 5.0;
pub const DEFAULT_RHO: f64 = 1.5;

#[derive(Debug, Parser)]
#[command(
    name = "compsense",
    version,
    about = "Compound constituent sense disambiguation by set expansion"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an APPMI index from corpus files.
    Build(BuildArgs),
    /// Expand a set of words and list the best completions.
    Expand(ExpandArgs),
    /// Pick the synonym of a constituent that fits a compound.
    Disambiguate(DisambiguateArgs),
    /// Score the disambiguator against annotated test items.
    Evaluate(EvaluateArgs),
    /// Evaluate once per rho value.
    Sweep(SweepArgs),
    /// Wu-Palmer baseline over a taxonomy file.
    Baseline(BaselineArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Joint,
    Conditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LogArg {
    #[value(name = "e")]
    E,
    #[value(name = "2")]
    Two,
    #[value(name = "10")]
    Ten,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ContextArg {
    Dep,
    Ngram,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Corpus files; `.conllu`/`.conll` are read as CoNLL-U, anything else as plain text.
    #[arg(required = true)]
    pub corpus: Vec<PathBuf>,
    /// Words of interest, one per line.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Output index file.
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: f64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Conditional)]
    pub estimator: EstimatorArg,
    #[arg(long = "log", value_enum, default_value_t = LogArg::E)]
    pub log_base: LogArg,
    #[arg(long, value_enum, default_value_t = ContextArg::Dep)]
    pub context: ContextArg,
    /// Words on each side of an n-gram context.
    #[arg(long, default_value_t = 1)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(required = true)]
    pub words: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    #[arg(long, default_value_t = 20)]
    pub top: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DisambiguateArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Synonym lexicon: `headword<TAB>synonym<TAB>...` per line.
    #[arg(long)]
    pub synonyms: PathBuf,
    pub compound: String,
    pub constituent: String,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    /// Expand the compound alone.
    #[arg(long)]
    pub omit_constituent: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Test items, one JSON object per line.
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    #[arg(long)]
    pub omit_constituent: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub items: PathBuf,
    /// Comma-separated rho values.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RHO_GRID)]
    pub rhos: Vec<f64>,
    #[arg(long)]
    pub omit_constituent: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Taxonomy file with `N<TAB>child<TAB>parent` and `L<TAB>term<TAB>sense` lines.
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// Evaluate these test items instead of a single query.
    #[arg(long, conflicts_with = "query")]
    pub items: Option<PathBuf>,
    /// COMPOUND SYNONYM SYNONYM...
    #[arg(required_unless_present = "items", num_args = 3..)]
    pub query: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Failure(_) => ExitCode::from(1),
            CliError::Usage(_) => ExitCode::from(2),
        }
    }

    pub fn message(&self) -> String {
        let m = match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        };
        m.replace(['\n', '\r'], " ")
    }
}

impl From<compsense_core::Error> for CliError {
    fn from(e: compsense_core::Error) -> Self {
        use compsense_core::Error as E;
        match e {
            E::Usage(_) | E::Precondition(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: compsense_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| {
        let code = CliError::from(e);
        match code {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            CliError::Failure(m) => CliError::Failure(format!("{}: {m}", path.display())),
        }
    })
}

fn check_rho(rho: f64) -> CliResult<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--rho must be positive, got {rho}"
        )))
    }
}

fn load(path: &Path) -> CliResult<ApmiIndex> {
    with_path(path, load_index(open(path)?))
}

fn read_items(path: &Path) -> CliResult<Vec<TestItem>> {
    with_path(path, load_test_items(open(path)?))
}

fn is_conllu(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("conllu" | "conll")
    )
}

/// Shortest representation that round-trips, e.g. `30.0` or `21.25`.
pub fn fmt_score(v: f64) -> String {
    format!("{v:?}")
}

fn json<T: serde::Serialize + ?Sized>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(e.to_string()))
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let text = match cli.command {
        Command::Build(a) => cmd_build(&a)?,
        Command::Expand(a) => cmd_expand(&a)?,
        Command::Disambiguate(a) => cmd_disambiguate(&a)?,
        Command::Evaluate(a) => cmd_evaluate(&a)?,
        Command::Sweep(a) => cmd_sweep(&a)?,
        Command::Baseline(a) => cmd_baseline(&a)?,
    };
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Failure(e.to_string()))
}

pub fn cmd_build(a: &BuildArgs) -> CliResult<String> {
    if !(a.k.is_finite() && a.k >= 0.0) {
        return Err(CliError::Usage(format!("--k must be >= 0, got {}", a.k)));
    }
    let vocab_text = std::fs::read_to_string(&a.vocab)
        .map_err(|e| CliError::Failure(format!("{}: {e}", a.vocab.display())))?;
    let vocab = Vocabulary::from_terms(vocab_text.lines());
    if vocab.is_empty() {
        return Err(CliError::Usage("empty vocabulary".into()));
    }
    let scheme = match a.context {
        ContextArg::Dep => ContextScheme::Dependency,
        ContextArg::Ngram => {
            if a.window == 0 {
                return Err(CliError::Usage("--window must be at least 1".into()));
            }
            ContextScheme::Ngram { window: a.window }
        }
    };
    let mut sentences: Vec<Sentence> = Vec::new();
    for path in &a.corpus {
        if is_conllu(path) {
            sentences.extend(with_path(path, parse_conllu(open(path)?))?);
        } else if scheme == ContextScheme::Dependency {
            return Err(CliError::Usage(format!(
                "{}: dependency contexts need a .conllu corpus; use --context ngram for plain text",
                path.display()
            )));
        } else {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
            sentences.extend(tokenize_plain(&text));
        }
    }
    let config = ApmiConfig {
        k: a.k,
        estimator: match a.estimator {
            EstimatorArg::Joint => Estimator::Joint,
            EstimatorArg::Conditional => Estimator::Conditional,
        },
        log_base: match a.log_base {
            LogArg::E => LogBase::Natural,
            LogArg::Two => LogBase::Base2,
            LogArg::Ten => LogBase::Base10,
        },
    };
    let index = build_index(&sentences, vocab, scheme, config)?;
    let file = File::create(&a.index)
        .map_err(|e| CliError::Failure(format!("{}: {e}", a.index.display())))?;
    with_path(&a.index, save_index(&index, file))?;

    let (words, contexts, nnz) = (index.vocab().len(), index.contexts().len(), index.nnz());
    Ok(match a.format {
        Format::Json => {
            json(&serde_json::json!({
                "index": a.index.display().to_string(),
                "sentences": sentences.len(),
                "words": words,
                "contexts": contexts,
                "nonzeros": nnz,
            }))? + "\n"
        }
        Format::Csv => format!("words,contexts,nonzeros\n{words},{contexts},{nnz}\n"),
        Format::Text => format!(
            "{}: {words} words, {contexts} contexts, {nnz} nonzeros from {} sentences\n",
            a.index.display(),
            sentences.len()
        ),
    })
}

pub fn cmd_expand(a: &ExpandArgs) -> CliResult<String> {
    check_rho(a.rho)?;
    let index = load(&a.index)?;
    let set = InputSet::from_terms(&index, &a.words)?;
    let result = expand(&index, &set, &ExpansionParams::new(a.rho))?;
    let shown: Vec<(&str, f64)> = result
        .ranked
        .iter()
        .filter(|&&(w, s)| s > 0.0 && !set.contains(w))
        .take(a.top)
        .map(|&(w, s)| (index.vocab().term(w), s))
        .collect();
    render_ranking(&shown, a.format, "word")
}

fn render_ranking(rows: &[(&str, f64)], format: Format, label: &str) -> CliResult<String> {
    Ok(match format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(t, s)| serde_json::json!({ label: t, "score": s }))
                .collect();
            json(&v)? + "\n"
        }
        Format::Csv => {
            let mut s = format!("{label},score\n");
            for (t, v) in rows {
                s.push_str(&format!("{},{}\n", csv_field(t), fmt_score(*v)));
            }
            s
        }
        Format::Text => {
            let width = rows
                .iter()
                .map(|(t, _)| t.chars().count())
                .max()
                .unwrap_or(0);
            rows.iter()
                .map(|(t, v)| format!("{t:<width$}  {}\n", fmt_score(*v)))
                .collect()
        }
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn cmd_disambiguate(a: &DisambiguateArgs) -> CliResult<String> {
    check_rho(a.rho)?;
    let index = load(&a.index)?;
    let lexicon = with_path(&a.synonyms, load_synonyms(open(&a.synonyms)?))?;
    let mut query = DisambiguationQuery::new(&a.compound, &a.constituent);
    query.include_constituent = !a.omit_constituent;
    let answer = disambiguate(&index, &query, &lexicon, a.rho)?;
    Ok(match a.format {
        Format::Json => json(&answer)? + "\n",
        Format::Csv | Format::Text => {
            let rows: Vec<(&str, f64)> = answer
                .ranked
                .iter()
                .map(|(t, s)| (t.as_str(), *s))
                .collect();
            let mut s = String::new();
            if a.format == Format::Text {
                s.push_str(&format!(
                    "chosen {}{}\n",
                    answer.chosen,
                    if answer.no_signal { " (no signal)" } else { "" }
                ));
            }
            s + &render_ranking(&rows, a.format, "synonym")?
        }
    })
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> CliResult<String> {
    check_rho(a.rho)?;
    let index = load(&a.index)?;
    let items = read_items(&a.items)?;
    let report = evaluate(&index, &items, a.rho, !a.omit_constituent)?;
    Ok(match a.format {
        Format::Json => json(&report)? + "\n",
        Format::Csv => format!(
            "accuracy,evaluated,correct,skipped\n{},{},{},{}\n",
            report.accuracy,
            report.evaluated,
            report.correct,
            report.skipped.len()
        ),
        Format::Text => report.to_text(),
    })
}

pub fn cmd_sweep(a: &SweepArgs) -> CliResult<String> {
    for &rho in &a.rhos {
        check_rho(rho)?;
    }
    let index = load(&a.index)?;
    let items = read_items(&a.items)?;
    let rows: Vec<SweepRow> = rho_sweep(&index, &items, &a.rhos, !a.omit_constituent)?;
    Ok(match a.format {
        Format::Csv => sweep_csv(&rows),
        Format::Json => json(&rows)? + "\n",
        Format::Text => {
            let mut s = format!("{:>6}  accuracy\n", "rho");
            for r in &rows {
                s.push_str(&format!("{:>6}  {:.4}\n", fmt_score(r.rho), r.accuracy));
            }
            s
        }
    })
}

pub fn cmd_baseline(a: &BaselineArgs) -> CliResult<String> {
    let taxonomy = with_path(&a.taxonomy, Taxonomy::load(open(&a.taxonomy)?))?;
    if let Some(items_path) = &a.items {
        let items = read_items(items_path)?;
        let report = evaluate_baseline(&taxonomy, &items);
        return Ok(match a.format {
            Format::Json => json(&report)? + "\n",
            Format::Csv => format!(
                "accuracy,evaluated,correct,skipped\n{},{},{},{}\n",
                report.accuracy,
                report.evaluated,
                report.correct,
                report.skipped.len()
            ),
            Format::Text => report.to_text(),
        });
    }
    let (compound, synonyms) = a.query.split_first().expect("clap enforces 3+ values");
    let (chosen, score) = baseline_disambiguate(&taxonomy, compound, synonyms)?;
    Ok(match a.format {
        Format::Json => {
            json(&serde_json::json!({
                "compound": compound.to_lowercase(),
                "chosen": chosen,
                "score": score,
            }))? + "\n"
        }
        Format::Csv => format!(
            "chosen,score\n{},{}\n",
            csv_field(&chosen),
            fmt_score(score)
        ),
        Format::Text => format!("chosen {chosen} {}\n", fmt_score(score)),
    })
}

/// Parses arguments, runs, and reports errors as one stderr line.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            let line = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("error: invalid arguments");
            eprintln!("{}", line.trim());
            return ExitCode::from(2);
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
