//! `tsetlin`: train, predict, export, search, cv and bench from the shell.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or model error. Errors go to
//! stderr as a single line starting with `error:`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use tsetlin_core::dataio::{self, Artifact};
use tsetlin_core::export::{export_program, export_rules_text};
use tsetlin_core::tuning::{self, SearchOptions, SearchSpace, Validation};
use tsetlin_core::{evaluate, Config, Dataset, Error, ExplanationLevel, RuleSet, Trainer};

#[derive(Parser)]
#[command(name = "tsetlin", version, about = "Block-parallel Tsetlin machine trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model, printing one line per epoch.
    Train(TrainArgs),
    /// Predict (and optionally explain) every example of a data file.
    Predict(PredictArgs),
    /// Emit a C99 header or a plain-text rule listing.
    Export(ExportArgs),
    /// Random hyperparameter search.
    Search(SearchArgs),
    /// Stratified k-fold cross-validation.
    Cv(CvArgs),
    /// Time training over clause counts and worker counts.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct Hyper {
    /// Feature count; inferred from the data when omitted.
    #[arg(long)]
    literals: Option<usize>,
    #[arg(long, default_value_t = 100)]
    clauses: usize,
    /// Class count; inferred as max label + 1 when omitted.
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long, default_value_t = Config::DEFAULT_S)]
    s: f64,
    #[arg(long, default_value_t = Config::DEFAULT_THRESHOLD)]
    threshold: u32,
    /// Literal budget per clause; unbounded when omitted.
    #[arg(long)]
    budget: Option<u32>,
    /// Always reward included true literals.
    #[arg(long)]
    boost: bool,
    /// Clause blocks; defaults to --jobs if positive, else 4.
    #[arg(long)]
    blocks: Option<usize>,
    /// Worker threads; -1 uses every available core.
    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    jobs: i32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train the sparse engine (negated literals are disabled).
    #[arg(long)]
    sparse: bool,
    #[arg(long, default_value_t = Config::DEFAULT_SPARSE_FLOOR, allow_negative_numbers = true)]
    sparse_floor: i8,
    /// Stored pairs per sparse clause; unbounded when omitted.
    #[arg(long)]
    sparse_capacity: Option<u32>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    eval: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long)]
    save: Option<PathBuf>,
    #[command(flatten)]
    hyper: Hyper,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Literal,
    Feature,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Append per-example scores at this level.
    #[arg(long, value_enum)]
    explain: Option<Level>,
    /// Class to explain; defaults to the predicted class.
    #[arg(long)]
    class: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "tm")]
    prefix: String,
    /// Write the human-readable rule listing instead of C.
    #[arg(long)]
    rules_text: bool,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    space: PathBuf,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    /// Score each trial by k-fold CV instead of a holdout split.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    holdout: f64,
    #[command(flatten)]
    hyper: Hyper,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[command(flatten)]
    hyper: Hyper,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    eval: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    clauses_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,4")]
    jobs_list: Vec<i32>,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[command(flatten)]
    hyper: Hyper,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::SearchSpace(_) | Error::SymbolPrefix(_) | Error::ClassOutOfRange { .. } => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

fn with_path(path: &Path, e: Error) -> Failure {
    match Failure::from(e) {
        Failure::Data(m) => Failure::Data(format!("{}: {m}", path.display())),
        usage => usage,
    }
}

/// Sparse text if the first content line is a `#` header, dense CSV otherwise.
fn load_data(path: &Path) -> CliResult<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let sparse = text.lines().find(|l| !l.trim().is_empty()).is_some_and(|l| l.trim_start().starts_with('#'));
    let parsed = if sparse {
        dataio::parse_sparse(&text).map(Dataset::from)
    } else {
        dataio::parse_dense(&text).map(Dataset::from)
    };
    parsed.map_err(|e| with_path(path, e))
}

/// Convert to the representation the selected engine trains on.
fn for_engine(data: Dataset, sparse: bool) -> Dataset {
    match (data, sparse) {
        (Dataset::Dense(d), true) => Dataset::Sparse(d.to_sparse()),
        (Dataset::Sparse(d), false) => Dataset::Dense(d.to_dense()),
        (d, _) => d,
    }
}

fn resolve_config(h: &Hyper, data: &Dataset, extra: Option<&Dataset>) -> CliResult<Config> {
    let n_literals = h.literals.unwrap_or(data.n_literals());
    let max_label = data
        .labels()
        .into_iter()
        .chain(extra.map(|d| d.labels()).unwrap_or_default())
        .max()
        .unwrap_or(0);
    let n_classes = h.classes.unwrap_or((max_label + 1).max(2));
    let mut cfg = Config::new(n_literals, h.clauses, n_classes);
    cfg.s = h.s;
    cfg.threshold = h.threshold;
    cfg.n_literal_budget = h.budget;
    cfg.boost_true_positive = h.boost;
    cfg.seed = h.seed;
    let default_blocks = if h.jobs > 0 { h.jobs as usize } else { 4 };
    cfg.n_blocks = h.blocks.unwrap_or(default_blocks.min(h.clauses.max(1)));
    cfg.negated_literals_enabled = !h.sparse;
    cfg.sparse_floor = h.sparse_floor;
    cfg.sparse_capacity = h.sparse_capacity;
    cfg.validate()?;
    eprintln!("config: {}", cfg.describe());
    Ok(cfg)
}

fn fmt_acc(a: Option<f64>) -> String {
    a.map_or_else(|| "NA".to_string(), |a| format!("{a:.4}"))
}

fn train(args: TrainArgs) -> CliResult {
    let h = &args.hyper;
    let data = for_engine(load_data(&args.data)?, h.sparse);
    let eval = match &args.eval {
        Some(p) => Some(for_engine(load_data(p)?, h.sparse)),
        None => None,
    };
    let cfg = resolve_config(h, &data, eval.as_ref())?;
    eprintln!("epochs: {} jobs: {}", args.epochs, h.jobs);
    let mut prev = Duration::ZERO;
    let stdout = io::stdout();
    let run = Trainer::new(cfg)
        .epochs(args.epochs)
        .jobs(h.jobs)
        .on_epoch(|m| {
            let dt = m.elapsed - prev;
            prev = m.elapsed;
            let _ = writeln!(
                stdout.lock(),
                "epoch {} acc {} time_s {:.3}",
                m.epoch,
                fmt_acc(m.eval_accuracy),
                dt.as_secs_f64()
            );
        })
        .fit(&data, eval.as_ref())?;
    if let Some(p) = &args.save {
        dataio::save_model(&Artifact::Model(run.model), p).map_err(|e| with_path(p, e))?;
        eprintln!("saved: {}", p.display());
    }
    Ok(())
}

fn load_artifact(path: &Path) -> CliResult<Artifact> {
    let art = dataio::load_model(path).map_err(|e| with_path(path, e))?;
    eprintln!("config: {}", art.config().describe());
    Ok(art)
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Data(format!("{}: {e}", p.display()))),
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn predict(args: PredictArgs) -> CliResult {
    let art = load_artifact(&args.model)?;
    let rs: RuleSet = art.rule_set();
    let data = load_data(&args.data)?;
    if data.n_literals() != rs.n_literals() {
        return Err(Failure::Data(format!(
            "{}: data has {} features, model expects {}",
            args.data.display(),
            data.n_literals(),
            rs.n_literals()
        )));
    }
    if let Some(c) = args.class.filter(|&c| c >= rs.n_classes()) {
        return Err(Error::ClassOutOfRange { class: c, n_classes: rs.n_classes() }.into());
    }
    let dense = match data {
        Dataset::Dense(d) => d,
        Dataset::Sparse(s) => s.to_dense(),
    };
    let mut out = String::new();
    let mut correct = 0;
    for i in 0..dense.len() {
        let x = dense.row(i);
        let class = match args.explain {
            None => {
                let c = rs.predict(x)?;
                let _ = writeln!(out, "{c}");
                c
            }
            Some(level) => {
                let level = match level {
                    Level::Literal => ExplanationLevel::Literal,
                    Level::Feature => ExplanationLevel::Feature,
                };
                let (c, ex) = rs.predict_and_explain(x, level, args.class)?;
                let scores: Vec<String> = ex.scores.iter().map(|s| s.to_string()).collect();
                let _ = writeln!(out, "{c}\t{}\t{}", ex.for_class, scores.join(","));
                c
            }
        };
        correct += (class == dense.label(i)) as usize;
    }
    write_output(args.out.as_deref(), &out)?;
    if !dense.is_empty() {
        eprintln!("accuracy: {:.4} ({correct}/{})", correct as f64 / dense.len() as f64, dense.len());
    }
    Ok(())
}

fn export(args: ExportArgs) -> CliResult {
    let art = load_artifact(&args.model)?;
    let rs = art.rule_set();
    let text = if args.rules_text {
        export_rules_text(&rs)
    } else {
        export_program(&rs, &args.prefix)?
    };
    write_output(args.out.as_deref(), &text)?;
    eprintln!("rules: {}", rs.len());
    Ok(())
}

fn search(args: SearchArgs) -> CliResult {
    let h = &args.hyper;
    let space = SearchSpace::load(&args.space).map_err(|e| with_path(&args.space, e))?;
    let data = for_engine(load_data(&args.data)?, h.sparse);
    let base = resolve_config(h, &data, None)?;
    let opts = SearchOptions {
        n_trials: args.trials,
        n_epochs: args.epochs,
        seed: h.seed,
        validation: match args.k {
            Some(k) => Validation::CrossValidation(k),
            None => Validation::Holdout(args.holdout),
        },
        n_jobs: h.jobs,
    };
    let trials = tuning::random_search(&space, &base, &data, &opts)?;
    let mut out = String::from("rank trial acc params\n");
    for (rank, t) in trials.iter().enumerate() {
        let params: Vec<String> = t.params.iter().map(|(n, v)| format!("{n}={v}")).collect();
        let _ = writeln!(out, "{} {} {:.4} {}", rank + 1, t.index, t.accuracy, params.join(" "));
    }
    let _ = writeln!(out, "best: {}", trials[0].config.describe());
    write_output(None, &out)
}

fn cv(args: CvArgs) -> CliResult {
    let h = &args.hyper;
    let data = for_engine(load_data(&args.data)?, h.sparse);
    let cfg = resolve_config(h, &data, None)?;
    let report = tuning::cross_validate_jobs(&cfg, &data, args.k, args.epochs, h.seed, h.jobs)?;
    let mut out = String::new();
    for (i, a) in report.fold_accuracies.iter().enumerate() {
        let _ = writeln!(out, "fold {i} acc {a:.4}");
    }
    let _ = writeln!(out, "mean {:.4} std {:.4}", report.mean, report.std);
    write_output(None, &out)
}

/// Blocks are fixed across job counts so every row trains the same model.
fn bench(args: BenchArgs) -> CliResult {
    let h = &args.hyper;
    if args.clauses_list.is_empty() || args.jobs_list.is_empty() {
        return Err(Failure::Usage("--clauses-list and --jobs-list must be nonempty".into()));
    }
    let data = for_engine(load_data(&args.data)?, h.sparse);
    let eval = match &args.eval {
        Some(p) => Some(for_engine(load_data(p)?, h.sparse)),
        None => None,
    };
    let max_jobs = args.jobs_list.iter().copied().filter(|&j| j > 0).max().unwrap_or(4) as usize;
    println!("clauses jobs blocks time_s speedup acc");
    for &clauses in &args.clauses_list {
        let mut hyper = h.clone();
        hyper.clauses = clauses;
        hyper.blocks = Some(h.blocks.unwrap_or(max_jobs).min(clauses.max(1)));
        let cfg = resolve_config(&hyper, &data, eval.as_ref())?;
        let mut baseline = None;
        for &jobs in &args.jobs_list {
            let start = Instant::now();
            let run = Trainer::new(cfg.clone()).epochs(args.epochs).jobs(jobs).fit(&data, None)?;
            let secs = start.elapsed().as_secs_f64();
            let base = *baseline.get_or_insert(secs);
            let acc = match &eval {
                Some(e) => Some(evaluate(&run.model, e)?),
                None => None,
            };
            let line = format!(
                "{clauses} {jobs} {} {secs:.3} {:.2}x {}\n",
                cfg.n_blocks,
                base / secs.max(1e-9),
                fmt_acc(acc)
            );
            io::stdout().lock().write_all(line.as_bytes())?;
        }
    }
    eprintln!("speedup is relative to the first --jobs-list entry; raw seconds are hardware-specific");
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Export(a) => export(a),
        Command::Search(a) => search(a),
        Command::Cv(a) => cv(a),
        Command::Bench(a) => bench(a),
    }
}

fn single_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {}", single_line(&m));
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {}", single_line(&m));
            ExitCode::from(2)
        }
    }
}
