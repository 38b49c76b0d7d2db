//! The `rooms` command line.
//!
//! Exit codes: 0 success, 1 internal failure, 2 bad input (including
//! usage errors). Outputs are written to a temporary file and renamed into
//! place, so a failed run never leaves a partial report behind.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;

use crate::benchmark::{load_benchmark, plutchik, Benchmark, Intensity};
use crate::corpus::{self, HashtagSets, TokenizedDocument, Tokenizer};
use crate::error::{Error, Result};
use crate::export::{self, write_atomically, ReportFormat};
use crate::par::Execution;
use crate::polarization::{
    cluster, compare_columns, polarization_table, EmotionSelector, Populations,
    DEFAULT_CLUSTER_THRESHOLD,
};
use crate::room::{load_room, save_room, Room, RoomFormat};
use crate::scoring::{
    build_simset, emotional_dna, EmotionScorer, GenericScorer, OovPolicy, SimsetConfig,
};
use crate::trainer::{train_with_report, TrainConfig};

#[derive(Debug, Parser)]
#[command(
    name = "rooms",
    version,
    about = "Train embedding rooms, score documents, compare points of view"
)]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a room from a tokenized corpus (one document per line)
    Train(TrainArgs),
    /// Split newline-delimited JSON tweets into two partisan corpora
    Partition(PartitionArgs),
    /// Score documents against a benchmark through one room
    Score(ScoreArgs),
    /// Score documents through two rooms and report emotional polarization
    Compare(CompareArgs),
    /// Print a token's simset
    Simset(SimsetArgs),
    /// Export normalized stacked-bar ("emotional DNA") data
    Dna(DnaArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RoomFormatArg {
    Text,
    Binary,
}

impl From<RoomFormatArg> for RoomFormat {
    fn from(f: RoomFormatArg) -> Self {
        match f {
            RoomFormatArg::Text => RoomFormat::Text,
            RoomFormatArg::Binary => RoomFormat::Binary,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormatArg {
    Csv,
    Json,
}

impl From<ReportFormatArg> for ReportFormat {
    fn from(f: ReportFormatArg) -> Self {
        match f {
            ReportFormatArg::Csv => ReportFormat::Csv,
            ReportFormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DocsFormat {
    /// `.jsonl`/`.ndjson` files are raw JSON documents, anything else is tokenized
    Auto,
    Tokens,
    Jsonl,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Representative {
    Low,
    Mid,
    High,
    Sum,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Tokenized corpus: one document per line, tokens separated by spaces
    #[arg(long)]
    corpus: PathBuf,
    /// Output room file
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "binary")]
    format: RoomFormatArg,
    /// Embedding size
    #[arg(long, default_value_t = 300)]
    dim: usize,
    /// Maximum context offset
    #[arg(long, default_value_t = 5)]
    window: usize,
    /// Drop tokens seen fewer times than this
    #[arg(long, default_value_t = 2)]
    min_count: u64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    /// Noise samples per positive pair
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    /// Initial learning rate, decayed linearly to 1e-4
    #[arg(long, default_value_t = 0.025)]
    lr: f32,
    /// Frequent-word subsampling threshold (off when omitted)
    #[arg(long)]
    subsample: Option<f64>,
    /// Seed for all randomness
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Training threads; more than 1 is faster but not reproducible
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Args)]
struct PartitionArgs {
    /// Newline-delimited JSON with "id", "text" and optional "meta"
    #[arg(long)]
    tweets: PathBuf,
    /// Hashtag sets JSON (defaults to the bundled 2016 election sets)
    #[arg(long)]
    sets: Option<PathBuf>,
    /// Tokenized corpus for group T
    #[arg(long)]
    out_t: PathBuf,
    /// Tokenized corpus for group C
    #[arg(long)]
    out_c: PathBuf,
    #[arg(long)]
    remove_stopwords: bool,
}

#[derive(Debug, Args)]
struct SimsetOpts {
    /// Similarity threshold for simset neighbours
    #[arg(id = "simset_t", long = "t", default_value_t = 0.7)]
    threshold: f64,
    /// Maximum simset neighbours besides the seed
    #[arg(long, default_value_t = 10)]
    k: usize,
}

impl SimsetOpts {
    fn config(&self) -> Result<SimsetConfig> {
        SimsetConfig::new(self.threshold, self.k)
    }
}

#[derive(Debug, Args)]
struct DocOpts {
    /// Documents to score
    #[arg(long)]
    docs: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    docs_format: DocsFormat,
    /// Remove English stop-words when cleaning raw JSON documents
    #[arg(long)]
    remove_stopwords: bool,
}

impl DocOpts {
    fn load(&self) -> Result<Vec<TokenizedDocument>> {
        let jsonl = match self.docs_format {
            DocsFormat::Jsonl => true,
            DocsFormat::Tokens => false,
            DocsFormat::Auto => matches!(
                self.docs.extension().and_then(|e| e.to_str()),
                Some("jsonl" | "ndjson")
            ),
        };
        if jsonl {
            let tokenizer = Tokenizer {
                remove_stopwords: self.remove_stopwords,
            };
            let raw = corpus::read_jsonl(&self.docs)?;
            Ok(raw
                .iter()
                .map(|d| tokenizer.clean_and_tokenize(d))
                .collect())
        } else {
            corpus::read_token_corpus(&self.docs)
        }
    }
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    room: PathBuf,
    #[command(flatten)]
    docs: DocOpts,
    /// `plutchik` or a benchmark file of `label: token [token ...]` lines
    #[arg(long, default_value = "plutchik")]
    benchmark: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormatArg,
    #[command(flatten)]
    simset: SimsetOpts,
    /// Score benchmark entries missing from the room as 0 instead of failing
    #[arg(long)]
    skip_missing: bool,
    /// Scoring threads
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Room of group T
    #[arg(long)]
    room_t: PathBuf,
    /// Room of group C
    #[arg(long)]
    room_c: PathBuf,
    #[command(flatten)]
    docs: DocOpts,
    #[arg(long, default_value = "plutchik")]
    benchmark: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormatArg,
    /// P at or above which an emotion counts as polarizing
    #[arg(long, default_value_t = DEFAULT_CLUSTER_THRESHOLD)]
    threshold: f64,
    /// Which Plutchik number represents each channel
    #[arg(long, value_enum, default_value = "mid")]
    representative: Representative,
    /// Population of group T (defaults to its scored documents)
    #[arg(long)]
    pop_t: Option<u64>,
    /// Population of group C (defaults to its scored documents)
    #[arg(long)]
    pop_c: Option<u64>,
    #[command(flatten)]
    simset: SimsetOpts,
    #[arg(long)]
    skip_missing: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Args)]
struct SimsetArgs {
    #[arg(long)]
    room: PathBuf,
    #[arg(long)]
    token: String,
    #[command(flatten)]
    simset: SimsetOpts,
}

#[derive(Debug, Args)]
struct DnaArgs {
    #[arg(long)]
    room: PathBuf,
    #[command(flatten)]
    docs: DocOpts,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormatArg,
    #[command(flatten)]
    simset: SimsetOpts,
    #[arg(long)]
    skip_missing: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();

    let result = match &cli.command {
        Command::Train(a) => train(a),
        Command::Partition(a) => partition(a),
        Command::Score(a) => score(a),
        Command::Compare(a) => compare(a),
        Command::Simset(a) => simset(a),
        Command::Dna(a) => dna(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}

fn check_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Error::input(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn open_room(path: &Path) -> Result<Room> {
    load_room(path, RoomFormat::detect(path)?)
}

fn policy(skip: bool) -> OovPolicy {
    if skip {
        OovPolicy::Skip
    } else {
        OovPolicy::Error
    }
}

/// Runs `f` on a dedicated pool of `workers` threads when more than one is
/// requested.
fn with_workers<T: Send>(
    workers: usize,
    f: impl FnOnce(Execution) -> Result<T> + Send,
) -> Result<T> {
    if workers == 0 {
        return Err(Error::input("--workers must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?;
        return pool.install(|| f(Execution::Parallel));
    }
    f(Execution::Sequential)
}

enum BenchmarkChoice {
    Plutchik,
    Generic(Benchmark),
}

fn benchmark_choice(spec: &str) -> Result<BenchmarkChoice> {
    if spec == "plutchik" {
        Ok(BenchmarkChoice::Plutchik)
    } else {
        load_benchmark(Path::new(spec)).map(BenchmarkChoice::Generic)
    }
}

fn train(a: &TrainArgs) -> Result<()> {
    check_output(&a.out)?;
    let config = TrainConfig {
        dim: a.dim,
        window: a.window,
        min_count: a.min_count,
        epochs: a.epochs,
        negatives: a.negatives,
        learning_rate: a.lr,
        subsample: a.subsample,
        seed: a.seed,
        workers: a.workers,
        ..TrainConfig::default()
    };
    config.validate()?;
    let started = Instant::now();
    let docs = corpus::read_token_corpus(&a.corpus)?;
    let sentences: Vec<Vec<String>> = docs.into_iter().map(|d| d.tokens).collect();
    let (room, report) = train_with_report(&sentences, &config)?;
    save_room(&room, &a.out, a.format.into())?;
    println!(
        "vocab_size={} tokens={} dim={} wall_time={:.3}s",
        report.vocab_size,
        report.total_tokens,
        room.dim(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn partition(a: &PartitionArgs) -> Result<()> {
    check_output(&a.out_t)?;
    check_output(&a.out_c)?;
    let sets = match &a.sets {
        Some(p) => HashtagSets::load(p)?,
        None => HashtagSets::election_2016(),
    };
    let docs = corpus::read_jsonl(&a.tweets)?;
    let tokenizer = Tokenizer {
        remove_stopwords: a.remove_stopwords,
    };
    let out = corpus::partition(&docs, &sets, &tokenizer, Execution::default());
    corpus::write_token_corpus(&a.out_t, &out.group_t)?;
    corpus::write_token_corpus(&a.out_c, &out.group_c)?;
    let [t, c, amb, none] = out.counts();
    println!("group_T={t} group_C={c} ambiguous={amb} unclassified={none}");
    Ok(())
}

fn write_report(path: &Path, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    write_atomically(path, |w| f(w))
}

fn score(a: &ScoreArgs) -> Result<()> {
    check_output(&a.out)?;
    let cfg = a.simset.config()?;
    let bench = benchmark_choice(&a.benchmark)?;
    let room = open_room(&a.room)?;
    let docs = a.docs.load()?;
    if docs.is_empty() {
        warn!("no documents in {}", a.docs.docs.display());
    }
    let format: ReportFormat = a.format.into();
    let (scored, oov, total, degenerate) = match bench {
        BenchmarkChoice::Plutchik => {
            let scorer = EmotionScorer::new(&room, &plutchik(), cfg, policy(a.skip_missing))?;
            let profiles = with_workers(a.workers, |exec| {
                scorer.with_execution(exec).score_documents(&docs, exec)
            })?;
            write_report(&a.out, |w| match format {
                ReportFormat::Csv => export::write_profiles_csv(w, &profiles),
                ReportFormat::Json => export::write_profiles_json(w, &profiles),
            })?;
            summarize(profiles.iter().map(|p| (p.coverage, p.degenerate)))
        }
        BenchmarkChoice::Generic(bench) => {
            let scorer = GenericScorer::new(&room, &bench, cfg, policy(a.skip_missing))?;
            let labels = scorer.labels().to_vec();
            let profiles = with_workers(a.workers, |exec| {
                scorer.with_execution(exec).score_documents(&docs, exec)
            })?;
            write_report(&a.out, |w| match format {
                ReportFormat::Csv => export::write_generic_csv(w, &labels, &profiles),
                ReportFormat::Json => export::write_generic_json(w, &profiles),
            })?;
            summarize(profiles.iter().map(|p| (p.coverage, p.degenerate)))
        }
    };
    eprintln!(
        "scored {} documents ({degenerate} without in-vocabulary tokens); tokens scored {scored}, out of vocabulary {oov}, total {total}",
        docs.len()
    );
    Ok(())
}

fn summarize(
    items: impl Iterator<Item = (crate::scoring::Coverage, bool)>,
) -> (usize, usize, usize, usize) {
    items.fold((0, 0, 0, 0), |(s, o, t, d), (c, deg)| {
        (
            s + c.tokens_scored,
            o + c.tokens_oov,
            t + c.tokens_total,
            d + deg as usize,
        )
    })
}

fn compare(a: &CompareArgs) -> Result<()> {
    check_output(&a.out)?;
    let cfg = a.simset.config()?;
    let bench = benchmark_choice(&a.benchmark)?;
    let room_t = open_room(&a.room_t)?;
    let room_c = open_room(&a.room_c)?;
    let docs = a.docs.load()?;
    let populations = Populations {
        t: a.pop_t,
        c: a.pop_c,
    };
    let rows = match bench {
        BenchmarkChoice::Plutchik => {
            let emotion = plutchik();
            let t = EmotionScorer::new(&room_t, &emotion, cfg, policy(a.skip_missing))?;
            let c = EmotionScorer::new(&room_c, &emotion, cfg, policy(a.skip_missing))?;
            let (pt, pc) = with_workers(a.workers, |exec| {
                Ok((
                    t.with_execution(exec).score_documents(&docs, exec)?,
                    c.with_execution(exec).score_documents(&docs, exec)?,
                ))
            })?;
            let selectors = match a.representative {
                Representative::Low => EmotionSelector::all(Intensity::Low),
                Representative::Mid => EmotionSelector::all(Intensity::Mid),
                Representative::High => EmotionSelector::all(Intensity::High),
                Representative::Sum => EmotionSelector::all_sums(),
            };
            polarization_table(&pt, &pc, &selectors, populations)?
        }
        BenchmarkChoice::Generic(bench) => {
            let t = GenericScorer::new(&room_t, &bench, cfg, policy(a.skip_missing))?;
            let c = GenericScorer::new(&room_c, &bench, cfg, policy(a.skip_missing))?;
            let (pt, pc) = with_workers(a.workers, |exec| {
                Ok((
                    t.with_execution(exec).score_documents(&docs, exec)?,
                    c.with_execution(exec).score_documents(&docs, exec)?,
                ))
            })?;
            let column =
                |profiles: &[crate::scoring::GenericProfile], label: &str| -> Option<Vec<f64>> {
                    profiles
                        .iter()
                        .filter(|p| !p.degenerate)
                        .map(|p| {
                            p.scores
                                .iter()
                                .find(|(l, _)| l == label)
                                .and_then(|(_, v)| *v)
                        })
                        .collect()
                };
            let mut columns = Vec::new();
            for label in bench.labels() {
                match (column(&pt, label), column(&pc, label)) {
                    (Some(vt), Some(vc)) => columns.push((label.to_owned(), vt, vc)),
                    _ => warn!("label {label:?} is not scorable in both rooms; left out"),
                }
            }
            compare_columns(&columns, populations)?
        }
    };
    let clusters = cluster(&rows, a.threshold);
    write_report(&a.out, |w| match a.format.into() {
        ReportFormat::Csv => export::write_polarization_csv(w, &rows, &clusters),
        ReportFormat::Json => export::write_polarization_json(w, &rows, &clusters),
    })?;
    eprintln!(
        "compared {} emotions over {} documents; polarizing: {}",
        rows.len(),
        docs.len(),
        if clusters.a.is_empty() {
            "none".to_owned()
        } else {
            clusters.a.join(", ")
        }
    );
    Ok(())
}

fn simset(a: &SimsetArgs) -> Result<()> {
    let cfg = a.simset.config()?;
    let room = open_room(&a.room)?;
    let set = build_simset(&room, &a.token, &cfg)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for (token, weight) in &set.members {
        writeln!(out, "{token}\t{weight}").map_err(|e| Error::Internal(e.to_string()))?;
    }
    Ok(())
}

fn dna(a: &DnaArgs) -> Result<()> {
    check_output(&a.out)?;
    let cfg = a.simset.config()?;
    let room = open_room(&a.room)?;
    let docs = a.docs.load()?;
    let scorer = EmotionScorer::new(&room, &plutchik(), cfg, policy(a.skip_missing))?;
    let profiles = with_workers(a.workers, |exec| {
        scorer.with_execution(exec).score_documents(&docs, exec)
    })?;
    let mut rows = Vec::with_capacity(profiles.len());
    for p in &profiles {
        match emotional_dna(p) {
            Ok(dna) => rows.push((p.doc_id.clone(), dna)),
            Err(e) => warn!("skipping document: {e}"),
        }
    }
    write_report(&a.out, |w| match a.format.into() {
        ReportFormat::Csv => export::write_dna_csv(w, &rows),
        ReportFormat::Json => export::write_dna_json(w, &rows),
    })
}
