//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 missing or unreadable input,
//! 3 empty selection, 4 computation failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use crate::assets::AssetHashes;
use crate::corpus::{build_corpus, read_cache, write_cache, Corpus, Selection};
use crate::error::{Error, Result};
use crate::eval::{report, run_grid, write_outputs, GridSpec, DEFAULT_KS};
use crate::features::{
    build_matrix, build_vocabulary, count_terms, vocabulary_report, CountOptions, FeatureMethod,
    DEFAULT_CHUNK_THRESHOLD,
};
use crate::par::{self, Execution};
use crate::pos::Lexicon;
use crate::regress::{fit_model, ModelConfig, ModelKind, SavedModel};
use crate::synth::{generate, SynthSpec};
use crate::text::StopwordPolicy;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISSING_INPUT: i32 = 2;
pub const EXIT_EMPTY_SELECTION: i32 = 3;
pub const EXIT_COMPUTE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "starforge",
    version,
    about = "Predict business star ratings from review text"
)]
pub struct Cli {
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select and sample businesses from a dataset dump and cache them.
    Ingest(IngestArgs),
    /// Report the most frequent terms of a cached corpus.
    TopWords(TopWordsArgs),
    /// Export the frequency matrix of a cached corpus.
    Featurize(FeaturizeArgs),
    /// Fit one model on a whole cached corpus and save it.
    Fit(FitArgs),
    /// Cross-validate every method, model and vocabulary size.
    Grid(GridArgs),
    /// Generate a synthetic dataset with a planted signal.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus cache written by `ingest` [default: <out>/corpus.cache].
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Keep stopwords in the counted tokens.
    #[arg(long)]
    pub no_stopwords: bool,
    /// Businesses with more reviews are counted in chunks spilled to disk.
    #[arg(long, default_value_t = DEFAULT_CHUNK_THRESHOLD, value_parser = parse_positive)]
    pub chunk_threshold: usize,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Business records, one JSON object per line.
    #[arg(long)]
    pub business: PathBuf,
    /// Review records, one JSON object per line.
    #[arg(long)]
    pub review: PathBuf,
    /// Category a business must list. An empty string keeps every business.
    #[arg(long, default_value = "Restaurants")]
    pub category: String,
    /// Number of businesses to sample.
    #[arg(long, value_parser = parse_positive)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
}

#[derive(Debug, Args)]
pub struct TopWordsArgs {
    #[arg(long, default_value = "baseline")]
    pub method: FeatureMethod,
    #[arg(long, default_value_t = 12)]
    pub top: usize,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub count: CountArgs,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long, default_value = "baseline")]
    pub method: FeatureMethod,
    #[arg(long, default_value_t = 50, value_parser = parse_positive)]
    pub k: usize,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub count: CountArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, default_value = "baseline")]
    pub method: FeatureMethod,
    #[arg(long, default_value_t = 50, value_parser = parse_positive)]
    pub k: usize,
    #[arg(long, default_value = "linear")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report unclamped training predictions.
    #[arg(long)]
    pub no_clamp: bool,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub count: CountArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Vocabulary sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KS, value_parser = parse_positive)]
    pub ks: Vec<usize>,
    /// Feature methods, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = FeatureMethod::ALL)]
    pub methods: Vec<FeatureMethod>,
    /// Models, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = ModelKind::ALL)]
    pub models: Vec<ModelKind>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluate unclamped predictions.
    #[arg(long)]
    pub no_clamp: bool,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub count: CountArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of businesses.
    #[arg(long, default_value_t = 500, value_parser = parse_positive)]
    pub n: usize,
    /// Standard deviation of the star noise.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 4)]
    pub reviews_min: usize,
    #[arg(long, default_value_t = 12)]
    pub reviews_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_positive(s: &str) -> std::result::Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// Everything that determines a command's outputs. Thread count is left out
/// because it never changes them.
#[derive(Debug, Default, Serialize)]
pub struct RunConfig {
    pub version: String,
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub business: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub review: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ks: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<FeatureMethod>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<ModelKind>,
    pub seed: u64,
    pub out: String,
    pub stopwords: bool,
    pub clamp: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chunk_threshold: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSpec>,
}

impl RunConfig {
    fn new(subcommand: &str, out: &Path) -> Self {
        RunConfig {
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            out: out.display().to_string(),
            stopwords: true,
            clamp: true,
            ..RunConfig::default()
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    run_config: &'a RunConfig,
    assets: AssetHashes,
    result: T,
}

/// Parse `args` and run the command, returning the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let threads = cli.threads;
    let execution = if threads == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match par::with_threads(threads, || run(cli.command, execution)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::FileNotFound(_)
        | Error::Io(_)
        | Error::InvalidCache(_)
        | Error::MalformedJson { .. } => EXIT_MISSING_INPUT,
        Error::EmptySelection(_) => EXIT_EMPTY_SELECTION,
        Error::Fold { source, .. } => exit_code(source).max(EXIT_COMPUTE),
        _ => EXIT_COMPUTE,
    }
}

pub fn run(command: Command, execution: Execution) -> Result<()> {
    match command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::TopWords(a) => cmd_top_words(a, execution),
        Command::Featurize(a) => cmd_featurize(a, execution),
        Command::Fit(a) => cmd_fit(a, execution),
        Command::Grid(a) => cmd_grid(a, execution),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn corpus_path(corpus: &CorpusArgs, out: &OutArgs) -> PathBuf {
    corpus
        .corpus
        .clone()
        .unwrap_or_else(|| out.out.join("corpus.cache"))
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    read_cache(BufReader::new(File::open(path)?))
}

fn count_options(count: &CountArgs, execution: Execution) -> CountOptions {
    CountOptions {
        stopwords: if count.no_stopwords {
            StopwordPolicy::Disabled
        } else {
            StopwordPolicy::Enabled
        },
        chunk_threshold: count.chunk_threshold,
        spill_dir: None,
        execution,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_manifest<T: Serialize>(
    dir: &Path,
    name: &str,
    config: &RunConfig,
    result: T,
) -> Result<()> {
    write_json(
        &dir.join(name),
        &Manifest {
            run_config: config,
            assets: AssetHashes::embedded(),
            result,
        },
    )
}

fn cmd_ingest(a: IngestArgs) -> Result<()> {
    let category = (!a.category.is_empty()).then(|| a.category.clone());
    let selection = Selection {
        category: category.clone(),
        sample_n: a.sample,
        seed: a.seed,
    };
    let (corpus, stats) = build_corpus(&a.business, &a.review, &selection)?;
    let cache = corpus_path(&a.corpus, &a.out);
    if let Some(parent) = cache.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::create_dir_all(&a.out.out)?;
    write_cache(&corpus, BufWriter::new(File::create(&cache)?))?;

    println!("businesses matched:    {}", stats.businesses_matched);
    println!("businesses sampled:    {}", stats.businesses_sampled);
    println!("reviews retained:      {}", stats.reviews_retained);
    println!("malformed lines:       {}", stats.malformed_lines);
    println!("corpus cache:          {}", cache.display());

    let config = RunConfig {
        business: Some(a.business.display().to_string()),
        review: Some(a.review.display().to_string()),
        corpus: Some(cache.display().to_string()),
        category,
        sample: a.sample,
        seed: a.seed,
        ..RunConfig::new("ingest", &a.out.out)
    };
    #[derive(Serialize)]
    struct IngestResult<'a> {
        corpus_hash: String,
        stats: &'a crate::corpus::IngestStats,
    }
    write_manifest(
        &a.out.out,
        "ingest.json",
        &config,
        IngestResult {
            corpus_hash: corpus.content_hash(),
            stats: &stats,
        },
    )
}

fn cmd_top_words(a: TopWordsArgs, execution: Execution) -> Result<()> {
    let path = corpus_path(&a.corpus, &a.out);
    let corpus = load_corpus(&path)?;
    let opts = count_options(&a.count, execution);
    let counts = count_terms(&corpus, a.method, Lexicon::embedded(), &opts)?;
    #[derive(Serialize)]
    struct Row {
        term: String,
        count: u64,
        share: f64,
    }
    let rows: Vec<Row> = if a.top == 0 {
        Vec::new()
    } else {
        let vocab = build_vocabulary(&counts.global, a.method, a.top)?;
        vocabulary_report(&vocab, a.top)
            .into_iter()
            .zip(&vocab.terms)
            .map(|((term, share), t)| Row {
                term,
                count: t.count,
                share,
            })
            .collect()
    };

    println!("top {} terms ({}):", a.top, a.method);
    for (i, r) in rows.iter().enumerate() {
        println!("{:>3}. {:<20} {:>6.2}%", i + 1, r.term, 100.0 * r.share);
    }
    if rows.len() < a.top {
        println!("only {} distinct terms available", rows.len());
    }

    fs::create_dir_all(&a.out.out)?;
    let config = RunConfig {
        corpus: Some(path.display().to_string()),
        methods: vec![a.method],
        stopwords: !a.count.no_stopwords,
        chunk_threshold: Some(opts.chunk_threshold),
        top: Some(a.top),
        ..RunConfig::new("top-words", &a.out.out)
    };
    write_manifest(
        &a.out.out,
        &format!("top_words_{}.json", a.method.name()),
        &config,
        rows,
    )
}

fn cmd_featurize(a: FeaturizeArgs, execution: Execution) -> Result<()> {
    let path = corpus_path(&a.corpus, &a.out);
    let corpus = load_corpus(&path)?;
    let opts = count_options(&a.count, execution);
    let k = a.k;
    let matrix = build_matrix(&corpus, a.method, k, Lexicon::embedded(), &opts)?;
    let stem = format!("features_{}_k{}", a.method.name(), a.k);
    matrix.export(&a.out.out, &stem)?;
    println!(
        "{} rows x {} terms written to {}",
        matrix.n(),
        matrix.k(),
        a.out.out.join(format!("{stem}.csv")).display()
    );
    let config = RunConfig {
        corpus: Some(path.display().to_string()),
        ks: vec![k],
        methods: vec![a.method],
        stopwords: !a.count.no_stopwords,
        chunk_threshold: Some(opts.chunk_threshold),
        ..RunConfig::new("featurize", &a.out.out)
    };
    write_manifest(
        &a.out.out,
        &format!("{stem}.manifest.json"),
        &config,
        matrix.sidecar(),
    )
}

fn cmd_fit(a: FitArgs, execution: Execution) -> Result<()> {
    let path = corpus_path(&a.corpus, &a.out);
    let corpus = load_corpus(&path)?;
    let opts = count_options(&a.count, execution);
    let k = a.k;
    let matrix = build_matrix(&corpus, a.method, k, Lexicon::embedded(), &opts)?;
    let config = ModelConfig {
        clamp: !a.no_clamp,
        ..ModelConfig::default()
    };
    let model = fit_model(a.model, &matrix.x, &matrix.y, &config, a.seed)?;
    let predicted = model.predict(&matrix.x, config.clamp)?;
    let train_rmse = crate::eval::rmse(&matrix.y, &predicted)?;
    let terms = matrix.vocabulary.term_names().map(str::to_string).collect();
    fs::create_dir_all(&a.out.out)?;
    let stem = format!("model_{}_{}_k{}", a.method.name(), a.model.name(), a.k);
    let saved = SavedModel::new(model, terms);
    saved.write_json(BufWriter::new(File::create(
        a.out.out.join(format!("{stem}.json")),
    )?))?;
    println!(
        "{} / {} / K={}: training RMSE {train_rmse:.4}",
        a.method, a.model, a.k
    );

    let run_config = RunConfig {
        corpus: Some(path.display().to_string()),
        ks: vec![k],
        methods: vec![a.method],
        models: vec![a.model],
        seed: a.seed,
        stopwords: !a.count.no_stopwords,
        clamp: config.clamp,
        chunk_threshold: Some(opts.chunk_threshold),
        ..RunConfig::new("fit", &a.out.out)
    };
    #[derive(Serialize)]
    struct FitResult {
        rows: usize,
        training_rmse: f64,
        corpus_hash: String,
    }
    write_manifest(
        &a.out.out,
        &format!("{stem}.manifest.json"),
        &run_config,
        FitResult {
            rows: matrix.n(),
            training_rmse: train_rmse,
            corpus_hash: matrix.metadata.corpus_hash.clone(),
        },
    )
}

fn cmd_grid(a: GridArgs, execution: Execution) -> Result<()> {
    let path = corpus_path(&a.corpus, &a.out);
    let corpus = load_corpus(&path)?;
    let counting = count_options(&a.count, execution);
    let ks = a.ks.clone();
    let spec = GridSpec {
        methods: a.methods.clone(),
        models: a.models.clone(),
        ks: ks.clone(),
        seed: a.seed,
        models_config: ModelConfig {
            clamp: !a.no_clamp,
            ..ModelConfig::default()
        },
        counting: counting.clone(),
    };
    info!(
        "grid: {} methods x {} models x {} sizes over {} businesses",
        a.methods.len(),
        a.models.len(),
        ks.len(),
        corpus.len()
    );
    let results = run_grid(&corpus, &spec, Lexicon::embedded())?;
    let mut rep = report(&results)?;
    let config = RunConfig {
        corpus: Some(path.display().to_string()),
        ks,
        methods: a.methods,
        models: a.models,
        seed: a.seed,
        stopwords: !a.count.no_stopwords,
        clamp: !a.no_clamp,
        chunk_threshold: Some(counting.chunk_threshold),
        ..RunConfig::new("grid", &a.out.out)
    };
    rep.metadata.run_config = Some(serde_json::to_value(&config)?);
    write_outputs(&a.out.out, &results, &rep)?;

    let best = results
        .iter()
        .min_by(|x, y| x.mean_rmse.total_cmp(&y.mean_rmse))
        .expect("grid results are non-empty");
    println!("{} cells evaluated", results.len());
    for row in rep.table.iter().filter(|r| r.method_minimum) {
        println!(
            "best for {:<15} {:<6} K={:<5} RMSE {:.4}",
            row.method, row.model, row.best_k, row.best_rmse
        );
    }
    println!(
        "best overall: method={} model={} k={} rmse={:.4}",
        best.method, best.model, best.k, best.mean_rmse
    );
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        n_businesses: a.n,
        reviews_per_business: (a.reviews_min, a.reviews_max),
        noise_sigma: a.sigma,
        seed: a.seed,
        ..SynthSpec::default()
    };
    let files = generate(&spec, &a.out.out)?;
    println!(
        "wrote {} and {}",
        files.business.display(),
        files.review.display()
    );
    let config = RunConfig {
        seed: a.seed,
        synth: Some(spec),
        ..RunConfig::new("synth", &a.out.out)
    };
    write_manifest(&a.out.out, "synth.json", &config, ())
}
