//! Command-line entry points and the annotation HTTP service.

pub mod server;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use claimforge::annotate::paraphrase::{ParaphraseTable, ProviderConfig};
use claimforge::annotate::{EntityProvider, StandoffStore};
use claimforge::corpus::read_corpus;
use claimforge::datagen::{
    is_held_out, manifest_path, read_dataset, run_pipeline, write_dataset, write_manifest, Resources,
};
use claimforge::eval::{evaluate_predictions, evaluate_scorer, ranking_accuracy, read_ranking_items, EvalOptions};
use claimforge::scoring::{load_external_predictions, scorer_by_name, train_baseline, BaselineScorer, OverlapScorer, TrainConfig};
use claimforge::service::{build_report, read_log, AnnotationService, HighlightPolicy, SessionHeader};
use claimforge::{GenConfig, Label, TransformKind};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "claimforge", version, about = "Generate, score and annotate claim consistency data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a labelled dataset from a corpus.
    Generate(GenerateArgs),
    /// Score a dataset from a predictions file or a built-in scorer.
    Evaluate(EvaluateArgs),
    /// Pairwise ranking accuracy over (sentence, positive, negative) triples.
    Rank(RankArgs),
    /// Train the logistic-regression baseline.
    TrainBaseline(TrainArgs),
    /// Run the annotation HTTP service.
    Serve(ServeArgs),
    /// Print the report for an annotation log.
    Report(ReportArgs),
    /// Write a synthetic corpus and its paraphrase table.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// TOML file with a full generation config; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub noise_p: Option<f64>,
    /// Comma-separated transforms, each optionally `KIND:weight`.
    #[arg(long)]
    pub transforms: Option<String>,
    /// Target fraction of INCONSISTENT examples.
    #[arg(long)]
    pub balance: Option<f64>,
    #[arg(long)]
    pub claims_per_doc: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Stand-off entity annotations (JSONL) instead of the built-in tagger.
    #[arg(long)]
    pub entities: Option<PathBuf>,
    /// Offline paraphrase table (JSONL).
    #[arg(long)]
    pub paraphrase_table: Option<PathBuf>,
    /// Provider configuration file with a `[paraphrase]` section.
    #[arg(long)]
    pub provider_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Predictions JSONL with `id` and `p_consistent`.
    #[arg(long, conflicts_with = "scorer")]
    pub pred: Option<PathBuf>,
    #[arg(long)]
    pub scorer: Option<String>,
    /// Baseline model for `--scorer baseline`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = claimforge::scoring::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Class treated as positive for F1.
    #[arg(long, default_value = "INCONSISTENT")]
    pub positive: Label,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub scorer: String,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().lr)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hold out this fraction of documents and report metrics on them.
    #[arg(long)]
    pub held_out: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "ab")]
    pub highlights: HighlightPolicy,
    #[arg(long, default_value_t = 3)]
    pub n_judgments: usize,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long)]
    pub log: PathBuf,
    /// Model spans to show; defaults to the overlap scorer's spans.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    #[arg(long)]
    pub session: Option<String>,
    /// Directory with the annotation UI build.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub log: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub docs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub table: Option<PathBuf>,
}

fn print_json(value: &impl Serialize, out: &mut dyn Write) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Parse `ENTITY_SWAP,NEGATION:2`. Unlisted transforms get weight 0.
pub fn parse_transforms(list: &str) -> anyhow::Result<BTreeMap<TransformKind, f64>> {
    let mut mix: BTreeMap<TransformKind, f64> = TransformKind::ALL.iter().map(|k| (*k, 0.0)).collect();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, weight) = match item.split_once(':') {
            Some((n, w)) => (n, w.parse::<f64>().with_context(|| format!("bad weight in {item:?}"))?),
            None => (item, 1.0),
        };
        let kind: TransformKind = name.parse().map_err(|e| anyhow::anyhow!("{e}"))?;
        mix.insert(kind, weight);
    }
    Ok(mix)
}

fn generate(args: &GenerateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut config: GenConfig = match &args.config {
        Some(p) => toml::from_str(&std::fs::read_to_string(p)?).with_context(|| format!("reading {}", p.display()))?,
        None => GenConfig::default(),
    };
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(p) = args.noise_p {
        config.noise_p = p;
    }
    if let Some(t) = &args.transforms {
        config.mix = parse_transforms(t)?;
    }
    if let Some(b) = args.balance {
        config.target_negative_ratio = Some(b);
    }
    if let Some(c) = args.claims_per_doc {
        config.claims_per_doc = c;
    }
    config.threads = args.threads;

    let entities = match &args.entities {
        Some(p) => EntityProvider::Standoff(StandoffStore::load(p)?),
        None => EntityProvider::Builtin,
    };
    let paraphrase = match (&args.paraphrase_table, &args.provider_config) {
        (Some(t), _) => claimforge::annotate::paraphrase::ParaphraseProvider::OfflineTable(ParaphraseTable::load(t)?),
        (None, Some(c)) => ProviderConfig::load(c)?.with_env().build()?,
        (None, None) => ProviderConfig::default().with_env().build()?,
    };
    let docs: Vec<_> = read_corpus(&args.corpus)?.iter().map(|r| r.document()).collect();
    let output = run_pipeline(&docs, &config, &Resources { entities, paraphrase })?;
    write_dataset(&output.examples, &args.out)?;
    write_manifest(&output.manifest, manifest_path(&args.out))?;
    print_json(&output.manifest, out)
}

fn evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let examples = read_dataset(&args.data)?;
    let options = EvalOptions {
        threshold: args.threshold,
        positive: args.positive,
    };
    let report = match (&args.pred, &args.scorer) {
        (Some(p), _) => evaluate_predictions(&examples, &load_external_predictions(p)?, options)?,
        (None, Some(name)) => {
            let scorer = scorer_by_name(name, args.model.as_deref())?;
            evaluate_scorer(&examples, scorer.as_ref(), options)
        }
        (None, None) => bail!("give --pred or --scorer"),
    };
    print_json(&report, out)
}

#[derive(Serialize)]
struct RankOutput {
    scorer: String,
    items: usize,
    ranking_accuracy: f64,
}

fn rank(args: &RankArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let items = read_ranking_items(&args.pairs)?;
    let scorer = scorer_by_name(&args.scorer, args.model.as_deref())?;
    let accuracy = ranking_accuracy(scorer.as_ref(), &items)?;
    print_json(
        &RankOutput {
            scorer: scorer.name().to_string(),
            items: items.len(),
            ranking_accuracy: accuracy,
        },
        out,
    )
}

#[derive(Serialize)]
struct TrainOutput {
    model: PathBuf,
    train_examples: usize,
    final_loss: Option<f64>,
    held_out: Option<claimforge::eval::ScoreReport>,
}

fn train(args: &TrainArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let examples = read_dataset(&args.data)?;
    let (train, test): (Vec<_>, Vec<_>) = match args.held_out {
        Some(f) => examples.into_iter().partition(|e| !is_held_out(&e.doc_id, f, args.seed)),
        None => (examples, Vec::new()),
    };
    let config = TrainConfig {
        epochs: args.epochs,
        lr: args.lr,
        seed: args.seed,
    };
    let model = train_baseline(&train, config)?;
    model.save(&args.out)?;
    let held_out = (!test.is_empty()).then(|| {
        let options = EvalOptions::default();
        evaluate_scorer(&test, &BaselineScorer::new(model.clone()), options)
    });
    print_json(
        &TrainOutput {
            model: args.out.clone(),
            train_examples: train.len(),
            final_loss: model.loss_history.last().copied(),
            held_out,
        },
        out,
    )
}

/// Session for `serve`: items from the dataset, spans from `--pred` or the
/// overlap scorer.
pub fn open_session(args: &ServeArgs) -> anyhow::Result<AnnotationService> {
    let examples = read_dataset(&args.data)?;
    let predictions = args.pred.as_ref().map(load_external_predictions).transpose()?;
    let header = SessionHeader::from_examples(
        args.session.clone(),
        &examples,
        predictions.as_ref(),
        &OverlapScorer,
        args.n_judgments,
        args.highlights,
    );
    Ok(AnnotationService::open(&args.log, Some(header))?)
}

fn serve(args: &ServeArgs) -> anyhow::Result<()> {
    let service = open_session(args)?;
    eprintln!(
        "session {} with {} items, {} judgments so far",
        service.session_id(),
        service.header().items.len(),
        service.judgments().len()
    );
    let app = server::router(Arc::new(Mutex::new(service)), args.static_dir.clone());
    let addr = format!("{}:{}", args.host, args.port);
    tokio::runtime::Runtime::new()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn report(args: &ReportArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let log = read_log(&args.log)?;
    print_json(&build_report(&log.header, &log.judgments), out)
}

fn synth(args: &SynthArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let corpus = claimforge::synth::corpus(args.docs, args.seed);
    claimforge::synth::write(&corpus, &args.out, args.table.as_deref())?;
    writeln!(out, "wrote {} documents to {}", args.docs, args.out.display())?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match &cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Evaluate(a) => evaluate(a, out),
        Command::Rank(a) => rank(a, out),
        Command::TrainBaseline(a) => train(a, out),
        Command::Serve(a) => serve(a),
        Command::Report(a) => report(a, out),
        Command::Synth(a) => synth(a, out),
    }
}
