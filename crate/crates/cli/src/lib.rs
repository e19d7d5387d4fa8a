//! The `valuescope` command line. Every artifact is rendered by
//! `valuescope_core::report`, the same code the service uses.

pub mod import;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use valuescope_core::annotate::{stem_presence, token_counts, GroupBy, MarkerStyle, Per};
use valuescope_core::embed::{Architecture, EmbedError, Hyperparams, TrainingMode};
use valuescope_core::generalize::Strategy;
use valuescope_core::pipeline::{
    load_models, stability, sweep, train_all_into, train_compass_into, train_slice_into, variation,
};
use valuescope_core::report;
use valuescope_core::variation::{DEFAULT_K, DEFAULT_THETA};
use valuescope_core::workspace::{write_atomic, Workspace, WorkspaceError};
use valuescope_service::ServeError;

use crate::import::ImportError;

/// Threshold grid used by `export` when models are present.
pub const DEFAULT_GRID: [f64; 9] = [-1.0, 0.0, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];

#[derive(Debug, Parser)]
#[command(name = "valuescope", version, about = "Value annotation and semantic variation across text corpora")]
pub struct Cli {
    /// Workspace root containing corpora/ and optionally lexicon.csv.
    #[arg(long, env = "VALUESCOPE_WORKSPACE", default_value = ".", global = true)]
    pub workspace: PathBuf,
    /// Directory receiving every output artifact.
    #[arg(long, default_value = "out", global = true)]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Texts, symbols and words per corpus.
    Stats {
        /// Workspace root; overrides --workspace.
        workspace: Option<PathBuf>,
    },
    /// Annotate every corpus and write annotations, count tables and the stem Venn partition.
    Annotate(StrategyArgs),
    /// Train the compass, one slice, or both.
    Train(TrainArgs),
    /// Label graphs, communities and the cross-corpus comparison from trained models.
    Variation(VariationArgs),
    /// Edge and component counts over a threshold grid.
    Sweep(SweepArgs),
    /// Write every report artifact in one format.
    Export(ExportArgs),
    /// Retrain under several seeds and report how often label pairs share a community.
    Stability(StabilityArgs),
    /// Serve the workspace over HTTP.
    Serve(ServeArgs),
    /// Cut listed tales out of a plain-text book into corpora/<corpus>/.
    Import(ImportArgs),
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: valuescope_core::generalize::UnknownStrategy| e.to_string())
}

fn parse_architecture(s: &str) -> Result<Architecture, String> {
    s.parse().map_err(|e: EmbedError| e.to_string())
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    /// exact, porter, snowball, lancaster or snowball2.
    #[arg(long, default_value = "snowball", value_parser = parse_strategy)]
    pub strategy: Strategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Role {
    Compass,
    Slice,
    All,
}

#[derive(Debug, Args)]
pub struct HyperparamArgs {
    #[arg(long)]
    pub dimension: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub negative: Option<usize>,
    #[arg(long)]
    pub epochs_compass: Option<usize>,
    #[arg(long)]
    pub epochs_slice: Option<usize>,
    #[arg(long)]
    pub min_count: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub subsample: Option<f64>,
    /// cbow or skipgram.
    #[arg(long, value_parser = parse_architecture)]
    pub architecture: Option<Architecture>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Single-threaded, bit-reproducible training (the default).
    #[arg(long, conflicts_with = "fast")]
    pub deterministic: bool,
    /// Parallel training; faster but not reproducible.
    #[arg(long)]
    pub fast: bool,
    /// Mark labels with angle-bracket sentinel tokens instead of the bare label.
    #[arg(long)]
    pub sentinel: bool,
}

impl HyperparamArgs {
    pub fn hyperparams(&self) -> Hyperparams {
        let d = Hyperparams::default();
        Hyperparams {
            dimension: self.dimension.unwrap_or(d.dimension),
            window: self.window.unwrap_or(d.window),
            negative: self.negative.unwrap_or(d.negative),
            epochs_compass: self.epochs_compass.unwrap_or(d.epochs_compass),
            epochs_slice: self.epochs_slice.unwrap_or(d.epochs_slice),
            min_count: self.min_count.unwrap_or(d.min_count),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            subsample: self.subsample.unwrap_or(d.subsample),
            architecture: self.architecture.unwrap_or(d.architecture),
            seed: self.seed,
            mode: if self.fast { TrainingMode::Fast } else { TrainingMode::Deterministic },
        }
    }

    fn marker(&self) -> MarkerStyle {
        if self.sentinel {
            MarkerStyle::Sentinel
        } else {
            MarkerStyle::Literal
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub role: Role,
    /// Corpus to train when --role slice.
    #[arg(long, required_if_eq("role", "slice"))]
    pub corpus: Option<String>,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[command(flatten)]
    pub hyperparams: HyperparamArgs,
}

#[derive(Debug, Args)]
pub struct ModelsArg {
    /// Model directory; defaults to <out>/models.
    #[arg(long)]
    pub models: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VariationArgs {
    #[arg(long, default_value_t = DEFAULT_THETA, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Label whose community is compared across corpora.
    #[arg(long)]
    pub seed_label: Option<String>,
    #[command(flatten)]
    pub models: ModelsArg,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Ascending comma-separated thresholds, e.g. 0.3,0.5,0.7.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub theta_grid: Grid,
    #[command(flatten)]
    pub models: ModelsArg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("not a number: {v:?}")))
        .collect::<Result<_, _>>()
        .map(Grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[command(flatten)]
    pub models: ModelsArg,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Seeds as a list and/or ranges, e.g. 1-10 or 1,2,5.
    #[arg(long, default_value = "1-10")]
    pub seeds: String,
    /// corpus:label:partner; repeatable. Defaults to the mother/brother and
    /// mother/know pairs in germany, italy and portugal.
    #[arg(long = "query")]
    pub queries: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_THETA, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[command(flatten)]
    pub hyperparams: HyperparamArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Directory with the built review UI.
    #[arg(long)]
    pub ui: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    /// Corpus id to create under corpora/.
    #[arg(long)]
    pub corpus: String,
    /// Plain-text book.
    #[arg(long)]
    pub source: PathBuf,
    /// File listing the tale titles to extract, one per line.
    #[arg(long)]
    pub titles: PathBuf,
}

/// Pairs reported by `stability` when no --query is given.
pub const DEFAULT_QUERIES: [&str; 4] =
    ["germany:mother:brother", "portugal:mother:brother", "italy:mother:know", "portugal:mother:know"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
    #[error(transparent)]
    Serve(#[from] ServeError),
    #[error(transparent)]
    Import(#[from] ImportError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Machine-readable class and process exit code.
    pub fn class(&self) -> (&'static str, i32) {
        const VALIDATION: (&str, i32) = ("validation", 2);
        const IO: (&str, i32) = ("io", 3);
        const INTERNAL: (&str, i32) = ("internal", 4);
        match self {
            CliError::Workspace(e) | CliError::Serve(ServeError::Workspace(e)) => {
                if e.is_validation() || matches!(e, WorkspaceError::StaleModels { .. }) {
                    VALIDATION
                } else if e.is_io() {
                    IO
                } else {
                    INTERNAL
                }
            }
            CliError::Serve(_) | CliError::Io { .. } => IO,
            CliError::Import(_) | CliError::Usage(_) => VALIDATION,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Output files written by one command, relative to `--out`.
pub type Written = Vec<PathBuf>;

struct Out {
    root: PathBuf,
    written: Written,
}

impl Out {
    fn write(&mut self, relative: impl AsRef<Path>, content: &str) -> Result<(), CliError> {
        write_atomic(&self.root.join(relative.as_ref()), content)?;
        self.written.push(relative.as_ref().to_path_buf());
        Ok(())
    }
}

pub fn run(cli: Cli) -> Result<Written, CliError> {
    let mut out = Out { root: cli.out.clone(), written: Vec::new() };
    let models_dir = |arg: &ModelsArg| arg.models.clone().unwrap_or_else(|| cli.out.join("models"));
    match &cli.command {
        Command::Stats { workspace } => {
            let ws = Workspace::open(workspace.as_ref().unwrap_or(&cli.workspace))?;
            let csv = report::stats_csv(ws.corpora());
            print!("{csv}");
            out.write("stats.csv", &csv)?;
        }
        Command::Annotate(args) => {
            let ws = Workspace::open(&cli.workspace)?;
            write_annotations(&ws, args.strategy, Format::Csv, &mut out, true)?;
        }
        Command::Train(args) => {
            let ws = Workspace::open(&cli.workspace)?;
            let hp = args.hyperparams.hyperparams();
            hp.validate().map_err(WorkspaceError::from)?;
            let dir = cli.out.join("models");
            let style = args.hyperparams.marker();
            let metas = match args.role {
                Role::Compass => vec![train_compass_into(&ws, args.strategy.strategy, style, &hp, &dir)?],
                Role::Slice => {
                    let corpus = args.corpus.as_deref().expect("clap requires --corpus");
                    vec![train_slice_into(&ws, corpus, &hp, &dir)?]
                }
                Role::All => {
                    let models = train_all_into(&ws, args.strategy.strategy, style, &hp, &dir)?;
                    models.compass_meta.into_iter().chain(models.slice_metas).collect()
                }
            };
            for meta in metas {
                let name = meta.corpus_id.clone().map_or("compass".to_string(), |c| format!("slice {c}"));
                println!("{name}\tvocab {}\t{}", meta.vocab_size, meta.digest());
            }
            out.written.push("models".into());
        }
        Command::Variation(args) => {
            let ws = Workspace::open(&cli.workspace)?;
            write_variation(&ws, &models_dir(&args.models), args.theta, args.k, args.seed_label.as_deref(), &mut out)?;
        }
        Command::Sweep(args) => {
            let ws = Workspace::open(&cli.workspace)?;
            write_sweep(&ws, &models_dir(&args.models), &args.theta_grid.0, &mut out)?;
        }
        Command::Export(args) => {
            let ws = Workspace::open(&cli.workspace)?;
            out.write(
                format!("stats.{}", extension(args.format)),
                &match args.format {
                    Format::Csv => report::stats_csv(ws.corpora()),
                    Format::Json => report::json(&report::stats_rows(ws.corpora())),
                },
            )?;
            write_annotations(&ws, args.strategy.strategy, args.format, &mut out, false)?;
            let dir = models_dir(&args.models);
            if dir.join("compass.meta.json").is_file() {
                write_variation(&ws, &dir, DEFAULT_THETA, DEFAULT_K, None, &mut out)?;
                write_sweep(&ws, &dir, &DEFAULT_GRID, &mut out)?;
            }
        }
        Command::Stability(args) => {
            let ws = Workspace::open(&cli.workspace)?;
            let seeds = parse_seeds(&args.seeds)?;
            let raw: Vec<String> = if args.queries.is_empty() {
                DEFAULT_QUERIES.iter().map(|q| q.to_string()).collect()
            } else {
                args.queries.clone()
            };
            let queries = parse_queries(&raw)?;
            let hp = args.hyperparams.hyperparams();
            hp.validate().map_err(WorkspaceError::from)?;
            for (corpus, _, _) in &queries {
                ws.corpus(corpus)?;
            }
            let cells = stability(
                &ws,
                args.strategy.strategy,
                args.hyperparams.marker(),
                &hp,
                &seeds,
                args.theta,
                args.k,
                &queries,
            )?;
            let csv = report::stability_csv(&cells);
            print!("{csv}");
            out.write("stability.csv", &csv)?;
            out.write("stability.json", &report::json(&cells))?;
        }
        Command::Serve(args) => {
            let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io { path: ".".into(), source })?;
            runtime.block_on(valuescope_service::serve(&cli.workspace, &args.bind, args.ui.clone()))?;
        }
        Command::Import(args) => {
            let book = read(&args.source)?;
            let titles = import::parse_titles(&read(&args.titles)?);
            let tales = import::split_tales(&book, &titles)?;
            let dir = cli.workspace.join("corpora").join(&args.corpus);
            for (title, body) in &tales {
                write_atomic(&dir.join(format!("{}.txt", title.replace('/', "-"))), body)?;
            }
            println!("{}: {} tales", args.corpus, tales.len());
        }
    }
    Ok(out.written)
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn write_annotations(ws: &Workspace, strategy: Strategy, format: Format, out: &mut Out, verbose: bool) -> Result<(), CliError> {
    let sets = ws.annotations(strategy)?;
    for set in &sets {
        out.write(format!("annotations/{}.jsonl", set.corpus_id), &set.to_jsonl())?;
        if verbose {
            println!("{}\t{}", set.corpus_id, set.len());
        }
    }
    for group_by in [GroupBy::Label, GroupBy::Value] {
        for per in [Per::Corpus, Per::Text] {
            let table = token_counts(&sets, ws.lexicon(), group_by, per);
            let name = format!(
                "counts/{}-{}.{}",
                if group_by == GroupBy::Label { "label" } else { "value" },
                if per == Per::Corpus { "corpus" } else { "text" },
                extension(format)
            );
            let content = match format {
                Format::Csv => report::counts_csv(&table),
                Format::Json => report::json(&table),
            };
            out.write(name, &content)?;
        }
    }
    let partition = stem_presence(&sets).map_err(WorkspaceError::from)?;
    out.write("venn.json", &report::venn_json(&partition))
}

fn write_variation(
    ws: &Workspace,
    dir: &Path,
    theta: f64,
    k: usize,
    seed: Option<&str>,
    out: &mut Out,
) -> Result<(), CliError> {
    let models = load_models(ws, dir)?;
    let sets = ws.annotations(models.strategy)?;
    let result = variation(&models, &sets, theta, k, seed)?;
    for (graph, communities) in result.graphs.iter().zip(&result.communities) {
        out.write(format!("variation/graph-{}.json", graph.corpus_id), &graph.to_json())?;
        out.write(format!("variation/communities-{}.json", graph.corpus_id), &communities.to_json())?;
        println!("{}\t{} edges\t{} communities", graph.corpus_id, graph.edges.len(), communities.communities.len());
    }
    if let Some((seed, partition)) = &result.comparison {
        out.write(format!("variation/compare-{seed}.json"), &report::json(partition))?;
    }
    Ok(())
}

fn write_sweep(ws: &Workspace, dir: &Path, grid: &[f64], out: &mut Out) -> Result<(), CliError> {
    let models = load_models(ws, dir)?;
    let sets = ws.annotations(models.strategy)?;
    out.write("sweep.csv", &report::sweep_csv(&sweep(&models, &sets, grid)?))
}

pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("--seeds: cannot parse {spec:?}"));
    let mut seeds = Vec::new();
    for part in spec.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(seeds)
}

pub fn parse_queries(raw: &[String]) -> Result<Vec<(&str, &str, &str)>, CliError> {
    raw.iter()
        .map(|q| match q.split(':').collect::<Vec<_>>()[..] {
            [c, l, p] if !c.is_empty() && !l.is_empty() && !p.is_empty() => Ok((c, l, p)),
            _ => Err(CliError::Usage(format!("--query must be corpus:label:partner, got {q:?}"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_and_queries() {
        assert_eq!(parse_seeds("1-3,7").unwrap(), [1, 2, 3, 7]);
        assert!(parse_seeds("3-1").is_err());
        assert!(parse_seeds("x").is_err());
        let raw = vec!["a:mother:know".to_string()];
        assert_eq!(parse_queries(&raw).unwrap(), [("a", "mother", "know")]);
        assert!(parse_queries(&["a:b".to_string()]).is_err());
    }

    #[test]
    fn flags_fill_hyperparams() {
        let cli = Cli::parse_from(["valuescope", "train", "--dimension", "30", "--seed", "4", "--fast"]);
        let Command::Train(args) = cli.command else { panic!() };
        let hp = args.hyperparams.hyperparams();
        assert_eq!((hp.dimension, hp.seed, hp.mode), (30, 4, TrainingMode::Fast));
        assert_eq!(hp.window, Hyperparams::default().window);
        assert!(Cli::try_parse_from(["valuescope", "train", "--role", "slice"]).is_err());
        assert!(Cli::try_parse_from(["valuescope", "train", "--fast", "--deterministic"]).is_err());
    }

    #[test]
    fn negative_thresholds_parse() {
        let cli = Cli::parse_from(["valuescope", "variation", "--theta", "-1", "--k", "2"]);
        let Command::Variation(args) = cli.command else { panic!() };
        assert_eq!(args.theta, -1.0);
        let cli = Cli::parse_from(["valuescope", "sweep", "--theta-grid", "-0.5,0,0.5"]);
        let Command::Sweep(args) = cli.command else { panic!() };
        assert_eq!(args.theta_grid.0, [-0.5, 0.0, 0.5]);
        assert!(Cli::try_parse_from(["valuescope", "sweep", "--theta-grid", "0.5,x"]).is_err());
    }
}
