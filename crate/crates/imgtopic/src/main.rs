use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use imgtopic::error::{exit, Error};
use imgtopic::experiment::{default_n_values, load_index, run_experiment, Workspace};
use imgtopic::formats::{self, TopicOutput};
use imgtopic::synth::{self, SynthParams};
use imgtopic::PipelineConfig;
use imgtopic_core::eval::OrderMode;
use imgtopic_core::{Method, QueryHistogram};

#[derive(Parser)]
#[command(name = "imgtopic", version, about = "Discover the topic shared by a set of images")]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `lsh.seed` (or the generator seed for `synth`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest triads and features, build the index, print counts.
    Index {
        /// Also write the lexicon as `word<TAB>document_frequency`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe a set of query images with topic words (JSON on stdout).
    Topic {
        /// Comma-separated image ids (query features first, then corpus features).
        #[arg(long, value_delimiter = ',', conflicts_with = "queries")]
        images: Vec<String>,
        /// Feature file whose every row is a query.
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long, default_value = "walk")]
        method: Method,
        /// Dictionary file; implies `walk+map_crf` unless a mapping method is given.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Evaluate topics and write mean Jaccard curves as CSV.
    Evaluate {
        #[arg(long, value_delimiter = ',', default_value = "original,best_first,worst_first")]
        modes: Vec<OrderMode>,
        /// Defaults to every method the configuration supports.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        /// Dictionary file overriding `paths.dictionary`.
        #[arg(long)]
        map: Option<PathBuf>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a planted-topic benchmark dataset and its config.
    Synth {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = SynthParams::default().images)]
        images: usize,
        #[arg(long, default_value_t = SynthParams::default().topics)]
        topics: usize,
        #[arg(long, default_value_t = SynthParams::default().queries_per_topic)]
        queries_per_topic: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::OK as u8 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<PipelineConfig, Error> {
    let path = path.ok_or_else(|| Error::Usage("--config is required".into()))?;
    let mut config = PipelineConfig::load(path)?;
    if let Some(seed) = seed {
        config.lsh.seed = seed;
    }
    Ok(config)
}

/// Writes to stdout; a reader that went away early is not an error.
fn emit(text: &str) -> Result<(), Error> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Index { out } => {
            let config = load_config(cli.config.as_deref(), cli.seed)?;
            let indexed = load_index(&config)?;
            if let Some(out) = out {
                let mut text = String::new();
                for (word, df) in indexed.corpus.lexicon().iter() {
                    text.push_str(&format!("{word}\t{df}\n"));
                }
                std::fs::write(&out, text)?;
            }
            emit(&format!("{}\n", indexed.stats))?;
        }
        Command::Topic { images, queries, mut method, map } => {
            let mut config = load_config(cli.config.as_deref(), cli.seed)?;
            if let Some(map) = map {
                config.paths.dictionary = Some(map);
                if !method.needs_dictionary() {
                    method = Method::WalkMapCrf;
                }
            }
            let ws = Workspace::load(&config)?;
            let engine = ws.engine();
            let mut histograms: Vec<QueryHistogram> = Vec::new();
            if let Some(path) = queries {
                let store = formats::load_features(&path)?;
                for (id, row) in store.iter() {
                    histograms.push(engine.query_histogram(id, row)?);
                }
            } else if !images.is_empty() {
                for id in &images {
                    let row = ws
                        .query_features
                        .as_ref()
                        .and_then(|q| q.get(id))
                        .or_else(|| ws.indexed.index.store().get(id))
                        .ok_or_else(|| Error::UnknownImage(id.clone()))?;
                    histograms.push(engine.query_histogram(id, row)?);
                }
            } else {
                return Err(Error::Usage("pass --images or --queries".into()));
            }
            let words = engine.describe(&histograms, method)?;
            let json = serde_json::to_string_pretty(&TopicOutput::new(&words, histograms.len()))
                .expect("topic output serializes");
            emit(&format!("{json}\n"))?;
        }
        Command::Evaluate { modes, methods, map, out } => {
            let mut config = load_config(cli.config.as_deref(), cli.seed)?;
            if map.is_some() {
                config.paths.dictionary = map;
            }
            let topics_path = config.paths.topics.clone().ok_or(Error::MissingPath("topics"))?;
            let topics = formats::load_topics(&topics_path)?;
            let ws = Workspace::load(&config)?;
            let methods = methods.unwrap_or_else(|| {
                Method::ALL
                    .into_iter()
                    .filter(|m| ws.dictionary.is_some() || !m.needs_dictionary())
                    .collect()
            });
            let n_values = default_n_values(&topics);
            let report = run_experiment(&ws.engine(), ws.query_store(), &topics, &modes, &methods, &n_values)?;
            for id in &report.skipped_topics {
                eprintln!("warning: skipped topic `{id}` (missing query features or no images)");
            }
            for &mode in &modes {
                for &method in &methods {
                    let curve: Vec<f64> = n_values.iter().filter_map(|&n| report.mean(mode, method, n)).collect();
                    if !curve.is_empty() {
                        let mean = curve.iter().sum::<f64>() / curve.len() as f64;
                        eprintln!("mode={mode} method={method} mean_over_n={mean:.6} n_values={}", curve.len());
                    }
                }
            }
            match out {
                Some(path) => formats::write_curves(&path, &report)?,
                None => emit(&formats::render_curves(&report))?,
            }
        }
        Command::Synth { out, images, topics, queries_per_topic } => {
            let base = match cli.config.as_deref() {
                Some(path) => PipelineConfig::load(path)?,
                None => PipelineConfig::default(),
            };
            let params = SynthParams { images, topics, queries_per_topic, seed: cli.seed.unwrap_or(0), ..Default::default() };
            if images == 0 || topics == 0 {
                return Err(Error::Usage("--images and --topics must be positive".into()));
            }
            let data = synth::generate(params);
            let path = synth::write_dataset(&data, &out, &base)?;
            emit(&format!("wrote {}\n", path.display()))?;
        }
    }
    Ok(())
}

