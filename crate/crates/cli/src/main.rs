//! `kblink` command-line driver.

mod config;
mod manifest;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use kblink::corpus::{self, category_stats, corpus_stats, write_jsonl};
use kblink::index::{read_index, write_index};
use kblink::kb::load_kb;
use kblink::linker::{link_document, to_prediction};
use kblink::{score_predictions, KnowledgeBase, ReferenceLists};

use config::FileConfig;
use manifest::{digest_file, manifest_path, sha256_hex, InputDigest, RunManifest};

#[derive(Parser)]
#[command(name = "kblink", version, about = "Unsupervised knowledge-base entity linking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Records,
}

#[derive(Subcommand)]
enum Command {
    /// Load a KB dump and reference lists and write the binary index cache.
    BuildIndex {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        lists: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// TOML config; only `normalizer` is used here.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Link every mention of a corpus file and write predictions.
    Link {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        nil_threshold: Option<f64>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Score a prediction file against a gold corpus.
    Evaluate {
        /// Gold corpus.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Dataset statistics of a corpus against an index.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildIndex { kb, lists, out, config } => build_index(&kb, &lists, &out, config.as_deref()),
        Command::Link { index, corpus, out, config, lambda, nil_threshold, jobs } => {
            link(&index, &corpus, &out, config.as_deref(), lambda, nil_threshold, jobs)
        }
        Command::Evaluate { corpus, predictions, out, format } => {
            evaluate(&corpus, &predictions, out.as_deref(), format)
        }
        Command::Stats { corpus, index, out, format } => stats(&corpus, &index, out.as_deref(), format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn build_index(kb_path: &Path, lists_path: &Path, out: &Path, config: Option<&Path>) -> Result<()> {
    let normalizer = FileConfig::load(config)?.normalizer.unwrap_or_default();
    let (kb, lists) = load_kb(kb_path, lists_path, normalizer)?;
    if kb.dangling_links > 0 {
        eprintln!("warning: dropped {} link(s) to entities outside the dump", kb.dangling_links);
    }
    let file = File::create(out).with_context(|| format!("{}", out.display()))?;
    write_index(&kb, &lists, BufWriter::new(file))?;
    eprintln!(
        "indexed {} entities, {} aliases into {}",
        kb.len(),
        kb.alias_index.len(),
        out.display()
    );
    Ok(())
}

fn open_index(path: &Path) -> Result<(KnowledgeBase, ReferenceLists)> {
    let bytes = fs::read(path).with_context(|| format!("{}", path.display()))?;
    read_index(&bytes).with_context(|| format!("{}", path.display()))
}

fn write_output(out: Option<&Path>, content: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, content).with_context(|| format!("{}", p.display())),
        None => {
            io::stdout().write_all(content)?;
            Ok(())
        }
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn link(
    index: &Path,
    corpus_path: &Path,
    out: &Path,
    config: Option<&Path>,
    lambda: Option<f64>,
    nil_threshold: Option<f64>,
    jobs: Option<usize>,
) -> Result<()> {
    let file_cfg = FileConfig::load(config)?;
    let cfg = file_cfg.linker(lambda, nil_threshold)?;
    let mut timing = BTreeMap::new();

    let t = Instant::now();
    let (kb, lists) = open_index(index)?;
    timing.insert("load_index".to_owned(), ms(t));
    if let Some(n) = file_cfg.normalizer {
        if n != kb.normalizer {
            bail!("config normalizer `{n}` differs from the index's `{}`; rebuild the index", kb.normalizer);
        }
    }
    if cfg.lambda > 0.0 && lists.stopwords.is_empty() {
        bail!("the stopword list is empty but context scoring is enabled (lambda > 0)");
    }

    let t = Instant::now();
    let docs = corpus::load_corpus(corpus_path)?;
    timing.insert("load_corpus".to_owned(), ms(t));

    let jobs = jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let t = Instant::now();
    let predictions: Vec<_> = pool.install(|| {
        docs.par_iter()
            .map(|d| to_prediction(d, &link_document(d, &kb, &lists, &cfg)))
            .collect()
    });
    timing.insert("link".to_owned(), ms(t));

    let t = Instant::now();
    let mut buf = Vec::new();
    write_jsonl(&predictions, &mut buf)?;
    fs::write(out, &buf).with_context(|| format!("{}", out.display()))?;
    timing.insert("write".to_owned(), ms(t));

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        config: cfg,
        jobs,
        inputs: vec![digest_file(index)?, digest_file(corpus_path)?]
            .into_iter()
            .chain(config.map(digest_file).transpose()?)
            .collect(),
        output: InputDigest { path: out.display().to_string(), sha256: sha256_hex(&buf) },
        timing_ms: timing,
    };
    let mpath = manifest_path(out);
    fs::write(&mpath, serde_json::to_vec_pretty(&manifest)?)
        .with_context(|| format!("{}", mpath.display()))?;
    let nil = predictions
        .iter()
        .flat_map(|p| &p.mentions)
        .filter(|m| m.prediction == kblink::Decision::Nil)
        .count();
    let total: usize = predictions.iter().map(|p| p.mentions.len()).sum();
    eprintln!("linked {} documents, {total} mentions ({nil} NIL) with {jobs} worker(s)", docs.len());
    Ok(())
}

fn evaluate(gold: &Path, predictions: &Path, out: Option<&Path>, format: Format) -> Result<()> {
    let gold = corpus::load_corpus(gold)?;
    let preds = corpus::load_predictions(predictions)?;
    let report = score_predictions(&gold, &preds)?;
    let content = match format {
        Format::Table => report.render_table().into_bytes(),
        Format::Records => {
            let mut v = serde_json::to_vec_pretty(&report)?;
            v.push(b'\n');
            v
        }
    };
    write_output(out, &content)
}

fn stats(corpus_path: &Path, index: &Path, out: Option<&Path>, format: Format) -> Result<()> {
    let (kb, _) = open_index(index)?;
    let docs = corpus::load_corpus(corpus_path)?;
    let total = corpus_stats(&docs, &kb);
    let content = match format {
        Format::Table => total.render_table().into_bytes(),
        Format::Records => {
            let record = serde_json::json!({
                "total": total,
                "per_category": category_stats(&docs, &kb),
            });
            let mut v = serde_json::to_vec_pretty(&record)?;
            v.push(b'\n');
            v
        }
    };
    write_output(out, &content)
}
