//! `govgram`: governance documents → institutional statements → change
//! metrics, one JSONL/CSV stage at a time or end to end.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use govgram_core::ig::StatementRecord;
use govgram_core::ingest::{ingest_corpus, read_repo_list, CorpusRecord, GovernancePatterns, PairStatus};
use govgram_core::io;
use govgram_core::metrics::{compute_corpus_metrics, group_by_repo, RepoMetrics, METRICS_HEADER};
use govgram_core::normalize::SnapshotSentences;
use govgram_core::reliability::{align_coders, cohen_kappa, read_coder_file};
use govgram_core::report::{emit_figure_data, infer_stage, label_stage, normalize_stage, parse_stage, write_inference};
use govgram_core::taxonomy::LabeledRecord;
use govgram_core::{run_pipeline, Execution, Lexicons, RunConfig};
use log::info;

#[derive(Parser)]
#[command(
    name = "govgram",
    version,
    about = "Institutional-grammar change metrics for governance documents"
)]
struct Cli {
    /// Worker threads for data-parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run every stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discover governance files, recover their history and pair snapshots.
    Ingest {
        /// Repository list: `path` or `repo_id<TAB>path` per line.
        #[arg(long)]
        repos: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Filename patterns (`name<TAB>regex` per line).
        #[arg(long)]
        patterns: Option<PathBuf>,
    },
    /// Strip markup, segment sentences and substitute pronouns.
    Normalize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        lexicon: LexiconArg,
    },
    /// Extract role, deontic, action and object from each sentence.
    Parse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        lexicon: LexiconArg,
    },
    /// Assign role, action and deontic categories.
    Label {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        lexicon: LexiconArg,
    },
    /// Per-repository entropy, richness, rarefaction and divergence.
    Metrics {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 17)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        rarefaction_draws: usize,
        #[arg(long, default_value_t = 100)]
        rarefaction_cap: usize,
        /// Presence threshold for K.
        #[arg(long, default_value_t = 2)]
        tau: u64,
        /// Minimum labeled statements per snapshot for H and JSD.
        #[arg(long, default_value_t = 5)]
        min_labeled: u64,
        /// Restrict to pairs whose snapshots fall on different days.
        #[arg(long)]
        across_day_only: bool,
        /// Divide entropy by log2(support size).
        #[arg(long)]
        normalize_entropy: bool,
    },
    /// Bootstrap summaries, share changes and figure data.
    Infer {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        labeled: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long = "B", default_value_t = 10_000)]
        b: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 17)]
        seed: u64,
    },
    /// Percent agreement and Cohen's κ between two coders.
    Reliability {
        /// Two `item<TAB>label` files.
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        coders: Vec<PathBuf>,
        /// Compare only the first N items of the first coder.
        #[arg(long)]
        sample: Option<usize>,
    },
    /// Every stage from a corpus file to the results directory.
    Run {
        /// Flat TOML file with RunConfig keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "B")]
        b: Option<usize>,
        #[arg(long)]
        across_day_only: bool,
    },
}

#[derive(Args)]
struct LexiconArg {
    /// Directory overriding the built-in lexicons.
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

impl LexiconArg {
    fn load(&self) -> Result<Lexicons> {
        match &self.lexicon {
            Some(dir) => Lexicons::load_dir(dir).with_context(|| format!("loading lexicons from {}", dir.display())),
            None => Ok(Lexicons::builtin()),
        }
    }
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    #[cfg(not(feature = "parallel"))]
    if threads.is_some() {
        log::warn!("built without the `parallel` feature; --threads is ignored");
    }
    Ok(())
}

fn read<T: serde::de::DeserializeOwned>(stage: &str, path: &Path) -> Result<Vec<T>> {
    io::read_jsonl(path).with_context(|| format!("{stage}: reading {}", path.display()))
}

fn write<T: serde::Serialize>(stage: &str, path: &Path, records: &[T]) -> Result<()> {
    let n = io::write_jsonl(path, records).with_context(|| format!("{stage}: writing {}", path.display()))?;
    info!("{stage}: wrote {n} records to {}", path.display());
    Ok(())
}

fn execute(command: Command, exec: Execution) -> Result<()> {
    match command {
        Command::Ingest { repos, out, patterns } => {
            let patterns = match patterns {
                Some(p) => GovernancePatterns::load(&p)?,
                None => GovernancePatterns::default(),
            };
            let specs = read_repo_list(&repos)?;
            let records = ingest_corpus(&specs, &patterns, exec).context("ingest")?;
            let paired = records.iter().filter(|r| r.status == PairStatus::Paired).count();
            write("ingest", &out, &records)?;
            println!("ingest: {} repositories, {paired} paired", records.len());
        }
        Command::Normalize { input, out, lexicon } => {
            let lexicons = lexicon.load()?;
            let records: Vec<CorpusRecord> = read("normalize", &input)?;
            let snaps = normalize_stage(&records, &lexicons, exec);
            write("normalize", &out, &snaps)?;
        }
        Command::Parse { input, out, lexicon } => {
            let lexicons = lexicon.load()?;
            let snaps: Vec<SnapshotSentences> = read("parse", &input)?;
            let statements = parse_stage(&snaps, &lexicons, exec);
            write("parse", &out, &statements)?;
        }
        Command::Label { input, out, lexicon } => {
            let lexicons = lexicon.load()?;
            let statements: Vec<StatementRecord> = read("label", &input)?;
            let labeled = label_stage(&statements, &lexicons, exec);
            write("label", &out, &labeled)?;
        }
        Command::Metrics {
            input,
            out,
            seed,
            rarefaction_draws,
            rarefaction_cap,
            tau,
            min_labeled,
            across_day_only,
            normalize_entropy,
        } => {
            let cfg = RunConfig {
                seed,
                rarefaction_draws,
                rarefaction_cap,
                tau,
                min_labeled,
                across_day_only,
                normalize_entropy,
                ..RunConfig::default()
            };
            cfg.validate()?;
            let labeled: Vec<LabeledRecord> = read("metrics", &input)?;
            let repos = group_by_repo(labeled);
            let rows =
                compute_corpus_metrics(&repos, &cfg.metrics_config(), across_day_only, exec).context("metrics")?;
            io::write_csv(&out, &METRICS_HEADER, &rows)?;
            info!("metrics: {} rows to {}", rows.len(), out.display());
        }
        Command::Infer {
            metrics,
            labeled,
            out_dir,
            b,
            alpha,
            seed,
        } => {
            let cfg = RunConfig {
                b,
                alpha,
                seed,
                ..RunConfig::default()
            };
            cfg.validate()?;
            let rows: Vec<RepoMetrics> =
                io::read_csv(&metrics).with_context(|| format!("infer: reading {}", metrics.display()))?;
            if rows.is_empty() {
                bail!("infer: {} has no metric rows", metrics.display());
            }
            // Share changes use the same repositories as the metrics file.
            let ids: BTreeSet<&str> = rows.iter().map(|r| r.repo_id.as_str()).collect();
            let repos: Vec<_> = group_by_repo(read("infer", &labeled)?)
                .into_iter()
                .filter(|r| ids.contains(r.repo_id.as_str()))
                .collect();
            std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let out = infer_stage(&rows, &repos, &cfg.bootstrap_config(), exec).context("infer")?;
            let mut written = write_inference(&out_dir, &out)?;
            written.extend(emit_figure_data(&out_dir, &repos, &rows)?);
            info!("infer: wrote {} files to {}", written.len(), out_dir.display());
        }
        Command::Reliability { coders, sample } => {
            let a = read_coder_file(&coders[0])?;
            let b = read_coder_file(&coders[1])?;
            let (la, lb) = align_coders(&a, &b, sample)?;
            let r = cohen_kappa(&la, &lb)?;
            println!("items\t{}", r.n);
            println!("labels\t{}", r.n_labels);
            println!("percent_agreement\t{:.4}", r.percent_agreement);
            println!("expected_agreement\t{:.4}", r.expected_agreement);
            println!("kappa\t{:.4}", r.kappa);
        }
        Command::Run {
            config,
            corpus,
            out,
            seed,
            b,
            across_day_only,
        } => {
            let mut cfg = match &config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(b) = b {
                cfg.b = b;
            }
            cfg.across_day_only |= across_day_only;
            let m = run_pipeline(&cfg, &corpus, &out, exec)?;
            let c = &m.counts;
            println!(
                "run: {} records, {} paired ({} across days), {} repositories analyzed, {} statements; results in {}",
                c.corpus_records,
                c.paired,
                c.across_day_pairs,
                c.repos_analyzed,
                c.statements,
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = configure_threads(cli.threads).and_then(|()| execute(cli.command, exec));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("govgram: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
