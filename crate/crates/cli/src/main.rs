use std::io::{self, IsTerminal};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chatmood::fixture::Fixture;
use chatmood::pipeline::{
    cmd_evaluate, cmd_featurize, cmd_ingest, cmd_label, cmd_report, cmd_score, cmd_train, LabelSource, RunConfig,
    SourceFormat,
};
use clap::{Parser, Subcommand};

/// Sentence-level sentiment of team chat logs and daily mood reports.
#[derive(Debug, Parser)]
#[command(name = "chatmood", version)]
struct Cli {
    /// Run configuration (TOML). Relative paths inside it resolve against its directory.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for splits, training and label order.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Freeze embedded timestamps so re-runs are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Fixed offset from UTC for day boundaries, in minutes.
    #[arg(long, global = true, value_name = "MINUTES", allow_hyphen_values = true)]
    timezone_offset: Option<i32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a chat export, then clean, split and anonymize it.
    Ingest {
        /// Export file; overrides `inputs.corpus`.
        path: Option<PathBuf>,
        /// Export format: zulip or jsonl.
        #[arg(long)]
        format: Option<SourceFormat>,
    },
    /// Label sentences interactively.
    Label {
        #[arg(long)]
        rater: String,
        /// 1 for first labels, 2 to relabel for an agreement check.
        #[arg(long, default_value_t = 1)]
        round: u32,
    },
    /// Compute sentence metrics and terms.
    Featurize,
    /// Search hyperparameters and train the ensemble.
    Train,
    /// Repeated stratified splits with the trained hyperparameters.
    Evaluate {
        #[arg(long, value_name = "N")]
        repeats: Option<usize>,
        /// Test share of each split, e.g. 0.1 for a 10:90 split.
        #[arg(long, value_name = "F")]
        ratio: Option<f64>,
    },
    /// Predict a class for every sentence.
    Score,
    /// Daily emotionality series as CSV and SVG.
    Report {
        /// labels or predicted.
        #[arg(long, default_value = "labels")]
        source: LabelSource,
    },
    /// Write a synthetic labeled corpus, lexicons and run.toml.
    GenerateFixture {
        #[arg(long, value_name = "DIR")]
        dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        per_class: usize,
        #[arg(long, default_value_t = 14)]
        days: usize,
        /// Permute the labels (chance-level baseline).
        #[arg(long)]
        shuffled: bool,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default().resolved(Path::new("")),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if cli.deterministic {
        config.deterministic = true;
    }
    if let Some(offset) = cli.timezone_offset {
        config.timezone_offset_minutes = offset;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let mut config = load_config(&cli)?;
    match cli.command {
        Command::Ingest { path, format } => {
            if let Some(p) = path {
                config.inputs.corpus = Some(p);
            }
            if let Some(f) = format {
                config.inputs.format = f;
            }
            println!("{}", cmd_ingest(&config)?);
        }
        Command::Label { rater, round } => {
            let stdin = io::stdin();
            let interactive = stdin.is_terminal();
            let summary = cmd_label(&config, &rater, round, &mut stdin.lock(), &mut io::stdout(), interactive)?;
            println!("{summary}");
        }
        Command::Featurize => println!("{}", cmd_featurize(&config)?),
        Command::Train => println!("{}", cmd_train(&config)?),
        Command::Evaluate { repeats, ratio } => {
            if let Some(r) = repeats {
                config.repeats = r;
            }
            if let Some(r) = ratio {
                if !(r > 0.0 && r < 1.0) {
                    bail!("--ratio must lie strictly between 0 and 1, got {r}");
                }
                config.test_fraction = r;
            }
            println!("{}", cmd_evaluate(&config)?);
        }
        Command::Score => println!("{}", cmd_score(&config)?),
        Command::Report { source } => println!("{}", cmd_report(&config, source)?),
        Command::GenerateFixture {
            dir,
            per_class,
            days,
            shuffled,
        } => {
            let mut fixture = Fixture::generate(per_class, days, config.seed);
            if shuffled {
                fixture = fixture.shuffled(config.seed);
            }
            fixture
                .write(&dir)
                .with_context(|| format!("writing fixture to {}", dir.display()))?;
            println!(
                "wrote {} messages to {}; next: chatmood --config {} ingest",
                fixture.messages.len(),
                dir.display(),
                dir.join("run.toml").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
