//! Thin command-line front end over the library pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use csgcl::config::{default_config_toml, parse_config};
use csgcl::eval::EvalTask;
use csgcl::pipeline::{run, Command};

#[derive(Parser)]
#[command(
    name = "csgcl",
    about = "Community-strength-enhanced graph contrastive learning pipeline",
    long_about = "Detects communities, trains a contrastive GCN encoder guided by \
                  community strength, and evaluates the learned node embeddings.\n\
                  Set CSGCL_THREADS to cap parallelism of independent evaluation \
                  repeats (default 1, fully deterministic)."
)]
struct Cli {
    /// Print the default configuration and exit.
    #[arg(long)]
    print_defaults: bool,

    #[command(subcommand)]
    command: Option<Stage>,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Treat the edge list as directed input and add reverse edges.
    #[arg(long)]
    as_undirected: bool,
}

#[derive(Subcommand)]
enum Stage {
    /// Detect communities; write partition, strengths, and modularity.
    Detect(Common),
    /// Sample one augmented view pair; write views and masks.
    Augment(Common),
    /// Train the encoder; write checkpoint and loss trace.
    Train(Common),
    /// Encode the full graph with the trained checkpoint.
    Embed(Common),
    /// Evaluate stored embeddings on the configured downstream tasks.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Run a single task: classification, clustering, or link_prediction.
        #[arg(long)]
        task: Option<String>,
    },
}

fn dispatch(stage: Stage) -> csgcl::Result<()> {
    let (common, command) = match stage {
        Stage::Detect(c) => (c, Command::Detect),
        Stage::Augment(c) => (c, Command::Augment),
        Stage::Train(c) => (c, Command::Train),
        Stage::Embed(c) => (c, Command::Embed),
        Stage::Eval { common, task } => {
            let task = task
                .map(|name| match name.as_str() {
                    "classification" => Ok(EvalTask::Classification),
                    "clustering" => Ok(EvalTask::Clustering),
                    "link_prediction" => Ok(EvalTask::LinkPrediction),
                    other => Err(csgcl::Error::InvalidConfig(format!(
                        "unknown eval task `{other}`"
                    ))),
                })
                .transpose()?;
            (common, Command::Eval(task))
        }
    };
    let mut cfg = parse_config(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.override_seed(seed);
    }
    if let Some(out) = common.out {
        cfg.override_output(out);
    }
    if common.as_undirected {
        cfg.override_as_undirected();
    }
    run(command, &cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.print_defaults {
        print!("{}", default_config_toml());
        return ExitCode::SUCCESS;
    }
    let Some(stage) = cli.command else {
        eprintln!("error: missing subcommand (try --help)");
        return ExitCode::FAILURE;
    };
    match dispatch(stage) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
