//! `mnd`: synthesize data, train, score, evaluate and sweep.

mod commands;
mod options;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use mnd_core::evaluation::SweepKind;

use commands::ScoreInputs;
use options::{ConfigFlags, Precision};

#[derive(Parser, Debug)]
#[command(
    name = "mnd",
    version,
    about = "Novelty detection by mixture decomposition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a Gaussian-cluster benchmark as train.csv and test.csv
    Synth {
        /// Output directory
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Train on a feature CSV; writes checkpoint.txt, history.csv and prototypes.csv
    Train {
        /// Training features (`label,v1,...,vd`, labels 1..=K)
        #[arg(long, value_name = "FILE")]
        train: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Score test features against a trained network; writes scores.csv
    Score {
        #[command(flatten)]
        inputs: ScoreInputs,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Compute the ROC curve and AUC of a score file, scoring first if none is given
    Eval {
        /// Score CSV written by `score`
        #[arg(long, value_name = "FILE")]
        scores: Option<PathBuf>,
        #[command(flatten)]
        inputs: ScoreInputs,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        flags: ConfigFlags,
    },
    /// Run the synthetic benchmark once per value of one parameter
    Sweep {
        /// test_alpha, g, top_n or prototypes_per_class
        #[arg(long)]
        kind: SweepKind,
        /// Comma-separated parameter values
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        flags: ConfigFlags,
    },
}

macro_rules! at_precision {
    ($p:expr, $f:ident($($arg:expr),*)) => {
        match $p {
            Precision::F32 => commands::$f::<f32>($($arg),*),
            Precision::F64 => commands::$f::<f64>($($arg),*),
        }
    };
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { out, flags } => {
            let eff = flags.resolve()?;
            at_precision!(eff.precision, synth(&out, &eff))
        }
        Command::Train { train, out, flags } => {
            let eff = flags.resolve()?;
            at_precision!(eff.precision, train(&train, &out, &eff))
        }
        Command::Score { inputs, out, flags } => {
            let eff = flags.resolve()?;
            at_precision!(eff.precision, score(&inputs, &out, &eff))
        }
        Command::Eval {
            scores,
            inputs,
            out,
            flags,
        } => {
            let eff = flags.resolve()?;
            at_precision!(eff.precision, eval(scores.as_deref(), &inputs, &out, &eff))
        }
        Command::Sweep {
            kind,
            values,
            out,
            flags,
        } => {
            let eff = flags.resolve()?;
            at_precision!(eff.precision, run_sweep(kind, &values, &out, &eff))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mnd: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
