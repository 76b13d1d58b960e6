mod commands;
mod output;
mod random;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multiroot::config::{EngineChoice, OutputFormat};

#[derive(Parser)]
#[command(
    name = "multiroot",
    version,
    about = "Solve and compare many-body root dynamics with one multiple root"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact coefficient tables for (N, m1) as JSON.
    Tables {
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        m1: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an initial-value problem and write the sampled trajectory.
    Solve {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: RunOpts,
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
        /// Output path; stdout when omitted (single engine only).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Run both engines and report their deviation.
    Compare {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: RunOpts,
        /// Compare on every built-in example.
        #[arg(long, conflicts_with_all = ["example", "config", "random"])]
        all: bool,
        /// Compare on this many random initial-value problems.
        #[arg(long, conflicts_with_all = ["example", "config"])]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pass when the deviation is below `rel-tol (1 + max |x|)`.
        #[arg(long, default_value_t = 1e-3)]
        rel_tol: f64,
    },
    /// Estimate the period of every root.
    Period {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: RunOpts,
        /// Candidate period; defaults to the generating model's period.
        #[arg(long)]
        candidate: Option<f64>,
        #[arg(long)]
        tol_period: Option<f64>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// List the built-in examples.
    Examples,
}

#[derive(Args, Clone, Default)]
struct Source {
    /// Built-in example name (see `multiroot examples`).
    #[arg(long, conflicts_with = "config")]
    example: Option<String>,
    /// JSON experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct RunOpts {
    /// End time; may lie before t0 for a backward solve.
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long)]
    tol_root: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Algebraic,
    Direct,
    Both,
}

impl From<EngineArg> for EngineChoice {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Algebraic => EngineChoice::Algebraic,
            EngineArg::Direct => EngineChoice::Direct,
            EngineArg::Both => EngineChoice::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tables { n, m1, out } => commands::tables(n, m1, out.as_deref()),
        Command::Solve {
            source,
            run,
            engine,
            out,
            format,
        } => commands::solve(
            &source,
            &run,
            engine.map(Into::into),
            out,
            format.map(Into::into),
        ),
        Command::Compare {
            source,
            run,
            all,
            random,
            seed,
            rel_tol,
        } => commands::compare(&source, &run, all, random, seed, rel_tol),
        Command::Period {
            source,
            run,
            candidate,
            tol_period,
            format,
        } => commands::period(&source, &run, candidate, tol_period, format.map(Into::into)),
        Command::Examples => commands::list_examples(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
