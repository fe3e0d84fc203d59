use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod corpus;

/// Polyregular functions: interpretations, for-programs and ordered enumeration.
#[derive(Debug, Parser)]
#[command(name = "polyreg", version)]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an interpretation on a word by enumerating and sorting tuples.
    EvalInterp {
        file: PathBuf,
        #[arg(long)]
        input: String,
        /// Print the labelled output tuples to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Run a for-program on a word.
    RunForp {
        file: PathBuf,
        #[arg(long)]
        input: String,
        /// Positions bound to the program inputs, comma separated.
        #[arg(long, value_delimiter = ',')]
        args: Vec<usize>,
        /// Print the execution trace to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// List the tuples of a definable enumerator by sorting (the oracle).
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        input: String,
    },
    /// List the tuples of a definable enumerator through the factorization pipeline.
    Pipeline {
        file: PathBuf,
        #[arg(long)]
        input: String,
        /// Rank of the types that split each context.
        #[arg(long, default_value_t = 2)]
        rank: usize,
        /// Rank of the type monoid behind the forest.
        #[arg(long, default_value_t = 2)]
        forest_rank: usize,
        /// Solve repeated contexts again instead of reusing results.
        #[arg(long)]
        no_memo: bool,
        /// Print the recursion trace to stderr.
        #[arg(long)]
        trace: bool,
        /// Write the recursion trace to a file.
        #[arg(long, value_name = "PATH")]
        emit_trace: Option<PathBuf>,
    },
    /// Compose two first-order interpretations (the second runs after the first).
    Compose {
        first: PathBuf,
        second: PathBuf,
        /// Evaluate the composition on this word instead of printing it.
        #[arg(long)]
        input: Option<String>,
    },
    /// Build and validate a factorization forest.
    Forest {
        file: PathBuf,
        #[arg(long)]
        input: String,
    },
    /// Search dominating coordinates for an enumerator order on one word.
    Dominate {
        file: PathBuf,
        #[arg(long)]
        input: String,
        /// Block lengths, comma separated; singleton blocks by default.
        #[arg(long, value_delimiter = ',')]
        blocks: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        rank: usize,
    },
    /// Dominating coordinate of a quantifier-free order on rational tuples.
    RationalDominate { file: PathBuf },
    /// Compare two functions on every word of length 2 to --max-len.
    CheckEquiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Input alphabet, when neither file declares one.
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Run every paired fixture of a corpus directory through oracle, program and pipeline.
    CorpusCheck {
        dir: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
