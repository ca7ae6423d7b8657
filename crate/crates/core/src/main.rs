use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bayespir::cli::{cmd_batch, cmd_eval, cmd_index, cmd_inspect, cmd_query, QueryOptions};
use bayespir::pir::QuerySemantics;
use bayespir::{ModelKind, Operator};

#[derive(Parser)]
#[command(
    name = "bayespir",
    version,
    about = "Bayesian and possibilistic network document retrieval"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Bnr,
    Pir,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Min,
    Product,
}

#[derive(clap::Args)]
struct RankArgs {
    /// Model bundle directory written by `index`.
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long, value_enum, default_value = "bnr")]
    model: ModelArg,
    /// Combination operator of the hybrid model.
    #[arg(long, value_enum, default_value = "product")]
    op: OpArg,
    /// Number of results per query.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Disjunctive instead of conjunctive query node for the pir model.
    #[arg(long)]
    disjunctive: bool,
}

impl RankArgs {
    fn options(&self) -> QueryOptions {
        QueryOptions {
            model: match self.model {
                ModelArg::Bnr => ModelKind::Bnr,
                ModelArg::Pir => ModelKind::Pir,
                ModelArg::Hybrid => ModelKind::Hybrid,
            },
            op: match self.op {
                OpArg::Min => Operator::Min,
                OpArg::Product => Operator::Product,
            },
            semantics: if self.disjunctive {
                QuerySemantics::Disjunctive
            } else {
                QuerySemantics::Conjunctive
            },
            k: self.k,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Index a JSON Lines corpus and learn every model into a bundle.
    Index {
        corpus: PathBuf,
        /// Output bundle directory.
        #[arg(long)]
        bundle: PathBuf,
        /// Stopword file, one word per line.
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// Rank documents for one query; prints JSON lines.
    Query {
        #[command(flatten)]
        rank: RankArgs,
        /// Query text.
        text: String,
    },
    /// Run every query of a JSON Lines file; prints a run file.
    Batch {
        #[command(flatten)]
        rank: RankArgs,
        queries: PathBuf,
        /// Write the run here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a run against qrels; prints a TSV table.
    Eval {
        run: PathBuf,
        qrels: PathBuf,
        /// Cutoffs for precision and recall.
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        k: Vec<usize>,
        /// Bundle used to drop judgments on unknown documents.
        #[arg(long)]
        bundle: Option<PathBuf>,
    },
    /// Print the learned network, or one term's tables.
    Inspect {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        term: Option<String>,
    },
}

fn run(cli: Cli) -> bayespir::Result<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Index {
            corpus,
            bundle,
            stopwords,
        } => {
            let summary = cmd_index(&corpus, stopwords.as_deref(), &bundle)?;
            writeln!(out, "{summary}")?;
        }
        Command::Query { rank, text } => {
            let list = cmd_query(&rank.bundle, &text, &rank.options(), &mut out)?;
            if list.dropped_terms > 0 {
                eprintln!("warning: {} query term(s) not in the vocabulary", list.dropped_terms);
            }
        }
        Command::Batch {
            rank,
            queries,
            out: path,
        } => {
            let summary = match path {
                Some(p) => {
                    let mut file = BufWriter::new(std::fs::File::create(p)?);
                    let s = cmd_batch(&rank.bundle, &queries, &rank.options(), &mut file)?;
                    file.flush()?;
                    s
                }
                None => cmd_batch(&rank.bundle, &queries, &rank.options(), &mut out)?,
            };
            for q in &summary.empty {
                eprintln!("warning: query {q}: EmptyQuery");
            }
        }
        Command::Eval { run, qrels, k, bundle } => {
            let report = cmd_eval(&run, &qrels, &k, bundle.as_deref(), &mut out)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Inspect { bundle, term } => cmd_inspect(&bundle, term.as_deref(), &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
