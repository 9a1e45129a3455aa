use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use itemsynth::lp::DEFAULT_SOLVER;
use itemsynth::oracle::OracleModel;
use itemsynth::pipeline::Purify;
use itemsynth::privacy::DEFAULT_THRESHOLD;
use itemsynth::rounding::{BranchObjective, FixOrder, DEFAULT_METHOD};

/// Synthetic transaction databases from frequent-itemset support constraints.
#[derive(Debug, Parser)]
#[command(name = "itemsynth", version)]
pub struct Cli {
    /// Seed for every random choice; recorded in each output header.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine frequent itemsets from a database into a constraint file.
    Mine {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        minsup: u64,
        #[arg(long)]
        maxlen: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize a database approximately meeting a constraint file.
    Synth {
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Deviation report (CSV).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the relaxed model as plain text.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Print the deviation report of a database against a constraint file.
    Verify {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        constraints: PathBuf,
    },
    /// Exact optimum of a tiny instance by exhaustive search.
    Oracle {
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::Overshoot)]
        model: ModelArg,
        /// Write an optimal database.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constraint file from the 3-coloring reduction of a graph.
    #[command(name = "gen-3col")]
    Gen3col {
        /// One `u v` pair per line, 0-based.
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        k0: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check whether constraints disclose the supports named in a privacy file.
    Audit {
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long)]
        privacy: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Randomize the supports of privacy-rule itemsets in a database.
    #[command(name = "scrub-db")]
    ScrubDb {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        privacy: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomize the constraint closest to a sensitive itemset.
    #[command(name = "scrub-cst")]
    ScrubCst {
        #[arg(long)]
        constraints: PathBuf,
        /// Item ids, separated by spaces or commas.
        #[arg(long)]
        sensitive: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, default_value = DEFAULT_METHOD)]
    pub method: String,
    #[arg(long, default_value = DEFAULT_SOLVER)]
    pub solver: String,
    /// Probability refinement rounds for the derandomized methods.
    #[arg(long, default_value_t = 2)]
    pub refine_rounds: usize,
    #[arg(long, value_enum, default_value_t = OrderArg::Row)]
    pub order: OrderArg,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Absolute)]
    pub objective: ObjectiveArg,
    /// Pivot budget for the LP solver.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// How the solver's optimum is prepared for rounding.
    #[arg(long, value_enum, default_value_t = PurifyArg::Tighten)]
    pub purify: PurifyArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Overshoot,
    Absolute,
}

impl From<ModelArg> for OracleModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Overshoot => OracleModel::Overshoot,
            ModelArg::Absolute => OracleModel::Absolute,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    Row,
    Column,
}

impl From<OrderArg> for FixOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Row => FixOrder::RowMajor,
            OrderArg::Column => FixOrder::ColumnMajor,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObjectiveArg {
    Absolute,
    Signed,
}

impl From<ObjectiveArg> for BranchObjective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Absolute => BranchObjective::AbsoluteDeviation,
            ObjectiveArg::Signed => BranchObjective::SignedDeviation,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PurifyArg {
    Off,
    Keep,
    Tighten,
}

impl From<PurifyArg> for Purify {
    fn from(p: PurifyArg) -> Self {
        match p {
            PurifyArg::Off => Purify::Off,
            PurifyArg::Keep => Purify::KeepObjective,
            PurifyArg::Tighten => Purify::Tighten,
        }
    }
}
