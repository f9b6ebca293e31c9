//! Command-line options.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Markdown,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Two columns, true label then predicted label.
    LabelsCsv,
    /// A JSON array of rows of counts.
    MatrixJson,
    /// One row of counts per line.
    MatrixCsv,
}

impl InputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            InputFormat::LabelsCsv => "labels-csv",
            InputFormat::MatrixJson => "matrix-json",
            InputFormat::MatrixCsv => "matrix-csv",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "measure-audit",
    version,
    about = "Evaluate and audit classification performance measures"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "markdown")]
    pub format: OutputFormat,

    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Omit the generation time so that reports are byte-for-byte reproducible.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    /// Maximum number of enumerated states before giving up.
    #[arg(long, global = true, env = "MEASURE_AUDIT_BUDGET")]
    pub budget: Option<u64>,

    /// Worker threads for parallel searches (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Tolerance for comparing transcendental values.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate measures on a confusion matrix or a pair of labelings.
    Eval(EvalArgs),
    /// Check properties of measures by exhaustive search.
    Audit(AuditArgs),
    /// Find groups of binary measures that agree on every triplet.
    Distinguish(DistinguishArgs),
    /// Pairwise inconsistency of measures over model comparisons.
    Compare(ModelArgs),
    /// Rank models under each measure.
    Rank(ModelArgs),
    /// Exact expected value under random predictions with fixed class sizes.
    Baseline(BaselineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Format of the input files; inferred from the flag and extension when omitted.
    #[arg(long, value_enum)]
    pub input_format: Option<InputFormat>,

    /// Labels in class-index order, for label files with non-numeric labels.
    #[arg(long, value_delimiter = ',')]
    pub alphabet: Option<Vec<String>>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Confusion matrix file (.json or .csv).
    #[arg(long, conflicts_with = "labels", required_unless_present = "labels")]
    pub matrix: Option<PathBuf>,

    /// Labels file with columns true,pred.
    #[arg(long)]
    pub labels: Option<PathBuf>,

    #[command(flatten)]
    pub source: SourceArgs,

    /// Comma-separated measures, `name[:param=value][:scheme]`; `all` for the registry.
    #[arg(long)]
    pub measures: Option<String>,

    /// Also write the confusion matrix as matrix-json to this path.
    #[arg(long)]
    pub emit_matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[arg(long, default_value = "all")]
    pub measures: String,

    /// Audit the two-class case.
    #[arg(long, conflicts_with = "classes")]
    pub binary: bool,

    /// Number of classes.
    #[arg(long, default_value_t = 2)]
    pub classes: usize,

    /// Largest number of elements searched, for every property.
    #[arg(long)]
    pub n_max: Option<usize>,

    /// Per-property bound such as `Dist=5`; overrides --n-max.
    #[arg(long = "bound", value_name = "PROPERTY=N")]
    pub bounds: Vec<String>,

    /// Comma-separated subset of Max,Min,CSym,Sym,Dist,Mon,SMon,CB,ACB.
    #[arg(long)]
    pub properties: Option<String>,

    /// Check which properties micro, macro and weighted averaging preserve instead.
    #[arg(long)]
    pub averaging: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DistinguishArgs {
    /// Number of elements, `N` or an inclusive range `LO:HI`.
    #[arg(long, default_value = "2:8")]
    pub n: String,

    #[arg(long)]
    pub measures: Option<String>,

    /// Enumerate every triplet literally for all n, including n >= 8 (slow).
    #[arg(long)]
    pub full: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Model input as `[name=]path`; label files must share the true column.
    #[arg(long = "model", value_name = "[NAME=]PATH", required = true)]
    pub models: Vec<String>,

    #[command(flatten)]
    pub source: SourceArgs,

    #[arg(long)]
    pub measures: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    /// True class sizes, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub a: Vec<u64>,

    /// Predicted class sizes, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub b: Vec<u64>,

    #[arg(long)]
    pub measures: Option<String>,
}
