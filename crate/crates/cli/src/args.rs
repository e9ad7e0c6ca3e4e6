use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use moca_core::Thresholds;

#[derive(Debug, Parser)]
#[command(
    name = "moca",
    version,
    about = "Evaluate cultural impact on agile elements from a rule knowledge base"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Knowledge-base file or directory (repeatable). Defaults to the
    /// entries of MOCA_KB_PATH.
    #[arg(long = "kb", global = true, value_name = "PATH")]
    pub kb: Vec<PathBuf>,

    /// JSON file with profiles; otherwise profiles are taken from the KB.
    #[arg(long, global = true, value_name = "PATH")]
    pub profile_file: Option<PathBuf>,

    /// Level thresholds `<low>,<high>`.
    #[arg(long, global = true, value_name = "L,H", default_value = "33,67")]
    pub thresholds: Thresholds,

    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    /// Write output here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check referential integrity and manifest counts.
    Validate,
    /// Score elements for one profile and set of context flags.
    Evaluate(EvaluateArgs),
    /// Show one rule in template form with its condition and rationale.
    Explain {
        rule_id: String,
    },
    /// Export the metric x element impact matrix.
    Matrix,
    /// Compare two scenarios element by element.
    Diff(DiffArgs),
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub profile: String,

    /// Context flag such as `manager_attends_meeting` (repeatable).
    #[arg(long = "flag", value_name = "ID")]
    pub flags: Vec<String>,

    /// Restrict output to these elements (repeatable).
    #[arg(long = "element", value_name = "ID")]
    pub elements: Vec<String>,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    /// Profile for scenario A (and B unless --profile-b is given).
    #[arg(long)]
    pub profile: String,

    #[arg(long)]
    pub profile_b: Option<String>,

    /// Flag set in both scenarios (repeatable).
    #[arg(long = "flag", value_name = "ID")]
    pub flags: Vec<String>,

    /// Flag set only in scenario A (repeatable).
    #[arg(long = "flag-a", value_name = "ID")]
    pub flags_a: Vec<String>,

    /// Flag set only in scenario B (repeatable).
    #[arg(long = "flag-b", value_name = "ID")]
    pub flags_b: Vec<String>,

    /// Thresholds for scenario B; defaults to --thresholds.
    #[arg(long, value_name = "L,H")]
    pub thresholds_b: Option<Thresholds>,

    #[arg(long = "element", value_name = "ID")]
    pub elements: Vec<String>,

    /// Also list unchanged elements.
    #[arg(long)]
    pub all: bool,
}
