use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "contrafact",
    version,
    about = "Country-level citation indicators and exclusion counterfactuals"
)]
pub struct Cli {
    /// Worker threads; 0 picks one per core. Output does not depend on it.
    #[arg(long, global = true, env = "CONTRAFACT_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a corpus and report the first problem with its line.
    Validate(ValidateArgs),
    /// Cohort statistics and country-year indicators.
    Compute(ComputeArgs),
    /// Actual-minus-counterfactual deltas after excluding one country.
    Counterfactual(CounterfactualArgs),
    /// Reference-list, self-citation and recipient diagnostics.
    Diagnose(DiagnoseArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// List the built-in scenarios, or print one as JSON.
    Presets(PresetsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Publications, one JSON object per line.
    #[arg(long)]
    pub pubs: PathBuf,
    /// Citation edges, `citing<TAB>cited` per line.
    #[arg(long)]
    pub edges: PathBuf,
    /// Window, top share and year range as JSON.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Selection {
    /// Restrict country rows to these codes (repeat or comma-separate).
    #[arg(long, value_delimiter = ',')]
    pub country: Vec<String>,
    #[arg(long)]
    pub year_from: Option<i32>,
    #[arg(long)]
    pub year_to: Option<i32>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Write a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub selection: Selection,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CounterfactualArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Country whose publications are removed.
    #[arg(long)]
    pub exclude: String,
    #[command(flatten)]
    pub selection: Selection,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Diagnostic {
    SelfCitation,
    RefLength,
    CitedAge,
    Nonstandard,
    AdditionalCitations,
    ReflenEc,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub selection: Selection,
    /// Diagnostics to run (repeat or comma-separate); all by default.
    #[arg(long, value_delimiter = ',')]
    pub which: Vec<Diagnostic>,
    /// Excluded country for the additional-citations profile.
    #[arg(long)]
    pub exclude: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Built-in scenario name.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    pub preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long = "config", value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    /// Print this preset's scenario JSON.
    #[arg(long)]
    pub name: Option<String>,
}
