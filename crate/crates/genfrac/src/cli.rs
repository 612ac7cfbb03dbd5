use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use genfrac_core::{KernelSpec, ParameterSet, Rectangle};

#[derive(Debug, Parser)]
#[command(
    name = "genfrac",
    version,
    about = "Generalized fractional operators and numerical checks of their identities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a K-, A- or B-op at one point.
    Eval(EvalArgs),
    /// Check one identity and print its residual report as JSON.
    Verify {
        #[arg(value_enum)]
        identity: VerifyIdentity,
        #[command(flatten)]
        args: IdentityArgs,
        /// Write the report here instead of standard output.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Residuals of one identity over a sequence of panel counts, as CSV.
    Converge {
        #[arg(value_enum)]
        identity: ConvergeIdentity,
        #[command(flatten)]
        args: IdentityArgs,
        #[arg(long, value_name = "N,N,...", value_delimiter = ',', default_value = "8,16,32,64")]
        panel_seq: Vec<usize>,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Run the versioned corpus for every identity and print all reports.
    Corpus {
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// One tolerance for every identity instead of the per-identity defaults.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = genfrac_core::quad::DEFAULT_PANELS)]
        panels: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Op {
    #[value(name = "K", alias = "k")]
    K,
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyIdentity {
    Ibp,
    Green,
    GreenRl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConvergeIdentity {
    Ibp,
    Green,
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct RuleArgs {
    /// Gauss points per panel.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub panels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub op: Op,
    #[arg(long, default_value = "rl")]
    pub kernel: KernelSpec,
    #[arg(long)]
    pub alpha: f64,
    /// `a,b,p,q`
    #[arg(long, allow_hyphen_values = true)]
    pub pset: ParameterSet,
    /// Act along t1 or t2 of a two-variable function.
    #[arg(long, requires = "rect", requires = "t2")]
    pub axis: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Option<Rectangle>,
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    /// The point, or its t1 coordinate when `--axis` is given.
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t2: Option<f64>,
    #[command(flatten)]
    pub rule: RuleArgs,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value = "rl")]
    pub kernel: KernelSpec,
    /// Two p-set shapes, one per axis: `left`, `right` or `mixed:p,q`.
    #[arg(long, value_name = "SPEC,SPEC")]
    pub psets: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Rectangle,
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    #[arg(long, allow_hyphen_values = true)]
    pub g: String,
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["eta1", "eta2"])]
    pub eta: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "eta2")]
    pub eta1: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "eta1")]
    pub eta2: Option<String>,
    /// Largest acceptable relative residual.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub rule: RuleArgs,
}
