use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pltf::{EmPrior, Method, ModelFamily, ModelKind};

const PRECEDENCE: &str = "Model flags mirror the keys of the --config file one to one \
(--model/model, --rank/rank, --core-dims/core_dims, --a/prior_a, --b/prior_b). \
A flag given on the command line overrides the value from the file; anything set in \
neither place takes its default (model cp, A 0.5, B 10).";

#[derive(Debug, Parser)]
#[command(name = "pltf", version, about = "Probabilistic latent tensor factorization (KL / Poisson)")]
pub struct Cli {
    /// More diagnostics on standard error (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic CP tensor and its ground-truth factors.
    Generate(GenerateArgs),
    /// Fit one model to a tensor with EM or variational Bayes.
    #[command(after_help = PRECEDENCE)]
    Fit(FitArgs),
    /// Sweep model orders with random restarts and pick the best by score.
    #[command(after_help = PRECEDENCE)]
    Select(SelectArgs),
    /// Link-prediction AUC over a grid of missing fractions, methods, ranks and seeds.
    EvalLinks(EvalLinksArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Observed dimensions I J K.
    #[arg(long, num_args = 3, value_names = ["I", "J", "K"], required = true)]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub rank: usize,
    /// Gamma prior shape A.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    /// Gamma prior mean B.
    #[arg(long, default_value_t = 10.0)]
    pub b: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the noiseless intensity instead of a Poisson draw.
    #[arg(long)]
    pub no_poisson: bool,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
}

/// Model structure and priors; see the precedence note in --help.
#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// Model config file (`key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// cp, tucker or custom.
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, num_args = 3, value_names = ["P", "Q", "R"])]
    pub core_dims: Option<Vec<usize>>,
    /// Gamma prior shape A (config key prior_a).
    #[arg(long, visible_alias = "prior-a")]
    pub a: Option<f64>,
    /// Gamma prior mean B (config key prior_b).
    #[arg(long, visible_alias = "prior-b")]
    pub b: Option<f64>,
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// em or vb.
    #[arg(long, default_value = "vb")]
    pub method: Method,
    /// EM fixed point: flat (prior terms dropped) or full (MAP, clipped at 0).
    #[arg(long, default_value = "flat")]
    pub em_prior: EmPrior,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    /// Stop when the relative change of the trace drops to this; 0 runs all iterations.
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Observed tensor (COO).
    #[arg(long)]
    pub data: PathBuf,
    /// 0/1 mask (COO); cells absent from the file are unobserved. Defaults to all ones.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write the geometric-mean (L) view of each factor.
    #[arg(long)]
    pub write_geo: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// cp or tucker (order r means an r x r x r core).
    #[arg(long, default_value = "cp")]
    pub family: ModelFamily,
    #[arg(long, default_value_t = 2)]
    pub rmin: usize,
    #[arg(long, default_value_t = 10)]
    pub rmax: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 10.0)]
    pub b: f64,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalLinksArgs {
    /// Observed tensor (COO); binarized at > 0.
    #[arg(long)]
    pub data: PathBuf,
    /// Missing percentages, e.g. 40 60 80.
    #[arg(long, num_args = 1.., default_values_t = [40.0, 60.0, 80.0])]
    pub missing: Vec<f64>,
    #[arg(long, num_args = 1.., default_values = ["em", "vb"])]
    pub methods: Vec<Method>,
    #[arg(long, num_args = 1.., default_values_t = [2, 20])]
    pub ranks: Vec<usize>,
    /// Number of seeds; runs use seeds 1..=N. Zero gives an empty grid.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value = "cp")]
    pub family: ModelFamily,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 10.0)]
    pub b: f64,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value = "flat")]
    pub em_prior: EmPrior,
    #[arg(long, short)]
    pub out: PathBuf,
}
