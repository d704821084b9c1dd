use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "framemul", version, about = "Frames, Bessel multipliers and norm certificates")]
pub struct Cli {
    /// Seed for every random draw in the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the report here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a family and print it as a family file.
    Gen(GenArgs),
    /// Classify a family: Bessel/frame/Riesz flags and optimal bounds.
    Analyze(FamilyArgs),
    /// Canonical dual (frames) or biorthogonal dual on the span (Riesz sequences).
    Dual(FamilyArgs),
    /// Build the multiplier matrix.
    MultBuild(SpecArgs),
    /// Certify operator, trace and Hilbert-Schmidt norm bounds.
    MultCertify(SpecArgs),
    /// Compare tr(M) with Σ m_k⟨φ_k, ψ_k⟩.
    MultTrace(SpecArgs),
    /// Compose two multipliers through the cross-Gram matrix.
    MultCompose(ComposeArgs),
    /// Invert a multiplier over Riesz bases.
    MultInvert(SpecArgs),
    /// Recover the symbol of a multiplier over Riesz bases.
    MultRecover(RecoverArgs),
    /// Predict and verify frame bounds of a perturbed family.
    PerturbPredict(PredictArgs),
    /// Continuity experiments: multiplier differences against linear-in-ε bounds.
    PerturbConverge(ConvergeArgs),
    /// Bessel bound of the rank-one tensor family in Hilbert-Schmidt space.
    HsBessel(HsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum KindArg {
    Onb,
    RandomBessel,
    RandomFrame,
    RieszFromMatrix,
    GaborRegular,
    GaborIrregular,
    HarmonicCounterexample,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// JSON generator spec; replaces the flags below.
    #[arg(long, conflicts_with = "kind")]
    pub genspec: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "genspec")]
    pub kind: Option<KindArg>,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    /// Number of members (random kinds, irregular Gabor).
    #[arg(long)]
    pub k: Option<usize>,
    /// Time step of the Gabor lattice.
    #[arg(long, default_value_t = 1)]
    pub a: usize,
    /// Frequency step of the Gabor lattice.
    #[arg(long, default_value_t = 1)]
    pub b: usize,
    /// Condition number target (riesz_from_matrix).
    #[arg(long, default_value_t = 10.0)]
    pub condition: f64,
    /// Number of shells (harmonic_counterexample).
    #[arg(long, default_value_t = 2)]
    pub p: usize,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long)]
    pub family: PathBuf,
}

/// Where a multiplier spec comes from.
#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Spec file {"symbol","analysis","synthesis"}.
    #[arg(long, conflicts_with_all = ["analysis", "synthesis", "symbol", "random"])]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub analysis: Option<PathBuf>,
    #[arg(long)]
    pub synthesis: Option<PathBuf>,
    #[arg(long)]
    pub symbol: Option<PathBuf>,
    /// Draw a seeded random spec.
    #[arg(long)]
    pub random: bool,
    /// Analysis dimension for --random.
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    /// Synthesis dimension for --random (defaults to --dim).
    #[arg(long)]
    pub synthesis_dim: Option<usize>,
    /// Number of members for --random.
    #[arg(long, default_value_t = 6)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    #[arg(long, requires = "inner", conflicts_with = "random")]
    pub outer: Option<PathBuf>,
    #[arg(long, requires = "outer")]
    pub inner: Option<PathBuf>,
    #[arg(long)]
    pub random: bool,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Operator file {"rows","cols","entries"}; needs --analysis and --synthesis.
    #[arg(long, conflicts_with_all = ["spec", "symbol", "random"], requires_all = ["analysis", "synthesis"])]
    pub operator: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, requires = "perturbed", conflicts_with = "random")]
    pub original: Option<PathBuf>,
    #[arg(long, requires = "original")]
    pub perturbed: Option<PathBuf>,
    /// Random frame and a seeded perturbation at l² distance --eps.
    #[arg(long)]
    pub random: bool,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// One of symbol_inf, symbol_l2, symbol_l1, family_uniform, family_l2,
    /// family_l1, joint; all seven when omitted.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.5)]
    pub eps0: f64,
}

#[derive(Debug, Args)]
pub struct HsArgs {
    #[arg(long, requires = "synthesis", conflicts_with = "random")]
    pub analysis: Option<PathBuf>,
    #[arg(long, requires = "analysis")]
    pub synthesis: Option<PathBuf>,
    #[arg(long)]
    pub random: bool,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}
