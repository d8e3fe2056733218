//! `nevsamp`: generate configurations, decide sampling criteria, build witnesses,
//! estimate vulnerability and run the harmonic-measure experiment.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "nevsamp", version, about = "Nevanlinna sampling criteria and counterexamples in the unit disk")]
struct Cli {
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true, env = "NEVSAMP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a configuration and write it as JSON
    Generate(GenerateArgs),
    /// Decide a sampling criterion for a configuration
    Analyze(AnalyzeArgs),
    /// Build a counterexample function and check its bounds
    Witness(WitnessArgs),
    /// Estimate the vulnerability functional on one dyadic square
    Vuln(VulnArgs),
    /// Monte Carlo escape probabilities of excised-disk domains
    Hm(HmArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Dyadic,
    Net,
    Rings,
    Disks,
}

#[derive(Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub depth: u32,
    /// Net profile g, e.g. `pow:0.5`
    #[arg(long)]
    pub g: Option<String>,
    /// Disk radius profile φ, e.g. `pow:1` or `expinv:1`
    #[arg(long)]
    pub phi: Option<String>,
    /// Ring radii r_n = 1 - q^n
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Ring spacing: `geometric:b` (ε_n = b^n) or `power:s` (ε_n = n^-s)
    #[arg(long, default_value = "geometric:0.5")]
    pub spacing: String,
    /// Multiplier of ε_n
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    Hl,
    Net,
    Rings,
    Udisks,
    Witness,
}

#[derive(Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub criterion: CriterionKind,
    /// Boundary point as a fraction of a full turn (0.25 is i)
    #[arg(long, default_value_t = 0.0)]
    pub zeta: f64,
    /// Separation for the Hayman–Lyons subsequence
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Truncation depth (defaults to the configuration's depth)
    #[arg(long)]
    pub depth: Option<u32>,
    /// Dyadic base K of the disk criterion
    #[arg(long = "K", default_value_t = 2.0)]
    pub k: f64,
    /// Overrides the net profile recorded in the configuration
    #[arg(long)]
    pub g: Option<String>,
    /// Overrides the disk profile recorded in the configuration
    #[arg(long)]
    pub phi: Option<String>,
    /// Selection threshold ε of the witness selector
    #[arg(long, default_value_t = nevsamp_core::criteria::DEFAULT_SELECTION_EPS)]
    pub eps: f64,
    /// Blaschke distribution JSON for the witness selector
    #[arg(long)]
    #[serde(skip)]
    pub dist: Option<PathBuf>,
    /// Zeros per level stacked on the k = 0 column
    #[arg(long)]
    pub dist_column: Option<u64>,
    /// Intensity of a random summable distribution (needs --seed)
    #[arg(long)]
    pub dist_random: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
    /// Per-level CSV (n, count, term, partial_sum)
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    Example1,
    Appendix,
    NetNecessity,
    UdisksNecessity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Ceil,
    Floor,
}

#[derive(Args, Serialize)]
pub struct WitnessArgs {
    #[arg(long = "type", value_enum)]
    pub kind: WitnessKind,
    /// Configuration (not needed for example1, which uses the dyadic centers)
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub depth: Option<u32>,
    /// Primary parameter of the construction: c, δ, ψ or φ
    #[arg(long)]
    pub param: Option<String>,
    /// Horocycle level for example1
    #[arg(long)]
    pub c: Option<f64>,
    /// Separation for the appendix construction
    #[arg(long)]
    pub delta: Option<f64>,
    /// Class-F profile ψ for net-necessity (defaults to the one derived from the net's g)
    #[arg(long)]
    pub psi: Option<String>,
    /// Disk profile φ for udisks-necessity (defaults to the configuration's)
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long, value_enum, default_value_t = Rule::Ceil)]
    pub rule: Rule,
    /// Smallest P_λ(1) that receives zeros in udisks-necessity
    #[arg(long, default_value_t = nevsamp_core::counterexamples::DEFAULT_UDISK_THRESHOLD)]
    pub threshold: f64,
    /// Disk boundary samples checked by udisks-necessity
    #[arg(long, default_value_t = 4000)]
    pub samples: usize,
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
    /// Also write the full witness (zero set and harmonic part) as JSON
    #[arg(long)]
    #[serde(skip)]
    pub witness_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Brute,
    Opt,
}

#[derive(Args, Serialize)]
pub struct VulnArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: PathBuf,
    /// Dyadic square as `n,k`
    #[arg(long)]
    pub square: String,
    /// Number of zeros to place
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Mode::Opt)]
    pub mode: Mode,
    /// Grid resolution of the brute-force search
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Multistart count of the optimizer
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Base {
    Dyadic,
    Net,
}

#[derive(Args, Serialize)]
pub struct HmArgs {
    /// Disk radius profile φ
    #[arg(long)]
    pub phi: String,
    /// Level range `a..b` (inclusive)
    #[arg(long)]
    pub levels: String,
    #[arg(long)]
    pub walks: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "K", default_value_t = 2.0)]
    pub k: f64,
    /// Uniformly dense base carrying the disks
    #[arg(long, value_enum, default_value_t = Base::Dyadic)]
    pub base: Base,
    /// Per-level CSV
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

/// Caller mistakes that are not library errors (bad flag combinations, unreadable inputs).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Exit code and error kind for a failed run.
fn classify(e: &anyhow::Error) -> (u8, &'static str) {
    if e.downcast_ref::<UsageError>().is_some() {
        return (2, "usage");
    }
    if let Some(core) = e.downcast_ref::<nevsamp_core::Error>() {
        return (if core.is_precondition() { 2 } else { 1 }, core.kind());
    }
    (1, "internal")
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Witness(a) => commands::witness(&a),
        Command::Vuln(a) => commands::vuln(&a),
        Command::Hm(a) => commands::hm(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = classify(&e);
            let body = serde_json::json!({ "error": { "kind": kind, "message": format!("{e:#}") } });
            eprintln!("{body}");
            ExitCode::from(code)
        }
    }
}
