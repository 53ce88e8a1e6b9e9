mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Ollivier-Ricci curvature, message-passing simulation and bound checks.
#[derive(Debug, Parser)]
#[command(name = "ricci-gnn", version)]
struct Cli {
    /// Worker threads for curvature and suite runs (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a graph from one of the built-in families.
    Generate(GenerateArgs),
    /// Exact curvature of every edge.
    Curvature(CurvatureArgs),
    /// Check the curvature inequalities over a corpus.
    Verify(VerifyArgs),
    /// Run a message-passing network and report smoothing metrics.
    Simulate(SimulateArgs),
    /// Curvature-guided rewiring.
    Rewire(RewireArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyName {
    Complete,
    Path,
    Cycle,
    Star,
    DoubleStar,
    Barbell,
    CocktailParty,
    ErdosRenyi,
    RandomTree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatName {
    Edgelist,
    Json,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Vertex count (leaf count for `star`, half size for `cocktail-party`).
    #[arg(long)]
    n: Option<usize>,
    /// Clique size for `barbell`.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Center degrees for `double-star`.
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; defaults to the `--out` extension, else edge list.
    #[arg(long, value_enum)]
    format: Option<FormatName>,
}

#[derive(Debug, Args)]
struct CurvatureArgs {
    graph: PathBuf,
    /// Input format; defaults to the file extension.
    #[arg(long, value_enum)]
    format: Option<FormatName>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// `all`, `one_layer`, `bottleneck`, or a single check name.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop at the first violation.
    #[arg(long)]
    fail_fast: bool,
    /// Check these graphs instead of the built-in corpus.
    #[arg(long)]
    graph: Vec<PathBuf>,
    /// Include every evaluated check in the report.
    #[arg(long)]
    records: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(required_unless_present = "demo_smoothing")]
    graph: Option<PathBuf>,
    #[arg(required_unless_present = "demo_smoothing")]
    features: Option<PathBuf>,
    #[arg(required_unless_present = "demo_smoothing")]
    spec: Option<PathBuf>,
    /// Directory for per-layer feature CSVs.
    #[arg(long)]
    layers_out: Option<PathBuf>,
    /// Repeated pure averaging on the built-in six-vertex graph.
    #[arg(long, conflicts_with_all = ["graph", "features", "spec"])]
    demo_smoothing: bool,
    /// Averaging rounds for `--demo-smoothing`.
    #[arg(long, default_value_t = 25)]
    iterations: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RewireArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    tau_neg: f64,
    #[arg(long, default_value_t = 0.75, allow_hyphen_values = true)]
    tau_pos: f64,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, default_value_t = 1)]
    additions: usize,
    #[arg(long, default_value_t = 1)]
    removals: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allow removals that disconnect the graph.
    #[arg(long)]
    allow_disconnect: bool,
    /// Input and output graph format; defaults to the file extension.
    #[arg(long, value_enum)]
    format: Option<FormatName>,
    /// Rewired graph; stdout when absent.
    #[arg(long)]
    out_graph: Option<PathBuf>,
    #[arg(long)]
    out_trace: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("ricci-gnn: {e}");
        return ExitCode::from(2);
    }
    eprintln!("ricci-gnn: {} worker threads", rayon::current_num_threads());
    let outcome = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Curvature(args) => commands::curvature(args),
        Command::Verify(args) => commands::verify(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Rewire(args) => commands::rewire(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ricci-gnn: {e:#}");
            ExitCode::from(2)
        }
    }
}
