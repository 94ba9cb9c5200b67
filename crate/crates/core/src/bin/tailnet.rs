use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tailnet::pipeline::{self, Mode, RunConfig};

/// Tail-risk network estimation: VaR–ΔCoVaR matrices, centrality rankings,
/// centrality-exclusion feature ordering, minimum-variance portfolios, and
/// nodewise-Lasso precision matrices.
#[derive(Parser, Debug)]
#[command(name = "tailnet", version, about)]
struct Cli {
    /// estimate | rolling | foce | precision | simulate
    #[arg(long)]
    mode: Option<Mode>,
    /// Quantile level in (0,1)
    #[arg(long)]
    tau: Option<f64>,
    /// Rolling estimation window length (periods)
    #[arg(long)]
    window: Option<usize>,
    /// Rolling step size (periods)
    #[arg(long)]
    step: Option<usize>,
    /// degree | eigenvector | katz | pagerank | closeness | betweenness | leverage
    #[arg(long)]
    centrality: Option<tailnet::centrality::CentralityKind>,
    /// FOCE stopping threshold
    #[arg(long)]
    epsilon: Option<f64>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Returns CSV (date,<asset>,...)
    #[arg(long)]
    returns: Option<PathBuf>,
    /// State-variable CSV (date,<var>,...)
    #[arg(long)]
    state: Option<PathBuf>,
    /// Output directory for artifacts
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Multiplier c in the nodewise tuning lambda = c*sqrt(log p / n)
    #[arg(long)]
    lambda_scale: Option<f64>,
    /// JSON config file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
}

fn merge(cli: Cli) -> Result<RunConfig, tailnet::Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.mode {
        cfg.mode = v;
    }
    if let Some(v) = cli.tau {
        cfg.tau = v;
    }
    if cli.window.is_some() {
        cfg.window = cli.window;
    }
    if let Some(v) = cli.step {
        cfg.step = v;
    }
    if let Some(v) = cli.centrality {
        cfg.centrality = v;
    }
    if let Some(v) = cli.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if cli.returns.is_some() {
        cfg.returns = cli.returns;
    }
    if cli.state.is_some() {
        cfg.state = cli.state;
    }
    if let Some(v) = cli.out_dir {
        cfg.out_dir = v;
    }
    if let Some(v) = cli.lambda_scale {
        cfg.lambda_scale = v;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match merge(cli) {
        Ok(cfg) => cfg,
        Err(err) => return fail(&err),
    };
    match pipeline::run_pipeline(&cfg) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for a in &report.artifacts {
                println!("{}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => fail(&err),
    }
}

fn fail(err: &tailnet::Error) -> ExitCode {
    let record = serde_json::json!({
        "error": err.to_string(),
        "exit_code": pipeline::exit_code(err),
    });
    eprintln!("{record}");
    ExitCode::from(pipeline::exit_code(err) as u8)
}
