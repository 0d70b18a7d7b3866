use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plancherel_core::SamplerKind;
use plancherel_lab::{run_experiment, Experiment, ExperimentConfig, LabError};

#[derive(Parser)]
#[command(
    name = "plancherel",
    version,
    about = "Monte Carlo experiments on Plancherel random partitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Plancherel pmf and the sum of squared dimensions
    Exact(Flags),
    /// Draw a batch of diagrams
    Sample(Flags),
    /// Sup-distance of scaled diagrams to the limit shape
    Shape(Flags),
    /// Normalized fluctuation at one point
    Clt(Flags),
    /// Covariances of fluctuations at separated points
    Cov(Flags),
    /// Chebyshev functionals of the rotated deviation
    Kerov(Flags),
    /// Edge identity and first-row statistics
    Edge(Flags),
    /// Kernel prediction of interval counts against Monte Carlo
    Kernel(Flags),
    /// Random series partial sums and the limit Gaussian vector
    Series(Flags),
    /// Probe of increments of the rotated fluctuation
    Tightness(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    t: Option<f64>,
    /// Additional sizes compared against --n
    #[arg(long = "n-values", value_delimiter = ',')]
    n_values: Vec<u64>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    s: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    theta: Vec<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "k-max")]
    k_max: Option<usize>,
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    separation: Option<f64>,
    /// rsk, growth or poissonized
    #[arg(long)]
    sampler: Option<SamplerKind>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "PLANCHEREL_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with an experiment configuration; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Omit the timestamp line from CSV outputs
    #[arg(long)]
    reproducible: bool,
}

impl Command {
    fn split(self) -> (Experiment, Flags) {
        match self {
            Command::Exact(f) => (Experiment::Exact, f),
            Command::Sample(f) => (Experiment::Sample, f),
            Command::Shape(f) => (Experiment::Shape, f),
            Command::Clt(f) => (Experiment::Clt, f),
            Command::Cov(f) => (Experiment::Cov, f),
            Command::Kerov(f) => (Experiment::Kerov, f),
            Command::Edge(f) => (Experiment::Edge, f),
            Command::Kernel(f) => (Experiment::Kernel, f),
            Command::Series(f) => (Experiment::Series, f),
            Command::Tightness(f) => (Experiment::Tightness, f),
        }
    }
}

fn build_config(experiment: Experiment, f: Flags) -> Result<ExperimentConfig, LabError> {
    let mut cfg = match &f.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_json_file(path)?;
            if cfg.experiment != experiment {
                return Err(LabError::Validation(format!(
                    "config file is for '{}', not '{}'",
                    cfg.experiment.name(),
                    experiment.name()
                )));
            }
            cfg
        }
        None => ExperimentConfig::new(experiment),
    };
    macro_rules! overlay {
        ($($field:ident <- $flag:expr),* $(,)?) => {
            $(if let Some(v) = $flag { cfg.$field = Some(v); })*
        };
    }
    overlay!(
        n <- f.n, t <- f.t, x <- f.x, x0 <- f.x0, u <- f.u, z <- f.z, m <- f.m, k_max <- f.k_max,
        gap <- f.gap, epsilon <- f.epsilon, separation <- f.separation, sampler <- f.sampler,
        thread_count <- f.threads, out_dir <- f.out,
    );
    if !f.n_values.is_empty() {
        cfg.n_values = f.n_values;
    }
    if !f.s.is_empty() {
        cfg.s = f.s;
    }
    if !f.theta.is_empty() {
        cfg.theta = f.theta;
    }
    if let Some(r) = f.replicas {
        cfg.replicas = r;
    }
    if let Some(s) = f.seed {
        cfg.master_seed = s;
    }
    cfg.reproducible |= f.reproducible;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, flags) = cli.command.split();
    let result = build_config(experiment, flags).and_then(|cfg| run_experiment(&cfg));
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            for c in &outcome.checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for p in &outcome.files {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
