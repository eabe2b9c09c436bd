use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use smovqe_core::ground::{ground_truth, DEFAULT_DEGENERACY_TOL};
use smovqe_core::hamiltonian::{build_hamiltonian, Model};
use smovqe_core::harness::{run_experiment, run_sweep, ExperimentConfig, Measurement, SweepGrid};
use smovqe_core::optimizer::{StrategyConfig, Variant};
use smovqe_core::validation::run_suite;

/// Sequential minimal optimization for VQE under shot noise.
#[derive(Debug, Parser)]
#[command(name = "smovqe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a seed ensemble and write metrics.csv / aggregate.csv
    Run(RunArgs),
    /// Run an experiment per grid point (qubits x layers x shots)
    Sweep(SweepArgs),
    /// Run the Monte-Carlo bias-oracle suite
    Validate(ValidateArgs),
    /// Print the exact ground-state energy
    Gs(ModelArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, default_value = "tfim")]
    model: Model,
    #[arg(long)]
    qubits: usize,
    #[arg(long, allow_hyphen_values = true)]
    j: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
}

#[derive(Debug, Args)]
struct Overrides {
    /// JSON experiment config; flags below override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<Model>,
    #[arg(long, allow_hyphen_values = true)]
    j: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    /// binomial, gaussian or infinite
    #[arg(long)]
    measurement: Option<String>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    sweeps: Option<usize>,
    /// Comma-separated variants, e.g. BIASED,REGULARIZED
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Variant>>,
    /// Applies to every strategy
    #[arg(long)]
    tau: Option<f64>,
    /// Stabilization period, applies to every strategy
    #[arg(long)]
    period: Option<usize>,
    /// `a..b` or a comma-separated list
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    record_every: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, value_delimiter = ',', default_values_t = [5, 7, 10])]
    grid_qubits: Vec<usize>,
    /// Defaults to the base layer count
    #[arg(long, value_delimiter = ',')]
    grid_layers: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 150, 200])]
    grid_shots: Vec<u64>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Monte-Carlo repetitions per statistical check
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a
            .trim()
            .parse()
            .with_context(|| format!("seed range start {a:?}"))?;
        let b: u64 = b
            .trim()
            .parse()
            .with_context(|| format!("seed range end {b:?}"))?;
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().with_context(|| format!("seed {x:?}")))
        .collect()
}

fn resolve(o: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = match &o.config {
        Some(path) => ExperimentConfig::read_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = o.model {
        cfg.model = m;
        cfg.couplings = m.default_couplings();
    }
    if let Some(j) = o.j {
        cfg.couplings.j = j;
    }
    if let Some(h) = o.h {
        cfg.couplings.h = h;
    }
    if let Some(d) = o.delta {
        cfg.couplings.delta = d;
    }
    if let Some(q) = o.qubits {
        cfg.n_qubits = q;
    }
    if let Some(l) = o.layers {
        cfg.n_layers = l;
    }
    if let Some(m) = &o.measurement {
        cfg.measurement = match m.to_ascii_lowercase().as_str() {
            "binomial" => Measurement::Binomial,
            "gaussian" => Measurement::Gaussian,
            "infinite" => Measurement::Infinite,
            other => bail!("unknown measurement {other:?}"),
        };
    }
    if let Some(s) = o.shots {
        cfg.shots_per_pauli = s;
    }
    if let Some(s) = o.sweeps {
        cfg.n_sweeps = s;
    }
    if let Some(vs) = &o.strategies {
        cfg.strategies = vs.iter().map(|&v| StrategyConfig::new(v)).collect();
    }
    for s in &mut cfg.strategies {
        if let Some(t) = o.tau {
            s.tau = t;
        }
        if let Some(p) = o.period {
            s.stabilization_period = p;
        }
    }
    if let Some(s) = &o.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(out) = &o.out {
        cfg.output_dir = out.clone();
    }
    if let Some(k) = o.record_every {
        cfg.record_every = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = resolve(&args.overrides)?;
    let res = run_experiment(&cfg)?;
    println!(
        "wrote {} rows to {} (E_GS = {:.12})",
        res.rows.len(),
        cfg.output_dir.display(),
        res.gs_energy
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let base = resolve(&args.overrides)?;
    let grid = SweepGrid {
        qubits: args.grid_qubits,
        layers: args.grid_layers.unwrap_or_else(|| vec![base.n_layers]),
        shots: args.grid_shots,
    };
    for p in run_sweep(&base, &grid)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<bool> {
    let outcomes = run_suite(args.reps, args.seed)?;
    for o in &outcomes {
        println!("{o}");
    }
    Ok(outcomes.iter().all(|o| o.passed))
}

fn gs(args: ModelArgs) -> Result<()> {
    let mut c = args.model.default_couplings();
    if let Some(j) = args.j {
        c.j = j;
    }
    if let Some(h) = args.h {
        c.h = h;
    }
    if let Some(d) = args.delta {
        c.delta = d;
    }
    let h = build_hamiltonian(args.model, args.qubits, c)?;
    let gt = ground_truth(&h, DEFAULT_DEGENERACY_TOL)?;
    println!("{:.12}", gt.gs_energy());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Validate(a) => validate(a),
        Command::Gs(a) => gs(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
