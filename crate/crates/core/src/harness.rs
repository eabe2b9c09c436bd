//! Experiment driver: seed ensembles over optimizer strategies, metrics and CSV output.
//!
//! Metrics CSV columns:
//! `seed,strategy,t,d,estimate,true_energy,delta_energy,delta_fidelity,estimate_error,regularization_r,cumulative_shots`
//!
//! Aggregate CSV columns: `strategy,t,n` followed by `_mean`, `_std` and
//! `_median` for each of `delta_energy`, `delta_fidelity` and `estimate_error`.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::ansatz::AnsatzSpec;
use crate::error::{Error, Result};
use crate::ground::{fidelity_to_gs, ground_truth, GroundTruth, DEFAULT_DEGENERACY_TOL};
use crate::hamiltonian::{build_hamiltonian, Couplings, Hamiltonian, Model, MAX_DENSE_QUBITS};
use crate::measurement::ShotMode;
use crate::optimizer::{Optimizer, StrategyConfig, Variant};

pub const METRICS_HEADER: [&str; 11] = [
    "seed",
    "strategy",
    "t",
    "d",
    "estimate",
    "true_energy",
    "delta_energy",
    "delta_fidelity",
    "estimate_error",
    "regularization_r",
    "cumulative_shots",
];

pub const AGGREGATE_HEADER: [&str; 12] = [
    "strategy",
    "t",
    "n",
    "delta_energy_mean",
    "delta_energy_std",
    "delta_energy_median",
    "delta_fidelity_mean",
    "delta_fidelity_std",
    "delta_fidelity_median",
    "estimate_error_mean",
    "estimate_error_std",
    "estimate_error_median",
];

pub const METRICS_FILE: &str = "metrics.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "SMOVQE_THREADS";

/// How energies are sampled during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measurement {
    Binomial,
    Gaussian,
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model: Model,
    pub couplings: Couplings,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub measurement: Measurement,
    pub shots_per_pauli: u64,
    pub n_sweeps: usize,
    pub strategies: Vec<StrategyConfig>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Keep every k-th iteration (the final one is always kept).
    pub record_every: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: Model::Tfim,
            couplings: Model::Tfim.default_couplings(),
            n_qubits: 5,
            n_layers: 3,
            measurement: Measurement::Binomial,
            shots_per_pauli: 100,
            n_sweeps: 200,
            strategies: Variant::ALL.into_iter().map(StrategyConfig::new).collect(),
            seeds: (0..100).collect(),
            output_dir: PathBuf::new(),
            record_every: 1,
        }
    }
}

fn take<T: DeserializeOwned>(obj: &mut Map<String, Value>, key: &str) -> Result<Option<T>> {
    match obj.remove(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v)
            .map(Some)
            .map_err(|e| Error::config(key, e.to_string())),
    }
}

impl ExperimentConfig {
    const KEYS: [&'static str; 11] = [
        "model",
        "couplings",
        "n_qubits",
        "n_layers",
        "measurement",
        "shots_per_pauli",
        "n_sweeps",
        "strategies",
        "seeds",
        "output_dir",
        "record_every",
    ];

    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg = Self::parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without validating, so callers can apply overrides first.
    /// Missing keys take the defaults; `couplings` defaults to the model's own.
    pub fn parse_json(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("config JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(Error::Parse("config must be a JSON object".into()));
        };
        if let Some(k) = obj.keys().find(|k| !Self::KEYS.contains(&k.as_str())) {
            return Err(Error::config(k.clone(), "unknown field"));
        }
        let mut cfg = ExperimentConfig::default();
        if let Some(m) = take::<Model>(&mut obj, "model")? {
            cfg.model = m;
            cfg.couplings = m.default_couplings();
        }
        if let Some(c) = take::<Value>(&mut obj, "couplings")? {
            // partial coupling objects fill in from the model defaults
            let Value::Object(c) = c else {
                return Err(Error::config("couplings", "expected an object"));
            };
            for (k, v) in c {
                let x: f64 = serde_json::from_value(v)
                    .map_err(|e| Error::config(format!("couplings.{k}"), e.to_string()))?;
                match k.as_str() {
                    "j" => cfg.couplings.j = x,
                    "h" => cfg.couplings.h = x,
                    "delta" => cfg.couplings.delta = x,
                    _ => return Err(Error::config(format!("couplings.{k}"), "unknown field")),
                }
            }
        }
        macro_rules! field {
            ($name:ident) => {
                if let Some(v) = take(&mut obj, stringify!($name))? {
                    cfg.$name = v;
                }
            };
        }
        field!(n_qubits);
        field!(n_layers);
        field!(measurement);
        field!(shots_per_pauli);
        field!(n_sweeps);
        field!(strategies);
        field!(seeds);
        field!(output_dir);
        field!(record_every);
        Ok(cfg)
    }

    /// Reads a config file without validating it.
    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_json(&text).map_err(|e| match e {
            Error::Config { field, reason } => {
                Error::config(field, format!("{reason} (in {})", path.display()))
            }
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let cfg = Self::read_file(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn shot_mode(&self) -> ShotMode {
        match self.measurement {
            Measurement::Binomial => ShotMode::Binomial {
                shots_per_pauli: self.shots_per_pauli,
            },
            Measurement::Gaussian => ShotMode::Gaussian {
                shots_per_pauli: self.shots_per_pauli,
            },
            Measurement::Infinite => ShotMode::Infinite,
        }
    }

    pub fn ansatz(&self) -> Result<AnsatzSpec> {
        AnsatzSpec::new(self.n_qubits, self.n_layers)
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        build_hamiltonian(self.model, self.n_qubits, self.couplings)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::config(
                "n_qubits",
                format!("must lie in 1..={MAX_DENSE_QUBITS}"),
            ));
        }
        let c = self.couplings;
        if ![c.j, c.h, c.delta].iter().all(|x| x.is_finite()) {
            return Err(Error::config("couplings", "values must be finite"));
        }
        if self.measurement != Measurement::Infinite {
            self.shot_mode()
                .validate()
                .map_err(|e| Error::config("shots_per_pauli", e.to_string()))?;
        }
        if self.n_sweeps == 0 {
            return Err(Error::config("n_sweeps", "must be positive"));
        }
        if self.strategies.is_empty() {
            return Err(Error::config("strategies", "list is empty"));
        }
        let mut variants = HashSet::new();
        for s in &self.strategies {
            s.validate()
                .map_err(|e| Error::config("strategies", e.to_string()))?;
            if !variants.insert(s.variant) {
                return Err(Error::config(
                    "strategies",
                    format!("{} listed twice", s.variant),
                ));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "list is empty"));
        }
        let mut seen = HashSet::new();
        if let Some(s) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::config("seeds", format!("seed {s} repeated")));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::config(
                "output_dir",
                "an output directory is required",
            ));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub strategy: Variant,
    pub t: usize,
    pub d: usize,
    pub estimate: f64,
    pub true_energy: f64,
    pub delta_energy: f64,
    pub delta_fidelity: f64,
    pub estimate_error: f64,
    pub regularization_r: f64,
    pub cumulative_shots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation, zero for a single value.
    pub std: f64,
    pub median: f64,
}

impl Summary {
    /// Order-independent: values are sorted before summation.
    pub fn of(values: &mut [f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let median = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        Some(Summary { mean, std, median })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub strategy: Variant,
    pub t: usize,
    pub n: usize,
    pub delta_energy: Summary,
    pub delta_fidelity: Summary,
    pub estimate_error: Summary,
}

/// Groups rows by (strategy, t), ordered by strategy then iteration.
pub fn aggregate(rows: &[MetricsRow]) -> Result<Vec<AggregateRow>> {
    if rows.is_empty() {
        return Err(Error::Empty("no metrics rows to aggregate".into()));
    }
    let mut groups: BTreeMap<(usize, usize), Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        let rank = Variant::ALL.iter().position(|v| *v == r.strategy).unwrap();
        groups.entry((rank, r.t)).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((rank, t), g)| {
            let col = |f: fn(&MetricsRow) -> f64| {
                let mut v: Vec<f64> = g.iter().map(|r| f(r)).collect();
                Summary::of(&mut v).unwrap()
            };
            AggregateRow {
                strategy: Variant::ALL[rank],
                t,
                n: g.len(),
                delta_energy: col(|r| r.delta_energy),
                delta_fidelity: col(|r| r.delta_fidelity),
                estimate_error: col(|r| r.estimate_error),
            }
        })
        .collect())
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_metrics_csv<W: Write>(out: W, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Parse(format!("csv write: {e}"));
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.strategy.name().to_string(),
            r.t.to_string(),
            r.d.to_string(),
            fmt_f(r.estimate),
            fmt_f(r.true_energy),
            fmt_f(r.delta_energy),
            fmt_f(r.delta_fidelity),
            fmt_f(r.estimate_error),
            fmt_f(r.regularization_r),
            r.cumulative_shots.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::Parse(format!("csv write: {e}")))
}

pub fn write_aggregate_csv<W: Write>(out: W, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Parse(format!("csv write: {e}"));
    w.write_record(AGGREGATE_HEADER).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![
            r.strategy.name().to_string(),
            r.t.to_string(),
            r.n.to_string(),
        ];
        for s in [r.delta_energy, r.delta_fidelity, r.estimate_error] {
            rec.extend([fmt_f(s.mean), fmt_f(s.std), fmt_f(s.median)]);
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::Parse(format!("csv write: {e}")))
}

/// Parses a metrics CSV; the header must match exactly.
pub fn read_metrics_csv<R: Read>(input: R) -> Result<Vec<MetricsRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Empty("metrics CSV has no header".into()))?
        .map_err(|e| Error::Parse(format!("metrics CSV: {e}")))?;
    if header.iter().ne(METRICS_HEADER) {
        return Err(Error::Parse(format!(
            "metrics CSV header mismatch: {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse(format!("metrics CSV line {line}: {e}")))?;
        if rec.len() != METRICS_HEADER.len() {
            return Err(Error::Parse(format!(
                "metrics CSV line {line}: {} fields",
                rec.len()
            )));
        }
        fn num<T: std::str::FromStr>(s: &str, col: &str, line: usize) -> Result<T> {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("metrics CSV line {line}: bad {col} {s:?}")))
        }
        let f = |k: usize| num::<f64>(&rec[k], METRICS_HEADER[k], line);
        rows.push(MetricsRow {
            seed: num(&rec[0], "seed", line)?,
            strategy: rec[1]
                .parse()
                .map_err(|e| Error::Parse(format!("metrics CSV line {line}: {e}")))?,
            t: num(&rec[2], "t", line)?,
            d: num(&rec[3], "d", line)?,
            estimate: f(4)?,
            true_energy: f(5)?,
            delta_energy: f(6)?,
            delta_fidelity: f(7)?,
            estimate_error: f(8)?,
            regularization_r: f(9)?,
            cumulative_shots: num(&rec[10], "cumulative_shots", line)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub gs_energy: f64,
    pub rows: Vec<MetricsRow>,
    pub aggregate: Vec<AggregateRow>,
}

fn run_cell(
    cfg: &ExperimentConfig,
    h: &Hamiltonian,
    gt: &GroundTruth,
    seed: u64,
    strategy: StrategyConfig,
) -> Result<Vec<MetricsRow>> {
    let opt = Optimizer::new(h, cfg.ansatz()?, strategy, cfg.shot_mode(), cfg.n_sweeps)?;
    let total = opt.total_steps();
    let mut rows = Vec::with_capacity(total / cfg.record_every + 1);
    opt.run_with(seed, |_, rec, psi| {
        if rec.t % cfg.record_every == 0 || rec.t == total {
            let delta_energy = rec.true_energy - gt.gs_energy();
            let delta_fidelity = (1.0 - fidelity_to_gs(psi, gt)?).clamp(0.0, 1.0);
            rows.push(MetricsRow {
                seed,
                strategy: strategy.variant,
                t: rec.t,
                d: rec.d,
                estimate: rec.estimate,
                true_energy: rec.true_energy,
                delta_energy,
                delta_fidelity,
                estimate_error: rec.estimate - rec.true_energy,
                regularization_r: rec.regularization_r,
                cumulative_shots: rec.cumulative_shots,
            });
        }
        Ok(())
    })?;
    Ok(rows)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("{THREADS_ENV}={v:?} is not a count")))?;
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))
}

/// Runs every (seed, strategy) cell and aggregates, without touching disk.
///
/// Each cell's random stream is seeded by its seed alone, so all strategies
/// start from the same `θ₀`. Rows come back seed-major, in config order.
pub fn simulate(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let h = cfg.hamiltonian()?;
    let gt = ground_truth(&h, DEFAULT_DEGENERACY_TOL)?;
    let cells: Vec<(u64, StrategyConfig)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| cfg.strategies.iter().map(move |&st| (s, st)))
        .collect();
    let per_cell: Vec<Result<Vec<MetricsRow>>> = thread_pool()?.install(|| {
        cells
            .par_iter()
            .map(|&(seed, st)| run_cell(cfg, &h, &gt, seed, st))
            .collect()
    });
    let mut rows = Vec::new();
    for cell in per_cell {
        rows.extend(cell?);
    }
    let aggregate = aggregate(&rows)?;
    Ok(ExperimentResult {
        gs_energy: gt.gs_energy(),
        rows,
        aggregate,
    })
}

fn create_file(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes `metrics.csv`, `aggregate.csv` and the resolved `config.json` into `dir`.
pub fn write_results(dir: &Path, cfg: &ExperimentConfig, result: &ExperimentResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_metrics_csv(create_file(&dir.join(METRICS_FILE))?, &result.rows)?;
    write_aggregate_csv(create_file(&dir.join(AGGREGATE_FILE))?, &result.aggregate)?;
    let cfg_path = dir.join("config.json");
    fs::write(&cfg_path, cfg.to_json() + "\n").map_err(|e| Error::io(&cfg_path, e))
}

/// Simulates and writes into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let result = simulate(cfg)?;
    write_results(&cfg.output_dir, cfg, &result)?;
    Ok(result)
}

/// A grid of experiments sharing everything but size and shot count.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub qubits: Vec<usize>,
    pub layers: Vec<usize>,
    pub shots: Vec<u64>,
}

impl SweepGrid {
    /// Qubits {5, 7, 10} by shots {50, 100, 150, 200} at the base layer count.
    pub fn standard(base: &ExperimentConfig) -> Self {
        SweepGrid {
            qubits: vec![5, 7, 10],
            layers: vec![base.n_layers],
            shots: vec![50, 100, 150, 200],
        }
    }

    /// Point configs, each writing to its own subdirectory of the base output.
    pub fn configs(&self, base: &ExperimentConfig) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &nq in &self.qubits {
            for &nl in &self.layers {
                for &spp in &self.shots {
                    let mut c = base.clone();
                    c.n_qubits = nq;
                    c.n_layers = nl;
                    c.shots_per_pauli = spp;
                    c.output_dir = base.output_dir.join(format!("nq{nq}_nl{nl}_spp{spp}"));
                    out.push(c);
                }
            }
        }
        out
    }
}

/// Runs every grid point in order; returns the aggregate file paths.
pub fn run_sweep(base: &ExperimentConfig, grid: &SweepGrid) -> Result<Vec<PathBuf>> {
    let configs = grid.configs(base);
    if configs.is_empty() {
        return Err(Error::config("grid", "sweep grid is empty"));
    }
    let mut paths = Vec::new();
    for cfg in configs {
        run_experiment(&cfg)?;
        paths.push(cfg.output_dir.join(AGGREGATE_FILE));
    }
    Ok(paths)
}
