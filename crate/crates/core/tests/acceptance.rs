//! Acceptance criteria A1-A11. Each test prints one `PASS`/`FAIL` line.

use std::io::Write;

use smovqe_core::ansatz::AnsatzSpec;
use smovqe_core::ground::{ground_truth, DEFAULT_DEGENERACY_TOL};
use smovqe_core::hamiltonian::{build_hamiltonian, Model};
use smovqe_core::harness::{simulate, ExperimentConfig, Measurement, MetricsRow};
use smovqe_core::measurement::ShotMode;
use smovqe_core::optimizer::{run_optimization, Optimizer, RunRng, StrategyConfig, Variant};
use smovqe_core::statevector::exact_expectation;
use smovqe_core::validation::{
    covariance_law, exact_fit_oracle, harmonic_bias, minimum_bias, offset_propagation,
    shot_scaling, CheckOutcome,
};

use rand::SeedableRng;

/// Bypasses the test harness capture so the line always reaches the log.
fn report(id: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{id} {tag}: {detail}").unwrap();
    out.flush().unwrap();
    assert!(passed, "{id} failed: {detail}");
}

fn report_all(id: &str, checks: &[CheckOutcome]) {
    let passed = checks.iter().all(|c| c.passed);
    let detail = checks
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join("; ");
    report(id, passed, &detail);
}

const REPS: usize = 100_000;

#[test]
fn a01_exact_fit() {
    report_all("A1", &[exact_fit_oracle(1000, 1_000_000, 101).unwrap()]);
}

#[test]
fn a02_covariance_law() {
    report_all("A2", &[covariance_law(REPS, 0.1, 102).unwrap()]);
}

#[test]
fn a03_minimum_bias() {
    report_all(
        "A3",
        &[
            minimum_bias(10.0, REPS, 0.10, 103).unwrap(),
            minimum_bias(20.0, REPS, 0.10, 104).unwrap(),
            minimum_bias(5.0, REPS, 0.30, 105).unwrap(),
        ],
    );
}

#[test]
fn a04_offset_propagation() {
    report_all("A4", &[offset_propagation(100, 106).unwrap()]);
}

#[test]
fn a05_second_harmonic_bias() {
    report_all("A5", &[harmonic_bias(10.0, REPS, 0.15, 107).unwrap()]);
}

fn tfim_ensemble(
    variants: &[Variant],
    seeds: u64,
    sweeps: usize,
    record_every: usize,
) -> Vec<MetricsRow> {
    let cfg = ExperimentConfig {
        model: Model::Tfim,
        couplings: Model::Tfim.default_couplings(),
        n_qubits: 5,
        n_layers: 3,
        measurement: Measurement::Binomial,
        shots_per_pauli: 100,
        n_sweeps: sweeps,
        strategies: variants.iter().map(|&v| StrategyConfig::new(v)).collect(),
        seeds: (0..seeds).collect(),
        output_dir: "unused".into(),
        record_every,
    };
    simulate(&cfg).unwrap().rows
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[test]
fn a06_corrected_estimator_unbiased() {
    let (seeds, sweeps) = (50u64, 50usize);
    let d = AnsatzSpec::new(5, 3).unwrap().n_params();
    let window_start = d * (sweeps - 10);
    let rows = tfim_ensemble(&[Variant::Biased, Variant::Corrected], seeds, sweeps, 1);
    let per_seed = |v: Variant| -> Vec<f64> {
        (0..seeds)
            .map(|s| {
                let w: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.strategy == v && r.seed == s && r.t > window_start)
                    .map(|r| r.estimate_error)
                    .collect();
                w.iter().sum::<f64>() / w.len() as f64
            })
            .collect()
    };
    let (mc, sc) = mean_se(&per_seed(Variant::Corrected));
    let (mb, sb) = mean_se(&per_seed(Variant::Biased));
    let unbiased = mc.abs() <= 3.0 * sc;
    let dominated = mb < 0.0 && mb.abs() > 5.0 * mc.abs();
    report(
        "A6",
        unbiased && dominated,
        &format!(
            "CORRECTED mean error {mc:+.4} (SE {sc:.4}, {:+.2} SE, need within 3); \
             BIASED {mb:+.4} (SE {sb:.4}), ratio |B|/|C| {:.1} (need > 5)",
            mc / sc,
            mb.abs() / mc.abs()
        ),
    );
}

#[test]
fn a07_regularization_ordering() {
    // the ensemble size the reference experiments average over
    let (seeds, sweeps) = (100u64, 100usize);
    let variants = [Variant::Regularized, Variant::Biased, Variant::Corrected];
    let total = AnsatzSpec::new(5, 3).unwrap().n_params() * sweeps;
    let rows = tfim_ensemble(&variants, seeds, sweeps, total);
    let medians = |f: fn(&MetricsRow) -> f64| -> Vec<f64> {
        variants
            .iter()
            .map(|&v| {
                median(
                    rows.iter()
                        .filter(|r| r.strategy == v && r.t == total)
                        .map(f)
                        .collect(),
                )
            })
            .collect()
    };
    let de = medians(|r| r.delta_energy);
    let df = medians(|r| r.delta_fidelity);
    let ordered = |m: &[f64]| m[0] < m[1] && m[1] < m[2];
    report(
        "A7",
        ordered(&de) && ordered(&df),
        &format!(
            "median final dE REG {:.4} BIASED {:.4} CORRECTED {:.4}; \
             median final dF REG {:.4} BIASED {:.4} CORRECTED {:.4} (need REG < BIASED < CORRECTED)",
            de[0], de[1], de[2], df[0], df[1], df[2]
        ),
    );
}

#[test]
fn a08_ground_truth_oracles() {
    let tfim = |n| build_hamiltonian(Model::Tfim, n, Model::Tfim.default_couplings()).unwrap();
    let e1 = ground_truth(&tfim(1), DEFAULT_DEGENERACY_TOL)
        .unwrap()
        .gs_energy();
    let e2 = ground_truth(&tfim(2), DEFAULT_DEGENERACY_TOL)
        .unwrap()
        .gs_energy();
    let d = AnsatzSpec::new(5, 3).unwrap().n_params();
    report(
        "A8",
        e1 == -1.0 && (e2 + 5f64.sqrt()).abs() < 1e-10 && d == 40,
        &format!(
            "E(1) = {e1}, E(2) + sqrt5 = {:.1e}, D(5,3) = {d}",
            e2 + 5f64.sqrt()
        ),
    );
}

#[test]
fn a09_noiseless_monotone_and_identical() {
    let (nq, sweeps, seed) = (4, 20, 9);
    let ansatz = AnsatzSpec::new(nq, 3).unwrap();
    let mut worst_rise = f64::NEG_INFINITY;
    let mut identical = true;
    for model in Model::ALL {
        let h = build_hamiltonian(model, nq, model.default_couplings()).unwrap();
        let opt = Optimizer::new(
            &h,
            ansatz,
            StrategyConfig::new(Variant::Biased),
            ShotMode::Infinite,
            sweeps,
        )
        .unwrap();
        let theta0 = opt.init(&mut RunRng::seed_from_u64(seed)).unwrap().theta;
        let e0 = exact_expectation(&h, &ansatz.prepare(&theta0).unwrap()).unwrap();
        let runs: Vec<_> = Variant::ALL
            .iter()
            .map(|&v| {
                run_optimization(
                    &h,
                    ansatz,
                    StrategyConfig::new(v),
                    ShotMode::Infinite,
                    sweeps,
                    seed,
                )
                .unwrap()
            })
            .collect();
        identical &= runs.iter().all(|r| r == &runs[0]);
        let mut prev = e0;
        for rec in &runs[0] {
            worst_rise = worst_rise.max(rec.true_energy - prev);
            prev = rec.true_energy;
        }
    }
    report(
        "A9",
        worst_rise <= 1e-10 && identical,
        &format!("largest single-step energy rise {worst_rise:.2e} (<= 1e-10), strategies bit-identical: {identical}"),
    );
}

#[test]
fn a10_budget_accounting() {
    let h = build_hamiltonian(Model::Tfim, 5, Model::Tfim.default_couplings()).unwrap();
    let ansatz = AnsatzSpec::new(5, 3).unwrap();
    let (spp, sweeps, np) = (100u64, 8usize, 32usize);
    let n_p = h.n_terms() as u64;
    let run = |v: Variant| {
        let s = StrategyConfig {
            stabilization_period: np,
            ..StrategyConfig::new(v)
        };
        run_optimization(&h, ansatz, s, ShotMode::binomial(spp), sweeps, 5)
            .unwrap()
            .last()
            .unwrap()
            .cumulative_shots
    };
    let t = (ansatz.n_params() * sweeps) as u64;
    let biased = run(Variant::Biased);
    let stabilized = run(Variant::Stabilized);
    let want_b = (2 * t + 1) * spp * n_p;
    let extra = (t / np as u64) * spp * n_p;
    let fraction = extra as f64 / (stabilized - extra) as f64;
    report(
        "A10",
        biased == want_b && stabilized == want_b + extra,
        &format!(
            "T={t}: BIASED {biased} (expect {want_b}), STABILIZED {stabilized} (expect {}); \
             overhead fraction {fraction:.5} vs 1/(2N_p+1) = {:.5}",
            want_b + extra,
            1.0 / (2.0 * np as f64 + 1.0)
        ),
    );
}

#[test]
fn a11_shot_noise_scaling() {
    report_all("A11", &[shot_scaling(REPS, 0.05, 111).unwrap()]);
}
