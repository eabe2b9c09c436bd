//! The SMO sweep loop and its four strategies.
//!
//! Each step optimizes one direction `d = t mod D`: it measures the energy at
//! `θ ± (2π/3) e_d`, fits the sinusoid through those two values and a reused
//! value at `θ`, and jumps to the fitted minimizer. The strategies differ only
//! in what value is reused and what estimate is carried into the next step:
//!
//! * `Biased` reuses the previous fitted minimum as is.
//! * `Stabilized` does the same but re-measures the energy at `θ` on every
//!   `N_p`-th step.
//! * `Corrected` carries the fitted minimum plus `2σ̂_b²/R̂`.
//! * `Regularized` reuses the corrected estimate lowered by `r(t)`, takes the
//!   minimizer of that fit, then carries an estimate with the `-r` injection
//!   removed and its own minimization bias corrected.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, ParameterVector};
use crate::error::{Error, Result};
use crate::fit::{bias_estimate, fit_trig, propagate_offset, DEFAULT_SNR_THRESHOLD, SHIFT};
use crate::hamiltonian::Hamiltonian;
use crate::measurement::{measure, pooled_subspace_variance, ShotBudgetLedger, ShotMode};
use crate::statevector::{exact_expectation, Statevector};

/// Random stream used by every optimization run.
pub type RunRng = ChaCha8Rng;

pub const DEFAULT_STABILIZATION_PERIOD: usize = 32;
pub const DEFAULT_TAU: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    Biased,
    Stabilized,
    Corrected,
    Regularized,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Biased,
        Variant::Stabilized,
        Variant::Corrected,
        Variant::Regularized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Biased => "BIASED",
            Variant::Stabilized => "STABILIZED",
            Variant::Corrected => "CORRECTED",
            Variant::Regularized => "REGULARIZED",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub variant: Variant,
    /// Re-measurement period N_p (stabilized only).
    #[serde(default = "default_period")]
    pub stabilization_period: usize,
    /// Regularization exponent τ (regularized only).
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_snr")]
    pub snr_threshold: f64,
}

fn default_period() -> usize {
    DEFAULT_STABILIZATION_PERIOD
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

fn default_snr() -> f64 {
    DEFAULT_SNR_THRESHOLD
}

impl StrategyConfig {
    pub fn new(variant: Variant) -> Self {
        StrategyConfig {
            variant,
            stabilization_period: DEFAULT_STABILIZATION_PERIOD,
            tau: DEFAULT_TAU,
            snr_threshold: DEFAULT_SNR_THRESHOLD,
        }
    }

    /// Column label: the variant name.
    pub fn label(&self) -> &'static str {
        self.variant.name()
    }

    pub fn validate(&self) -> Result<()> {
        if self.stabilization_period == 0 {
            return Err(Error::InvalidInput(
                "stabilization period must be >= 1".into(),
            ));
        }
        if !self.tau.is_finite() {
            return Err(Error::InvalidInput(format!(
                "tau {} is not finite",
                self.tau
            )));
        }
        if !self.snr_threshold.is_finite() || self.snr_threshold <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "snr threshold {} must be positive",
                self.snr_threshold
            )));
        }
        Ok(())
    }
}

/// `r = e^τ / N_pauli · √(t / n_q) · (1 - e^{-2t/T})`
pub fn regularization_strength(
    t: usize,
    total_steps: usize,
    n_qubits: usize,
    shots_per_pauli: u64,
    tau: f64,
) -> f64 {
    if t == 0 || total_steps == 0 || n_qubits == 0 || shots_per_pauli == 0 {
        return 0.0;
    }
    let t = t as f64;
    tau.exp() / shots_per_pauli as f64
        * (t / n_qubits as f64).sqrt()
        * -(-2.0 * t / total_steps as f64).exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub theta: ParameterVector,
    /// The value reused by the next step, with any correction already applied.
    pub carried_estimate: f64,
    pub carried_is_measured: bool,
    /// Completed steps.
    pub t: usize,
    pub total_steps: usize,
    pub ledger: ShotBudgetLedger,
}

impl OptimizerState {
    /// Direction optimized by the next step.
    pub fn direction(&self) -> usize {
        self.t % self.theta.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Step number, `1..=T`.
    pub t: usize,
    pub d: usize,
    /// Carried estimate f̂ after this step.
    pub estimate: f64,
    /// Exact energy at the updated parameters.
    pub true_energy: f64,
    pub regularization_r: f64,
    /// Correction added to the fitted minimum before carrying it.
    pub bias_correction: f64,
    pub cumulative_shots: u64,
}

pub type Trajectory = Vec<IterationRecord>;

/// Everything a run needs besides the random stream.
#[derive(Debug, Clone)]
pub struct Optimizer<'a> {
    hamiltonian: &'a Hamiltonian,
    ansatz: AnsatzSpec,
    strategy: StrategyConfig,
    mode: ShotMode,
    total_steps: usize,
}

impl<'a> Optimizer<'a> {
    pub fn new(
        hamiltonian: &'a Hamiltonian,
        ansatz: AnsatzSpec,
        strategy: StrategyConfig,
        mode: ShotMode,
        n_sweeps: usize,
    ) -> Result<Self> {
        if hamiltonian.n_qubits() != ansatz.n_qubits() {
            return Err(Error::Dimension {
                expected: hamiltonian.n_qubits(),
                actual: ansatz.n_qubits(),
            });
        }
        strategy.validate()?;
        mode.validate()?;
        Ok(Optimizer {
            hamiltonian,
            ansatz,
            strategy,
            mode,
            total_steps: ansatz.n_params() * n_sweeps,
        })
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    pub fn strategy(&self) -> &StrategyConfig {
        &self.strategy
    }

    fn prepare(&self, theta: &ParameterVector) -> Result<Statevector> {
        self.ansatz.prepare(theta)
    }

    fn measure_at(
        &self,
        theta: &ParameterVector,
        ledger: &mut ShotBudgetLedger,
        rng: &mut RunRng,
    ) -> Result<crate::measurement::EnergyMeasurement> {
        let m = measure(self.hamiltonian, &self.prepare(theta)?, self.mode, rng)?;
        ledger.record(&m);
        Ok(m)
    }

    /// Samples `θ₀` uniformly and measures its energy.
    pub fn init(&self, rng: &mut RunRng) -> Result<OptimizerState> {
        let theta = ParameterVector::random(self.ansatz.n_params(), rng);
        let mut ledger = ShotBudgetLedger::default();
        let m = self.measure_at(&theta, &mut ledger, rng)?;
        Ok(OptimizerState {
            theta,
            carried_estimate: m.value,
            carried_is_measured: true,
            t: 0,
            total_steps: self.total_steps,
            ledger,
        })
    }

    fn regularization(&self, step: usize) -> f64 {
        match (self.strategy.variant, self.mode.shots_per_pauli()) {
            (Variant::Regularized, Some(spp)) => regularization_strength(
                step,
                self.total_steps,
                self.ansatz.n_qubits(),
                spp,
                self.strategy.tau,
            ),
            _ => 0.0,
        }
    }

    /// One SMO update. Returns the record and the prepared state at the new point.
    pub fn step(
        &self,
        state: &mut OptimizerState,
        rng: &mut RunRng,
    ) -> Result<(IterationRecord, Statevector)> {
        if state.t >= self.total_steps {
            return Err(Error::IterationComplete(self.total_steps));
        }
        let d = state.direction();
        let step = state.t + 1;

        let plus = self.measure_at(&state.theta.shifted(d, SHIFT), &mut state.ledger, rng)?;
        let minus = self.measure_at(&state.theta.shifted(d, -SHIFT), &mut state.ledger, rng)?;

        let variant = self.strategy.variant;
        // without shot noise the fitted minimum already equals the energy at θ
        let reanchor = variant == Variant::Stabilized
            && self.mode != ShotMode::Infinite
            && step.is_multiple_of(self.strategy.stabilization_period);
        if reanchor {
            let m = self.measure_at(&state.theta, &mut state.ledger, rng)?;
            state.carried_estimate = m.value;
            state.carried_is_measured = true;
        }
        let r = self.regularization(step);
        let reused = state.carried_estimate - r;

        let sigma_sq = pooled_subspace_variance(&plus, &minus)?;
        let fit = fit_trig(reused, plus.value, minus.value, sigma_sq)?;
        let new_angle = state.theta.get(d) + fit.theta_min;
        state.theta.set(d, new_angle);

        let correction = match variant {
            Variant::Biased | Variant::Stabilized => 0.0,
            Variant::Corrected | Variant::Regularized => {
                bias_estimate(&fit, self.strategy.snr_threshold)?.correction()
            }
        };
        // undo the known -r injection on the fitted curve at the chosen angle
        let deregularized = fit.f_min + (-propagate_offset(-r)).evaluate(fit.theta_min);
        state.carried_estimate = deregularized + correction;
        state.carried_is_measured = false;
        state.t = step;

        let psi = self.prepare(&state.theta)?;
        let record = IterationRecord {
            t: step,
            d,
            estimate: state.carried_estimate,
            true_energy: exact_expectation(self.hamiltonian, &psi)?,
            regularization_r: r,
            bias_correction: correction,
            cumulative_shots: state.ledger.cumulative_shots,
        };
        Ok((record, psi))
    }

    /// Runs all `T` steps from `seed`, handing every step to `observe`.
    pub fn run_with<F>(&self, seed: u64, mut observe: F) -> Result<OptimizerState>
    where
        F: FnMut(&OptimizerState, &IterationRecord, &Statevector) -> Result<()>,
    {
        let mut rng = RunRng::seed_from_u64(seed);
        let mut state = self.init(&mut rng)?;
        while state.t < self.total_steps {
            let (record, psi) = self.step(&mut state, &mut rng)?;
            observe(&state, &record, &psi)?;
        }
        Ok(state)
    }
}

/// Single step in free-function form.
pub fn smo_step(
    state: &mut OptimizerState,
    hamiltonian: &Hamiltonian,
    ansatz: AnsatzSpec,
    strategy: StrategyConfig,
    mode: ShotMode,
    rng: &mut RunRng,
) -> Result<IterationRecord> {
    let n_sweeps = state.total_steps.div_ceil(ansatz.n_params());
    let mut opt = Optimizer::new(hamiltonian, ansatz, strategy, mode, n_sweeps)?;
    opt.total_steps = state.total_steps;
    opt.step(state, rng).map(|(r, _)| r)
}

/// Runs `D · n_sweeps` steps and returns every record.
pub fn run_optimization(
    hamiltonian: &Hamiltonian,
    ansatz: AnsatzSpec,
    strategy: StrategyConfig,
    mode: ShotMode,
    n_sweeps: usize,
    seed: u64,
) -> Result<Trajectory> {
    let opt = Optimizer::new(hamiltonian, ansatz, strategy, mode, n_sweeps)?;
    let mut out = Vec::with_capacity(opt.total_steps());
    opt.run_with(seed, |_, rec, _| {
        out.push(*rec);
        Ok(())
    })?;
    Ok(out)
}
