//! Finite-shot energy estimation.
//!
//! Every Pauli term is measured independently with the same number of shots.
//! A term with expectation `p` yields `+1` with probability `(1 + p) / 2`, so
//! the number of `+1` outcomes is binomial. The reported variance is the
//! unbiased (`N - 1`) sample variance of the outcomes, propagated through the
//! coefficients.

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::statevector::{exact_expectation, Statevector};

/// How energies are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShotMode {
    /// Exact expectation, zero variance.
    Infinite,
    /// Binomial sampling of each Pauli term.
    Binomial { shots_per_pauli: u64 },
    /// Exact mean plus Gaussian noise with the analytic shot variance.
    Gaussian { shots_per_pauli: u64 },
}

impl ShotMode {
    pub fn binomial(shots_per_pauli: u64) -> Self {
        ShotMode::Binomial { shots_per_pauli }
    }

    /// Shots per Pauli term, `None` in infinite-shot mode.
    pub fn shots_per_pauli(&self) -> Option<u64> {
        match *self {
            ShotMode::Infinite => None,
            ShotMode::Binomial { shots_per_pauli } | ShotMode::Gaussian { shots_per_pauli } => {
                Some(shots_per_pauli)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.shots_per_pauli() {
            Some(0) => Err(Error::Budget("shots_per_pauli must be positive".into())),
            Some(1) => Err(Error::Budget(
                "shots_per_pauli = 1 leaves the sample variance undefined".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// One energy estimate with its estimated variance and shot cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyMeasurement {
    pub value: f64,
    pub variance: f64,
    pub shots_total: u64,
    /// Zero in infinite-shot mode.
    pub shots_per_pauli: u64,
}

impl EnergyMeasurement {
    pub fn is_finite_shot(&self) -> bool {
        self.shots_per_pauli > 0
    }
}

/// Samples a finite-shot estimate of `<ψ|H|ψ>` by per-term binomial draws.
pub fn measure_energy<R: Rng + ?Sized>(
    h: &Hamiltonian,
    psi: &Statevector,
    shots_per_pauli: u64,
    rng: &mut R,
) -> Result<EnergyMeasurement> {
    ShotMode::binomial(shots_per_pauli).validate()?;
    psi.check_dim(h.dim())?;
    let n = shots_per_pauli;
    let nf = n as f64;
    let mut value = 0.0;
    let mut variance = 0.0;
    for term in h.terms() {
        let c = term.coefficient();
        if term.is_identity() {
            value += c;
            continue;
        }
        let p = psi.pauli_expectation(term)?;
        let prob = ((1.0 + p) / 2.0).clamp(0.0, 1.0);
        let plus = Binomial::new(n, prob)
            .map_err(|e| Error::InvalidInput(format!("binomial({n}, {prob}): {e}")))?
            .sample(rng);
        let p_hat = 2.0 * plus as f64 / nf - 1.0;
        let sample_var = (1.0 - p_hat * p_hat).max(0.0) * nf / (nf - 1.0);
        value += c * p_hat;
        variance += c * c * sample_var / nf;
    }
    Ok(EnergyMeasurement {
        value,
        variance,
        shots_total: n * h.n_terms() as u64,
        shots_per_pauli: n,
    })
}

/// Analytic shot variance `Σ_k c_k² (1 - p_k²) / N`.
pub fn analytic_variance(h: &Hamiltonian, psi: &Statevector, shots_per_pauli: u64) -> Result<f64> {
    psi.check_dim(h.dim())?;
    if shots_per_pauli == 0 {
        return Err(Error::Budget("shots_per_pauli must be positive".into()));
    }
    let mut v = 0.0;
    for term in h.terms().iter().filter(|t| !t.is_identity()) {
        let p = psi.pauli_expectation(term)?;
        v += term.coefficient().powi(2) * (1.0 - p * p).max(0.0);
    }
    Ok(v / shots_per_pauli as f64)
}

/// Gaussian surrogate: exact mean plus noise with the analytic variance.
pub fn measure_energy_gaussian<R: Rng + ?Sized>(
    h: &Hamiltonian,
    psi: &Statevector,
    shots_per_pauli: u64,
    rng: &mut R,
) -> Result<EnergyMeasurement> {
    ShotMode::Gaussian { shots_per_pauli }.validate()?;
    let mean = exact_expectation(h, psi)?;
    let variance = analytic_variance(h, psi, shots_per_pauli)?;
    let z: f64 = StandardNormal.sample(rng);
    Ok(EnergyMeasurement {
        value: mean + variance.sqrt() * z,
        variance,
        shots_total: shots_per_pauli * h.n_terms() as u64,
        shots_per_pauli,
    })
}

/// The noiseless limit: exact value, zero variance, no shots.
pub fn measure_energy_infinite(h: &Hamiltonian, psi: &Statevector) -> Result<EnergyMeasurement> {
    Ok(EnergyMeasurement {
        value: exact_expectation(h, psi)?,
        variance: 0.0,
        shots_total: 0,
        shots_per_pauli: 0,
    })
}

/// Dispatches on `mode`.
pub fn measure<R: Rng + ?Sized>(
    h: &Hamiltonian,
    psi: &Statevector,
    mode: ShotMode,
    rng: &mut R,
) -> Result<EnergyMeasurement> {
    match mode {
        ShotMode::Infinite => measure_energy_infinite(h, psi),
        ShotMode::Binomial { shots_per_pauli } => measure_energy(h, psi, shots_per_pauli, rng),
        ShotMode::Gaussian { shots_per_pauli } => {
            measure_energy_gaussian(h, psi, shots_per_pauli, rng)
        }
    }
}

/// Averages the variances measured at the two shifted points; the shared
/// noise level assumed along one direction.
pub fn pooled_subspace_variance(
    plus: &EnergyMeasurement,
    minus: &EnergyMeasurement,
) -> Result<f64> {
    if plus.is_finite_shot() != minus.is_finite_shot() {
        return Err(Error::Mode(
            "cannot pool finite- and infinite-shot measurements".into(),
        ));
    }
    if plus.shots_per_pauli != minus.shots_per_pauli {
        return Err(Error::Mode(format!(
            "shots per Pauli differ: {} vs {}",
            plus.shots_per_pauli, minus.shots_per_pauli
        )));
    }
    Ok((plus.variance + minus.variance) / 2.0)
}

/// Running totals of measurement cost.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotBudgetLedger {
    pub cumulative_shots: u64,
    pub cumulative_evaluations: u64,
}

impl ShotBudgetLedger {
    pub fn record(&mut self, m: &EnergyMeasurement) {
        self.cumulative_shots += m.shots_total;
        self.cumulative_evaluations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, Model};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn minus_z() -> Hamiltonian {
        build_hamiltonian(Model::Tfim, 1, Model::Tfim.default_couplings()).unwrap()
    }

    fn plus_state() -> Statevector {
        Statevector::from_amplitudes(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn eigenstate_has_no_shot_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let psi = Statevector::zero_state(1).unwrap();
        for shots in [2, 10, 1000] {
            let m = measure_energy(&minus_z(), &psi, shots, &mut rng).unwrap();
            assert_eq!(m.value, -1.0);
            assert_eq!(m.variance, 0.0);
        }
    }

    #[test]
    fn plus_state_statistics() {
        let n = 100_000u64;
        let reps = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = plus_state();
        let vals: Vec<f64> = (0..reps)
            .map(|_| measure_energy(&minus_z(), &psi, n, &mut rng).unwrap().value)
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!(mean.abs() < 0.01);
        let target = 1.0 / n as f64;
        assert!(
            (var / target - 1.0).abs() < 0.05,
            "var ratio {}",
            var / target
        );
    }

    #[test]
    fn shot_accounting() {
        let h = build_hamiltonian(Model::Tfim, 5, Model::Tfim.default_couplings()).unwrap();
        let psi = Statevector::zero_state(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = measure_energy(&h, &psi, 100, &mut rng).unwrap();
        assert_eq!(m.shots_total, 900);
        let inf = measure_energy_infinite(&h, &psi).unwrap();
        assert_eq!((inf.shots_total, inf.variance), (0, 0.0));
    }

    #[test]
    fn budget_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let psi = Statevector::zero_state(1).unwrap();
        assert!(matches!(
            measure_energy(&minus_z(), &psi, 0, &mut rng),
            Err(Error::Budget(_))
        ));
        assert!(matches!(
            measure_energy(&minus_z(), &psi, 1, &mut rng),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn infinite_matches_exact_bitwise() {
        let h = build_hamiltonian(Model::Tfim, 2, Model::Tfim.default_couplings()).unwrap();
        let gt = crate::ground::ground_truth(&h, 1e-5).unwrap();
        let psi = gt.ground_state();
        let m = measure_energy_infinite(&h, &psi).unwrap();
        assert_eq!(m.value, exact_expectation(&h, &psi).unwrap());
        assert!((m.value + 5f64.sqrt()).abs() < 1e-10);
        assert_eq!(m.variance, 0.0);
    }

    #[test]
    fn pooling() {
        let m = |variance| EnergyMeasurement {
            value: 0.0,
            variance,
            shots_total: 100,
            shots_per_pauli: 100,
        };
        assert!((pooled_subspace_variance(&m(0.04), &m(0.02)).unwrap() - 0.03).abs() < 1e-15);
        let inf = EnergyMeasurement {
            value: 0.0,
            variance: 0.0,
            shots_total: 0,
            shots_per_pauli: 0,
        };
        assert_eq!(pooled_subspace_variance(&inf, &inf).unwrap(), 0.0);
        assert!(matches!(
            pooled_subspace_variance(&m(0.01), &inf),
            Err(Error::Mode(_))
        ));
    }

    #[test]
    fn pooled_variance_tracks_analytic() {
        let h = build_hamiltonian(Model::Tfim, 3, Model::Tfim.default_couplings()).unwrap();
        let mut psi = Statevector::zero_state(3).unwrap();
        psi.apply_ry(0, 1.0);
        psi.apply_ry(2, 2.0);
        psi.apply_cx(0, 1);
        let truth = analytic_variance(&h, &psi, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 10_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let a = measure_energy(&h, &psi, 100, &mut rng).unwrap();
            let b = measure_energy(&h, &psi, 100, &mut rng).unwrap();
            acc += pooled_subspace_variance(&a, &b).unwrap();
        }
        let mean = acc / trials as f64;
        assert!((mean / truth - 1.0).abs() < 0.03, "{mean} vs {truth}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let h = build_hamiltonian(Model::Xxz, 3, Model::Xxz.default_couplings()).unwrap();
        let psi = plus_state_3();
        let a = measure_energy(&h, &psi, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = measure_energy(&h, &psi, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    fn plus_state_3() -> Statevector {
        let mut psi = Statevector::zero_state(3).unwrap();
        for q in 0..3 {
            psi.apply_ry(q, std::f64::consts::FRAC_PI_2);
        }
        psi
    }

    #[test]
    fn ledger_accumulates() {
        let mut ledger = ShotBudgetLedger::default();
        let m = EnergyMeasurement {
            value: 0.0,
            variance: 0.0,
            shots_total: 900,
            shots_per_pauli: 100,
        };
        ledger.record(&m);
        ledger.record(&m);
        assert_eq!(ledger.cumulative_shots, 1800);
        assert_eq!(ledger.cumulative_evaluations, 2);
    }
}
