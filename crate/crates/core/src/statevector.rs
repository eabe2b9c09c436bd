//! Dense pure-state simulation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, PauliTerm, MAX_QUBITS};

/// Imaginary parts of Hermitian expectations above this are treated as a bug.
const IMAG_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>`
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidSpec(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    /// Wraps raw amplitudes, normalizing them. The length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput(
                "state has zero or non-finite norm".into(),
            ));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(Statevector {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        self.check_dim(other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::Dimension {
                expected,
                actual: self.dim(),
            });
        }
        Ok(())
    }

    /// Applies a 2x2 unitary `[[a, b], [c, d]]` to `qubit`.
    fn apply_1q(&mut self, qubit: usize, u: [[Complex64; 2]; 2]) {
        let bit = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[j] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    /// `RY(θ) = exp(-iθY/2)`
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let (c, s) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
        self.apply_1q(qubit, [[c, -s], [s, c]]);
    }

    /// `RZ(θ) = exp(-iθZ/2)`
    pub fn apply_rz(&mut self, qubit: usize, theta: f64) {
        let bit = 1usize << qubit;
        let lo = Complex64::from_polar(1.0, -theta / 2.0);
        let hi = Complex64::from_polar(1.0, theta / 2.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & bit == 0 { lo } else { hi };
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    /// `<ψ|P|ψ>` for a Pauli string, coefficient excluded.
    pub fn pauli_expectation(&self, term: &PauliTerm) -> Result<f64> {
        if term.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                actual: term.n_qubits(),
            });
        }
        let masks = term.masks();
        if masks.is_identity() {
            return Ok(self.norm_sqr());
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, a) in self.amps.iter().enumerate() {
            let (y, phase) = masks.apply(x as u64);
            acc += self.amps[y as usize].conj() * phase * a;
        }
        debug_assert!(
            acc.im.abs() < IMAG_RESIDUAL_TOL,
            "imaginary residual {}",
            acc.im
        );
        Ok(acc.re)
    }
}

/// Exact `<ψ|H|ψ>`; the infinite-shot energy.
pub fn exact_expectation(h: &Hamiltonian, psi: &Statevector) -> Result<f64> {
    psi.check_dim(h.dim())?;
    let mut e = 0.0;
    for term in h.terms() {
        e += term.coefficient() * psi.pauli_expectation(term)?;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, Model, Pauli};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn minus_z() -> Hamiltonian {
        build_hamiltonian(Model::Tfim, 1, Model::Tfim.default_couplings()).unwrap()
    }

    #[test]
    fn eigenstate_expectation() {
        let psi = Statevector::zero_state(1).unwrap();
        assert_eq!(exact_expectation(&minus_z(), &psi).unwrap(), -1.0);
    }

    #[test]
    fn plus_state_expectation_vanishes() {
        let psi = Statevector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        assert!(exact_expectation(&minus_z(), &psi).unwrap().abs() < 1e-15);
    }

    #[test]
    fn ry_pi_flips() {
        let mut psi = Statevector::zero_state(1).unwrap();
        psi.apply_ry(0, PI);
        assert!(psi.amplitudes()[0].norm() < 1e-15);
        assert!((psi.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cx_entangles() {
        let mut psi = Statevector::zero_state(2).unwrap();
        psi.apply_ry(0, PI / 2.0);
        psi.apply_cx(0, 1);
        let zz = PauliTerm::new(1.0, vec![Pauli::Z, Pauli::Z]).unwrap();
        let xx = PauliTerm::new(1.0, vec![Pauli::X, Pauli::X]).unwrap();
        assert!((psi.pauli_expectation(&zz).unwrap() - 1.0).abs() < 1e-12);
        assert!((psi.pauli_expectation(&xx).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_matches_dense_matrix() {
        let h = build_hamiltonian(Model::Xxx, 3, Model::Xxx.default_couplings()).unwrap();
        let mut psi = Statevector::zero_state(3).unwrap();
        for q in 0..3 {
            psi.apply_ry(q, 0.3 + q as f64);
            psi.apply_rz(q, 1.1 * q as f64 - 0.4);
        }
        psi.apply_cx(0, 1);
        psi.apply_cx(1, 2);
        let m = h.to_dense().unwrap();
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let dense = (v.adjoint() * &m * &v)[(0, 0)];
        let fast = exact_expectation(&h, &psi).unwrap();
        assert!((dense.re - fast).abs() < 1e-12);
        assert!(dense.im.abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let psi = Statevector::zero_state(2).unwrap();
        assert!(matches!(
            exact_expectation(&minus_z(), &psi),
            Err(Error::Dimension {
                expected: 2,
                actual: 4
            })
        ));
    }

    #[test]
    fn bad_amplitudes() {
        assert!(Statevector::from_amplitudes(vec![c(1.0); 3]).is_err());
        assert!(Statevector::from_amplitudes(vec![c(0.0); 4]).is_err());
    }
}
