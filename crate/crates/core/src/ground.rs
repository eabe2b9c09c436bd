//! Exact ground-state energy and ground-subspace fidelity by dense diagonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, MAX_DENSE_QUBITS};
use crate::statevector::Statevector;

/// Eigenvalues within this distance of the minimum count as degenerate.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct GroundTruth {
    gs_energy: f64,
    max_energy: f64,
    tolerance: f64,
    /// Orthonormal basis of the ground subspace, one column per state.
    basis: DMatrix<Complex64>,
}

impl GroundTruth {
    /// E_GS
    pub fn gs_energy(&self) -> f64 {
        self.gs_energy
    }

    /// Largest eigenvalue of H.
    pub fn max_energy(&self) -> f64 {
        self.max_energy
    }

    pub fn degeneracy(&self) -> usize {
        self.basis.ncols()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    /// Dense projector onto the ground subspace.
    pub fn projector(&self) -> DMatrix<Complex64> {
        &self.basis * self.basis.adjoint()
    }

    /// A normalized ground state (the first basis vector).
    pub fn ground_state(&self) -> Statevector {
        Statevector::from_amplitudes(self.basis.column(0).iter().copied().collect())
            .expect("eigenvectors are normalized")
    }
}

/// Diagonalizes `h` and groups eigenvalues within `tol` of the minimum.
pub fn ground_truth(h: &Hamiltonian, tol: f64) -> Result<GroundTruth> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::Resource(format!(
            "exact diagonalization capped at {MAX_DENSE_QUBITS} qubits, got {}",
            h.n_qubits()
        )));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidInput(format!("degeneracy tolerance {tol}")));
    }
    let dense = h.to_dense()?;
    let real = dense.iter().all(|z| z.im == 0.0);
    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = if real {
        // real symmetric path is several times faster
        let eig = SymmetricEigen::new(dense.map(|z| z.re));
        let vecs = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        (eig.eigenvalues.iter().copied().collect(), vecs)
    } else {
        let eig = SymmetricEigen::new(dense);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let gs_energy = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max_energy = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cols: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] - gs_energy <= tol)
        .collect();
    let basis = DMatrix::from_fn(vectors.nrows(), cols.len(), |r, c| vectors[(r, cols[c])]);
    Ok(GroundTruth {
        gs_energy,
        max_energy,
        tolerance: tol,
        basis,
    })
}

/// Overlap `<ψ|P_GS|ψ>` with the ground subspace, clamped to `[0, 1]`.
pub fn fidelity_to_gs(psi: &Statevector, gt: &GroundTruth) -> Result<f64> {
    psi.check_dim(gt.dim())?;
    let amps = psi.amplitudes();
    let mut f = 0.0;
    for col in gt.basis.column_iter() {
        let overlap: Complex64 = col.iter().zip(amps).map(|(v, a)| v.conj() * a).sum();
        f += overlap.norm_sqr();
    }
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, Model, Pauli, PauliTerm};
    use crate::statevector::exact_expectation;

    fn tfim(n: usize) -> Hamiltonian {
        build_hamiltonian(Model::Tfim, n, Model::Tfim.default_couplings()).unwrap()
    }

    #[test]
    fn single_qubit_tfim() {
        let gt = ground_truth(&tfim(1), DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(gt.gs_energy(), -1.0);
        assert_eq!(gt.degeneracy(), 1);
    }

    /// H = -X⊗X - Z⊗I - I⊗Z. In the even-parity sector {|00>, |11>} the block
    /// is [[-2, -1], [-1, 2]] with eigenvalues ±√5; the odd sector
    /// {|01>, |10>} gives [[0, -1], [-1, 0]] with eigenvalues ±1.
    #[test]
    fn two_qubit_tfim_is_minus_sqrt5() {
        let even = [[-2.0f64, -1.0], [-1.0, 2.0]];
        let tr = even[0][0] + even[1][1];
        let det = even[0][0] * even[1][1] - even[0][1] * even[1][0];
        let oracle = tr / 2.0 - ((tr / 2.0).powi(2) - det).sqrt();
        assert!((oracle + 5f64.sqrt()).abs() < 1e-15);

        let h = tfim(2);
        let gt = ground_truth(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((gt.gs_energy() - oracle).abs() < 1e-10);
        assert_eq!(gt.degeneracy(), 1);
        let e = exact_expectation(&h, &gt.ground_state()).unwrap();
        assert!((e - oracle).abs() < 1e-10);
    }

    #[test]
    fn tensor_factor_degeneracy() {
        let h = Hamiltonian::new(
            2,
            vec![PauliTerm::new(1.0, vec![Pauli::Z, Pauli::I]).unwrap()],
        )
        .unwrap();
        let gt = ground_truth(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(gt.degeneracy(), 2);
        let p = gt.projector();
        assert!((p.trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn projector_is_idempotent() {
        for model in Model::ALL {
            let h = build_hamiltonian(model, 4, model.default_couplings()).unwrap();
            let gt = ground_truth(&h, DEFAULT_DEGENERACY_TOL).unwrap();
            let p = gt.projector();
            let defect = (&p * &p - &p).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(defect < 1e-9, "{model}");
            assert!((p.trace().re - gt.degeneracy() as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_cases() {
        let h = tfim(2);
        let gt = ground_truth(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let gs = gt.ground_state();
        assert!((fidelity_to_gs(&gs, &gt).unwrap() - 1.0).abs() < 1e-12);

        // the odd-parity sector is orthogonal to the even-parity ground state
        let orth = Statevector::from_amplitudes(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!(fidelity_to_gs(&orth, &gt).unwrap() < 1e-12);

        let mixed = Statevector::from_amplitudes(
            gs.amplitudes()
                .iter()
                .zip(orth.amplitudes())
                .map(|(a, b)| a + b)
                .collect(),
        )
        .unwrap();
        assert!((fidelity_to_gs(&mixed, &gt).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn complex_hamiltonian_path() {
        // XXX carries single-site Y fields, so its matrix is genuinely complex
        let h = build_hamiltonian(Model::Xxx, 3, Model::Xxx.default_couplings()).unwrap();
        let gt = ground_truth(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let e = exact_expectation(&h, &gt.ground_state()).unwrap();
        assert!((e - gt.gs_energy()).abs() < 1e-9);
        assert!(gt.max_energy() > gt.gs_energy());
    }

    #[test]
    fn dense_cap_enforced() {
        let h = tfim(15);
        assert!(matches!(
            ground_truth(&h, DEFAULT_DEGENERACY_TOL),
            Err(Error::Resource(_))
        ));
    }
}
