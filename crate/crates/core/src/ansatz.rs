//! Hardware-efficient layered ansatz.
//!
//! The circuit starts from `|0...0>` and applies a rotation layer, followed by
//! `n_layers` repetitions of a linear CX chain (control `i`, target `i + 1`)
//! and another rotation layer. A rotation layer is `RY` on every qubit then
//! `RZ` on every qubit, each gate with its own angle. The entangler pattern
//! is an assumption: linear, not circular or all-to-all.
//!
//! Parameters are ordered layer-major; inside a layer the `RY` block comes
//! before the `RZ` block and qubits run fastest. This is the order SMO sweeps
//! visit directions in.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::MAX_QUBITS;
use crate::statevector::Statevector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    n_qubits: usize,
    n_layers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationAxis {
    Y,
    Z,
}

/// The gate a parameter drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateSlot {
    pub layer: usize,
    pub qubit: usize,
    pub axis: RotationAxis,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, n_layers: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidSpec(format!(
                "ansatz qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        Ok(AnsatzSpec { n_qubits, n_layers })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    /// D = 2 n_q (n_l + 1)
    pub fn n_params(&self) -> usize {
        2 * self.n_qubits * (self.n_layers + 1)
    }

    pub fn slot(&self, d: usize) -> Option<GateSlot> {
        if d >= self.n_params() {
            return None;
        }
        let per_layer = 2 * self.n_qubits;
        let (layer, r) = (d / per_layer, d % per_layer);
        let axis = if r < self.n_qubits {
            RotationAxis::Y
        } else {
            RotationAxis::Z
        };
        Some(GateSlot {
            layer,
            qubit: r % self.n_qubits,
            axis,
        })
    }

    /// Prepares the circuit output state for `theta`.
    pub fn prepare(&self, theta: &ParameterVector) -> Result<Statevector> {
        if theta.len() != self.n_params() {
            return Err(Error::Dimension {
                expected: self.n_params(),
                actual: theta.len(),
            });
        }
        let n = self.n_qubits;
        let mut psi = Statevector::zero_state(n)?;
        for (layer, block) in theta.values().chunks_exact(2 * n).enumerate() {
            if layer > 0 {
                for q in 0..n.saturating_sub(1) {
                    psi.apply_cx(q, q + 1);
                }
            }
            let (ry, rz) = block.split_at(n);
            for (q, &a) in ry.iter().enumerate() {
                psi.apply_ry(q, a);
            }
            for (q, &a) in rz.iter().enumerate() {
                psi.apply_rz(q, a);
            }
        }
        Ok(psi)
    }
}

/// Convenience wrapper for [`AnsatzSpec::prepare`].
pub fn apply_ansatz(spec: &AnsatzSpec, theta: &ParameterVector) -> Result<Statevector> {
    spec.prepare(theta)
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A point on the parameter torus; every stored angle lies in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite angle {v}")));
        }
        Ok(ParameterVector(
            values.into_iter().map(wrap_angle).collect(),
        ))
    }

    pub fn zeros(len: usize) -> Self {
        ParameterVector(vec![0.0; len])
    }

    /// Uniform sample from `[0, 2π)^len`.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        ParameterVector((0..len).map(|_| rng.random_range(0.0..TAU)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, d: usize) -> f64 {
        self.0[d]
    }

    /// Sets component `d`, wrapping it onto the torus.
    pub fn set(&mut self, d: usize, value: f64) {
        self.0[d] = wrap_angle(value);
    }

    /// Copy with component `d` shifted by `offset`.
    pub fn shifted(&self, d: usize, offset: f64) -> Self {
        let mut out = self.clone();
        out.set(d, self.0[d] + offset);
        out
    }
}
