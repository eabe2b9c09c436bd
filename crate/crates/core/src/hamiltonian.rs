//! Pauli-string Hamiltonians for open spin chains.
//!
//! Qubit `i` of a Pauli string is bit `i` of a computational-basis index
//! (little-endian), and the leftmost character of a textual Pauli string
//! addresses qubit 0.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register handled by dense diagonalization (2^14 = 16384 amplitudes).
pub const MAX_DENSE_QUBITS: usize = 14;

/// Largest register accepted anywhere; basis indices are stored in `u64` masks.
pub const MAX_QUBITS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Bit masks describing how a Pauli string acts on a basis state.
///
/// `P|x> = i^y_count * (-1)^popcount(x & phase) |x ^ flip>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliMasks {
    pub flip: u64,
    pub phase: u64,
    pub y_count: u32,
}

impl PauliMasks {
    /// Image index and phase of `P|x>`.
    #[inline]
    pub fn apply(&self, x: u64) -> (u64, Complex64) {
        let s = if (x & self.phase).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let phase = match self.y_count % 4 {
            0 => Complex64::new(s, 0.0),
            1 => Complex64::new(0.0, s),
            2 => Complex64::new(-s, 0.0),
            _ => Complex64::new(0.0, -s),
        };
        (x ^ self.flip, phase)
    }

    pub fn is_identity(&self) -> bool {
        self.flip == 0 && self.phase == 0
    }
}

/// A real-weighted tensor product of single-qubit Pauli operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    coefficient: f64,
    axes: Vec<Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, axes: Vec<Pauli>) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "non-finite Pauli coefficient {coefficient}"
            )));
        }
        if axes.is_empty() || axes.len() > MAX_QUBITS {
            return Err(Error::InvalidSpec(format!(
                "Pauli string length {} outside 1..={MAX_QUBITS}",
                axes.len()
            )));
        }
        Ok(PauliTerm { coefficient, axes })
    }

    /// Identity everywhere except the listed `(qubit, axis)` sites.
    pub fn on_sites(coefficient: f64, n_qubits: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut axes = vec![Pauli::I; n_qubits];
        for &(q, p) in sites {
            if q >= n_qubits {
                return Err(Error::InvalidSpec(format!(
                    "site {q} outside a {n_qubits}-qubit register"
                )));
            }
            axes[q] = p;
        }
        PauliTerm::new(coefficient, axes)
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn axes(&self) -> &[Pauli] {
        &self.axes
    }

    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|&p| p == Pauli::I)
    }

    pub fn masks(&self) -> PauliMasks {
        let mut m = PauliMasks {
            flip: 0,
            phase: 0,
            y_count: 0,
        };
        for (q, p) in self.axes.iter().enumerate() {
            let bit = 1u64 << q;
            match p {
                Pauli::I => {}
                Pauli::X => m.flip |= bit,
                Pauli::Y => {
                    m.flip |= bit;
                    m.phase |= bit;
                    m.y_count += 1;
                }
                Pauli::Z => m.phase |= bit,
            }
        }
        m
    }

    /// Pauli string text, qubit 0 first.
    pub fn label(&self) -> String {
        self.axes.iter().map(|p| p.as_char()).collect()
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.coefficient, self.label())
    }
}

/// Parses a Pauli string such as `XXIZ` (qubit 0 first).
pub fn parse_pauli_string(s: &str) -> Result<Vec<Pauli>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty Pauli string".into()));
    }
    s.chars()
        .map(|c| {
            Pauli::from_char(c).ok_or_else(|| Error::Parse(format!("invalid Pauli symbol {c:?}")))
        })
        .collect()
}

/// A sum of weighted Pauli strings on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl Hamiltonian {
    /// Builds a Hamiltonian, dropping zero-coefficient terms.
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidSpec(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        if let Some(t) = terms.iter().find(|t| t.n_qubits() != n_qubits) {
            return Err(Error::InvalidSpec(format!(
                "term {} acts on {} qubits, Hamiltonian has {n_qubits}",
                t.label(),
                t.n_qubits()
            )));
        }
        let terms: Vec<PauliTerm> = terms.into_iter().filter(|t| t.coefficient != 0.0).collect();
        if terms.is_empty() {
            return Err(Error::InvalidSpec(
                "Hamiltonian has no nonzero terms".into(),
            ));
        }
        Ok(Hamiltonian { n_qubits, terms })
    }

    /// Parses one term per line, `<coefficient> <pauli string>`.
    ///
    /// Blank lines and lines starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut n_qubits = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(coef), Some(paulis), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::Parse(format!(
                    "line {}: expected `<coefficient> <pauli string>`",
                    lineno + 1
                )));
            };
            let coefficient: f64 = coef.parse().map_err(|_| {
                Error::Parse(format!("line {}: bad coefficient {coef:?}", lineno + 1))
            })?;
            let axes = parse_pauli_string(paulis)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            match n_qubits {
                None => n_qubits = Some(axes.len()),
                Some(n) if n != axes.len() => {
                    return Err(Error::Parse(format!(
                        "line {}: Pauli string has {} qubits, expected {n}",
                        lineno + 1,
                        axes.len()
                    )))
                }
                _ => {}
            }
            terms.push(PauliTerm::new(coefficient, axes)?);
        }
        let n = n_qubits.ok_or_else(|| Error::Parse("no terms".into()))?;
        Hamiltonian::new(n, terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of Pauli terms (n_P).
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    /// Dense matrix in the computational basis.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::Resource(format!(
                "dense realization capped at {MAX_DENSE_QUBITS} qubits, got {}",
                self.n_qubits
            )));
        }
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for term in &self.terms {
            let masks = term.masks();
            for x in 0..dim as u64 {
                let (y, phase) = masks.apply(x);
                m[(y as usize, x as usize)] += phase * term.coefficient;
            }
        }
        Ok(m)
    }
}

impl fmt::Display for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Spin-chain families with open boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `j Σ X_i X_{i+1} + h Σ Z_i`
    Tfim,
    /// `j Σ (X_i X_{i+1} + Y_i Y_{i+1})`
    Xx,
    /// `j Σ (X_i X_{i+1} + Y_i Y_{i+1}) + Δ Σ Z_i Z_{i+1}`
    Xxz,
    /// `j Σ (XX + YY + ZZ) + h Σ (X_i + Y_i + Z_i)`
    Xxx,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Tfim, Model::Xx, Model::Xxz, Model::Xxx];

    pub fn name(self) -> &'static str {
        match self {
            Model::Tfim => "tfim",
            Model::Xx => "xx",
            Model::Xxz => "xxz",
            Model::Xxx => "xxx",
        }
    }

    /// Term count for an `n_qubits` chain with all couplings nonzero.
    pub fn term_count(self, n_qubits: usize) -> usize {
        let bonds = n_qubits.saturating_sub(1);
        match self {
            Model::Tfim => bonds + n_qubits,
            Model::Xx => 2 * bonds,
            Model::Xxz => 3 * bonds,
            Model::Xxx => 3 * bonds + 3 * n_qubits,
        }
    }

    /// Couplings studied for each family: j = h = -1 (TFIM, XXX), j = -1 (XX),
    /// j = 2Δ = -1 (XXZ).
    pub fn default_couplings(self) -> Couplings {
        match self {
            Model::Tfim | Model::Xxx => Couplings {
                j: -1.0,
                h: -1.0,
                delta: 0.0,
            },
            Model::Xx => Couplings {
                j: -1.0,
                h: 0.0,
                delta: 0.0,
            },
            Model::Xxz => Couplings {
                j: -1.0,
                h: 0.0,
                delta: -0.5,
            },
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tfim" | "ising" => Ok(Model::Tfim),
            "xx" => Ok(Model::Xx),
            "xxz" => Ok(Model::Xxz),
            "xxx" | "heisenberg" => Ok(Model::Xxx),
            other => Err(Error::InvalidSpec(format!("unknown model {other:?}"))),
        }
    }
}

/// Coupling constants. Each model reads only the fields it uses
/// (TFIM: j, h; XX: j; XXZ: j, delta; XXX: j, h).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub j: f64,
    pub h: f64,
    pub delta: f64,
}

/// Builds the open-boundary chain for `model` on `n_qubits` sites.
pub fn build_hamiltonian(model: Model, n_qubits: usize, c: Couplings) -> Result<Hamiltonian> {
    if n_qubits == 0 {
        return Err(Error::InvalidSpec(
            "a chain needs at least one qubit".into(),
        ));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::InvalidSpec(format!(
            "qubit count {n_qubits} exceeds {MAX_QUBITS}"
        )));
    }
    for (name, v) in [("j", c.j), ("h", c.h), ("delta", c.delta)] {
        if !v.is_finite() {
            return Err(Error::InvalidSpec(format!("coupling {name} is not finite")));
        }
    }
    let n = n_qubits;
    let bond = |coef: f64, p: Pauli, i: usize| PauliTerm::on_sites(coef, n, &[(i, p), (i + 1, p)]);
    let field = |coef: f64, p: Pauli, i: usize| PauliTerm::on_sites(coef, n, &[(i, p)]);

    let mut terms = Vec::with_capacity(model.term_count(n));
    let bonds = 0..n - 1;
    match model {
        Model::Tfim => {
            for i in bonds {
                terms.push(bond(c.j, Pauli::X, i)?);
            }
            for i in 0..n {
                terms.push(field(c.h, Pauli::Z, i)?);
            }
        }
        Model::Xx | Model::Xxz | Model::Xxx => {
            let zz = match model {
                Model::Xx => 0.0,
                Model::Xxz => c.delta,
                _ => c.j,
            };
            for (p, coef) in [(Pauli::X, c.j), (Pauli::Y, c.j), (Pauli::Z, zz)] {
                for i in bonds.clone() {
                    terms.push(bond(coef, p, i)?);
                }
            }
            if model == Model::Xxx {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    for i in 0..n {
                        terms.push(field(c.h, p, i)?);
                    }
                }
            }
        }
    }
    Hamiltonian::new(n, terms)
}
