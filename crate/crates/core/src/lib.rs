pub mod ansatz;
pub mod error;
pub mod fit;
pub mod ground;
pub mod hamiltonian;
pub mod harness;
pub mod measurement;
pub mod optimizer;
pub mod statevector;
pub mod validation;
