#![no_main]

use libfuzzer_sys::fuzz_target;
use smovqe_core::hamiltonian::{parse_pauli_string, Model};
use smovqe_core::optimizer::Variant;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_pauli_string(text);
        let _ = text.parse::<Model>();
        let _ = text.parse::<Variant>();
    }
});
