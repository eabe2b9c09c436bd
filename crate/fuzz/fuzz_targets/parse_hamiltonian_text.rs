#![no_main]

use libfuzzer_sys::fuzz_target;
use smovqe_core::hamiltonian::Hamiltonian;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(h) = Hamiltonian::from_text(text) {
            let again = Hamiltonian::from_text(&h.to_string()).expect("display parses");
            assert_eq!(again.n_terms(), h.n_terms());
        }
    }
});
