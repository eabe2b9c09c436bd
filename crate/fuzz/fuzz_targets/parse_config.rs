#![no_main]

use libfuzzer_sys::fuzz_target;
use smovqe_core::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ExperimentConfig::parse_json(text) {
            if cfg.validate().is_ok() {
                // a valid config survives its own serialization
                let again = ExperimentConfig::from_json(&cfg.to_json()).expect("round trip");
                assert_eq!(again, cfg);
            }
        }
    }
});
