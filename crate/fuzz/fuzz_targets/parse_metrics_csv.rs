#![no_main]

use libfuzzer_sys::fuzz_target;
use smovqe_core::harness::{aggregate, read_metrics_csv, write_metrics_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_metrics_csv(data) {
        let _ = aggregate(&rows);
        let mut out = Vec::new();
        write_metrics_csv(&mut out, &rows).expect("writes to memory");
        let again = read_metrics_csv(&out[..]).expect("own output parses");
        assert_eq!(again.len(), rows.len());
    }
});
