#![no_main]

use libfuzzer_sys::fuzz_target;
use mub_core::algebra::{flatten, unflatten, WVector, C64};

fuzz_target!(|data: &[u8]| {
    let values: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let components = values.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
    if let Ok(w) = WVector::new(components) {
        if let Ok(m) = unflatten(&w) {
            assert_eq!(flatten(&m), w);
        }
    }
});
