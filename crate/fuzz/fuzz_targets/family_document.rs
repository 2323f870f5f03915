#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(family) = mub_core::io::parse_family(text) {
            let _ = mub_core::verify::verify_family(&family, 1e-10);
        }
    }
});
