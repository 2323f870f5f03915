#![no_main]

use libfuzzer_sys::fuzz_target;

// Parsing only: nothing is executed, so no files are touched.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let argv = std::iter::once("mub").chain(text.split_whitespace());
        let _ = mub_core::cli::parse_args(argv);
    }
});
