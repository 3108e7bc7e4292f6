#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = mma_core::config::parse_model(text) {
            let _ = spec.build();
        }
    }
});
