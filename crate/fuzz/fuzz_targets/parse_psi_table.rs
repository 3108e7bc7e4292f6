#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(psi) = mma_core::kernels::parse_psi_table(text) {
            let _ = psi.inverse_left(0.5 * psi.psi0());
        }
    }
});
