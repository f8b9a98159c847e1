#![no_main]

use libfuzzer_sys::fuzz_target;
use qrng_audit::experiment::Checkpoint;

fuzz_target!(|data: &[u8]| {
    let Ok(cp) = serde_json::from_slice::<Checkpoint>(data) else { return };
    let _ = cp.result.is_consistent(0.01);
});
