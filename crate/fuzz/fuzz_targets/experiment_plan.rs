#![no_main]

use libfuzzer_sys::fuzz_target;
use qrng_audit::experiment::ExperimentPlan;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = ExperimentPlan::from_toml(text);
});
