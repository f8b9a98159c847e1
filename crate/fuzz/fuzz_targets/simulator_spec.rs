#![no_main]

use libfuzzer_sys::fuzz_target;
use qrng_audit::annealer::SimulatorSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = SimulatorSpec::from_toml(text) else { return };
    assert!(SimulatorSpec::from_toml(&spec.to_toml()).is_ok());
});
