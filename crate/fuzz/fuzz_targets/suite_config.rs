#![no_main]

use libfuzzer_sys::fuzz_target;
use qrng_audit::SuiteConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = SuiteConfig::from_toml(text) {
        let _ = cfg.digest();
    }
    let _ = SuiteConfig::from_json(text);
});
