#![no_main]

use libfuzzer_sys::fuzz_target;
use qrng_audit::report::{render, ReportFormat};
use qrng_audit::ExperimentMatrix;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = ExperimentMatrix::from_json(text) else { return };
    for format in [ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Plain] {
        let _ = render(&m, format, m.suite.alpha);
    }
});
