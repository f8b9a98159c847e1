#![no_main]

use libfuzzer_sys::fuzz_target;
use qrng_audit::bitstream::SpinCsvReader;

fuzz_target!(|data: &[u8]| {
    let Ok(reader) = SpinCsvReader::new(data) else { return };
    let width = reader.qubit_ids().len();
    for sample in reader {
        match sample {
            Ok(s) => assert_eq!(s.spins.len(), width),
            Err(_) => break,
        }
    }
});
