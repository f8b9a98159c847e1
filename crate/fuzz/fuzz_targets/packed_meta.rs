#![no_main]

use libfuzzer_sys::fuzz_target;
use qrng_audit::bitstream::StreamMetadata;
use qrng_audit::BitSequence;

// Input: sidecar TOML, a NUL byte, then the packed payload.
fuzz_target!(|data: &[u8]| {
    let split = data.iter().position(|&b| b == 0).unwrap_or(data.len());
    let Ok(text) = std::str::from_utf8(&data[..split]) else { return };
    let Ok(meta) = StreamMetadata::from_toml(text) else { return };
    assert_eq!(StreamMetadata::from_toml(&meta.to_toml()).unwrap(), meta);
    let payload = data.get(split + 1..).unwrap_or_default().to_vec();
    let Ok(bits) = usize::try_from(meta.bit_count) else { return };
    if let Ok(seq) = BitSequence::from_packed(payload, bits) {
        assert_eq!(seq.len(), bits);
        assert!(seq.count_ones() <= bits as u64);
    }
});
