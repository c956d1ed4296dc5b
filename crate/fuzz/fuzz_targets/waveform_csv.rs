#![no_main]

use libfuzzer_sys::fuzz_target;
use umwave::format::{parse_waveform, waveform_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_waveform(text) {
        assert!(x.max_modulus_deviation() < 1e-12);
        let again = parse_waveform(&waveform_to_csv(&x, &[])).expect("written waveform parses");
        assert_eq!(x.entries(), again.entries());
    }
});
