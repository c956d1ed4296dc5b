#![no_main]

use libfuzzer_sys::fuzz_target;
use umwave::format::parse_manifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_manifest(text) {
        let _ = m.identity_hash();
        if m.wall_clock_secs.is_finite() {
            let again = parse_manifest(&m.to_json()).expect("written manifest parses");
            assert_eq!(m.identity_hash(), again.identity_hash());
        }
    }
});
