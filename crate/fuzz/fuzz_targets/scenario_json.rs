#![no_main]

use libfuzzer_sys::fuzz_target;
use umwave::format::{parse_scenario, scenario_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(scenario) = parse_scenario(text) {
        let again = parse_scenario(&scenario_to_json(&scenario)).expect("serialized scenario parses");
        assert_eq!(scenario.params(), again.params());
    }
});
