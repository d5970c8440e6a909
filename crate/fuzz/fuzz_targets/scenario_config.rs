#![no_main]

use beaconmac_core::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // anything accepted must survive a round trip
    if let Ok(cfg) = ScenarioConfig::parse(text) {
        let back = ScenarioConfig::parse(&cfg.to_config_string()).expect("serialised config parses");
        assert_eq!(back, cfg);
    }
});
