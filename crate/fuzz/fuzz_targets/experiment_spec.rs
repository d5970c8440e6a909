#![no_main]

use beaconmac_cli::ExperimentSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = ExperimentSpec::parse(text) {
        assert!(spec.reps >= 1);
        assert!(!spec.loads.is_empty() && !spec.k.is_empty() && !spec.n.is_empty() && !spec.protocols.is_empty());
    }
});
