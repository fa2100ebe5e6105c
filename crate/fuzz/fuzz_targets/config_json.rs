#![no_main]

use libfuzzer_sys::fuzz_target;
use subdiff_core::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    // Parsing and validation must reject bad input with an error, never a panic.
    let Ok(cfg) = ExperimentConfig::from_json_slice(data) else {
        return;
    };
    // Accepted configurations survive a serialization round trip unchanged.
    let text = cfg.to_json_pretty();
    let again = ExperimentConfig::from_json_slice(text.as_bytes())
        .expect("a re-serialized valid config parses");
    assert_eq!(cfg, again);
});
