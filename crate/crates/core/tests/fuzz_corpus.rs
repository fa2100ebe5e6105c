//! Replays the checked-in fuzz corpus through the same checks the fuzz
//! targets make, so the seeds stay meaningful without a fuzzing toolchain.

use std::path::PathBuf;

use subdiff_core::harness::ExperimentConfig;
use subdiff_core::noise::PathDump;

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn config_seeds_round_trip() {
    let seeds = corpus("config_json");
    let mut accepted = 0;
    for (name, bytes) in &seeds {
        match ExperimentConfig::from_json_slice(bytes) {
            Ok(cfg) => {
                let again =
                    ExperimentConfig::from_json_slice(cfg.to_json_pretty().as_bytes()).unwrap();
                assert_eq!(cfg, again, "{name}");
                accepted += 1;
            }
            Err(_) => assert!(
                name.starts_with("unknown") || name.starts_with("truncated"),
                "valid-looking seed {name} was rejected"
            ),
        }
    }
    assert!(accepted >= 5, "only {accepted} seeds accepted");
}

#[test]
fn path_dump_seeds_round_trip() {
    let mut accepted = 0;
    for (name, bytes) in corpus("path_dump") {
        if let Ok(dump) = PathDump::decode(&bytes) {
            assert_eq!(
                dump.into_path(0, 0).unwrap().to_dump_bytes(),
                bytes,
                "{name}"
            );
            accepted += 1;
        }
    }
    assert_eq!(accepted, 3);
}
