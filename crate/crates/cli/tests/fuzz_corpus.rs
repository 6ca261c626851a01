//! Replays the fuzz seeds through the same entry points as the fuzz
//! targets, so the invariants they assert are checked on every test run.

use std::path::PathBuf;

use conformable::expr::{parse, VarSpace};
use conformable_cli::samples::parse_samples;
use conformable_cli::ScenarioConfig;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            (path.display().to_string(), std::fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn expression_seeds_round_trip() {
    let mut parsed = 0;
    for (name, bytes) in seeds("render_roundtrip") {
        let text = String::from_utf8(bytes).unwrap();
        let space = VarSpace::full(2);
        let Ok(e) = parse(&text, &space) else { continue };
        let rendered = e.to_string();
        let back = parse(&rendered, &space).unwrap_or_else(|err| panic!("{name}: {rendered:?}: {err}"));
        assert_eq!(back.to_string(), rendered, "{name}");
        parsed += 1;
    }
    assert!(parsed >= 5);
}

#[test]
fn config_seeds_never_panic() {
    let mut accepted = 0;
    for (_, bytes) in seeds("parse_config") {
        if let Ok(cfg) = ScenarioConfig::parse(&String::from_utf8(bytes).unwrap()) {
            let _ = (cfg.space(), cfg.grid(), cfg.lagrangian(), cfg.field(), cfg.generator(), cfg.oscillator());
            accepted += 1;
        }
    }
    assert_eq!(accepted, 3);
}

#[test]
fn sample_seeds_never_panic() {
    let mut accepted = 0;
    for (_, bytes) in seeds("parse_samples") {
        let (&dim, rest) = bytes.split_first().unwrap();
        if let Ok(field) = parse_samples(std::str::from_utf8(rest).unwrap(), 1 + dim as usize % 3) {
            let x: Vec<f64> = field.axes().iter().map(|a| a[0]).collect();
            field.eval(&x, &vec![0; x.len()]).unwrap();
            accepted += 1;
        }
    }
    assert_eq!(accepted, 2);
}
