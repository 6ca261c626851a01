#![no_main]

use conformable_cli::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ScenarioConfig::parse(text) {
        // resolving the parts must not panic either
        let _ = cfg.space();
        let _ = cfg.grid();
        let _ = cfg.lagrangian();
        let _ = cfg.field();
        let _ = cfg.generator();
        let _ = cfg.oscillator();
    }
});
