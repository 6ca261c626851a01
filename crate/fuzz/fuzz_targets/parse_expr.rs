#![no_main]

use conformable::expr::{parse, VarSpace};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for space in [VarSpace::coordinates(3), VarSpace::full(2)] {
        if let Ok(e) = parse(text, &space) {
            let _ = e.to_string();
        }
    }
});
