#![no_main]

use conformable::expr::{parse, VarSpace};
use libfuzzer_sys::fuzz_target;

// Whatever parses must render to text that parses back to the same
// rendering.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let space = VarSpace::full(2);
    let Ok(e) = parse(text, &space) else { return };
    let rendered = e.to_string();
    let back = parse(&rendered, &space).unwrap_or_else(|err| panic!("{rendered:?}: {err}"));
    assert_eq!(back.to_string(), rendered);
});
