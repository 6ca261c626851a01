#![no_main]

use conformable_cli::samples::parse_samples;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&dim, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(field) = parse_samples(text, 1 + dim as usize % 3) {
        let x: Vec<f64> = field.axes().iter().map(|a| a[0]).collect();
        let _ = field.eval(&x, &vec![0; x.len()]);
    }
});
