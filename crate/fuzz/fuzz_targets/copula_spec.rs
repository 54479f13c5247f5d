#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = taildep::spec::parse_copula(text) {
        if let Ok(v) = c.eval(&[0.5, 0.5]) {
            assert!((-1e-9..=0.5 + 1e-9).contains(&v));
        }
    }
});
