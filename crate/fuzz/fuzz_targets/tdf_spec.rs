#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(l) = taildep::spec::parse_tdf(text) {
        for t in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let v = l.value(t, 1.0 - t);
            assert!(v >= 0.0 && v <= t.min(1.0 - t) + 1e-9);
        }
        let _ = l.partial(1, 0.3, 0.7);
    }
});
