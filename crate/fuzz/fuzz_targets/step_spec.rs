#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = taildep::spec::parse_step(text) {
        let _ = f.eval(1.0);
        let _ = f.l1_norm();
        if f.is_compact() && f.is_nonnegative() {
            let g = taildep::numerics::decreasing_rearrangement(&f).unwrap();
            assert!(taildep::numerics::majorizes(&f, &g));
        }
    }
});
