#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(k) = taildep::spec::parse_kernel(text) {
        let f = taildep::step::StepFunction::indicator(0.0, 1.0).unwrap();
        let _ = taildep::substoch::apply_operator(&k, &f, 0.5);
        let _ = k.value(2.0, 3.0);
    }
});
