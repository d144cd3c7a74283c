#![no_main]

use keller_core::json::{parse_rep, rep_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rep) = parse_rep(text) {
        let out = rep_to_json(&rep);
        assert_eq!(rep_to_json(&parse_rep(&out).unwrap()), out);
    }
});
