#![no_main]

use keller_core::{fmt_rat, parse_rat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(q) = parse_rat(text) {
        assert_eq!(parse_rat(&fmt_rat(&q)).unwrap(), q);
    }
});
