#![no_main]

use keller_core::json::{map_to_json, parse_map};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_map(text) {
        let g = parse_map(&map_to_json(&f)).unwrap();
        assert_eq!(g.components(), f.components());
        if f.arity() <= 3 {
            let _ = f.jacobian_det();
        }
    }
});
