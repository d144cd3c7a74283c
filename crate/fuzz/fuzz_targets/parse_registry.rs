#![no_main]

use keller_core::json::parse_registry;
use keller_core::registry::Registry;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_registry(text) {
        let _ = Registry::builtin().extend(&file);
    }
});
