#![no_main]

use keller_core::json::ExperimentConfig;
use keller_core::registry::Registry;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        if cfg.map_path.is_some() || cfg.rep_path.is_some() {
            return;
        }
        let _ = cfg.resolve(&Registry::builtin(), None);
    }
});
