#![no_main]

use keller_core::trajcsv::read_records;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = read_records(data);
});
