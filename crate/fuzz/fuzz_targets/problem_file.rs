#![no_main]

use libfuzzer_sys::fuzz_target;
use ncdisint::json::parse_problem_bytes;
use ncdisint::Tolerance;

fuzz_target!(|data: &[u8]| {
    let _ = parse_problem_bytes(data, &Tolerance::default());
});
