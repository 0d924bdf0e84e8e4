#![no_main]

use libfuzzer_sys::fuzz_target;
use ncdisint::json::HomWire;
use ncdisint::Tolerance;

fuzz_target!(|data: &[u8]| {
    let Ok(wire) = serde_json::from_slice::<HomWire>(data) else { return };
    let tol = Tolerance::default();
    if let Ok(hom) = wire.to_hom(&tol) {
        assert!(ncdisint::maps::verify_hom(&hom.to_blockmap(), &tol));
    }
});
