#![no_main]

use libfuzzer_sys::fuzz_target;
use ncdisint::json::BlockMapWire;
use ncdisint::Tolerance;

fuzz_target!(|data: &[u8]| {
    let Ok(wire) = serde_json::from_slice::<BlockMapWire>(data) else { return };
    if let Ok(map) = wire.to_map() {
        let tol = Tolerance::default();
        let _ = map.is_cp(&tol);
        let _ = map.is_unital(&tol);
        let _ = ncdisint::maps::hom_residuals(&map);
    }
});
