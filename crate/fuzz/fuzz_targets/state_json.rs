#![no_main]

use libfuzzer_sys::fuzz_target;
use ncdisint::json::StateWire;
use ncdisint::Tolerance;

fuzz_target!(|data: &[u8]| {
    let Ok(wire) = serde_json::from_slice::<StateWire>(data) else { return };
    let tol = Tolerance::default();
    if let Ok(state) = wire.to_state(&tol) {
        let total: f64 = state.weights().iter().sum();
        assert!((total - 1.0).abs() <= tol.residual());
        let _ = state.support(&tol);
    }
});
