#![no_main]

use libfuzzer_sys::fuzz_target;
use ncdisint::json::{matrix_from_wire, matrix_to_wire, MatrixWire};

fuzz_target!(|data: &[u8]| {
    let Ok(wire) = serde_json::from_slice::<MatrixWire>(data) else { return };
    if let Ok(m) = matrix_from_wire(&wire) {
        // anything accepted must survive a write and a re-read unchanged
        let text = serde_json::to_vec(&matrix_to_wire(&m)).unwrap();
        let again: MatrixWire = serde_json::from_slice(&text).unwrap();
        let back = matrix_from_wire(&again).unwrap();
        assert_eq!(back.to_rows(), m.to_rows());
    }
});
