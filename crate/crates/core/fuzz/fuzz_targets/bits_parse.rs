#![no_main]
use libfuzzer_sys::fuzz_target;
use lifted_tfhe::netlist::{format_bits, parse_bits};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_bits(text) {
        assert_eq!(parse_bits(&format_bits(&rows)).unwrap(), rows);
    }
});
