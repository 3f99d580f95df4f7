#![no_main]
use libfuzzer_sys::fuzz_target;
use lifted_tfhe::transform::DyadicTwiddleTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = DyadicTwiddleTable::decode(data) {
        assert_eq!(DyadicTwiddleTable::decode(&table.encode()).unwrap(), table);
    }
});
