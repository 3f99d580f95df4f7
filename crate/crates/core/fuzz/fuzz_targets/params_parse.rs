#![no_main]
use libfuzzer_sys::fuzz_target;
use lifted_tfhe::ParameterSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = ParameterSet::parse(text) {
        assert_eq!(ParameterSet::parse(&p.to_text()).unwrap(), p);
    }
});
