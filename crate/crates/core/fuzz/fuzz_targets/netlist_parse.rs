#![no_main]
use libfuzzer_sys::fuzz_target;
use lifted_tfhe::netlist::Netlist;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(n) = Netlist::parse(text) {
        let back = Netlist::parse(&n.to_text()).unwrap();
        assert_eq!(back, n);
        let zeros = vec![0u8; n.inputs.len()];
        assert_eq!(back.eval_plain(&zeros).unwrap().len(), n.outputs.len());
    }
});
