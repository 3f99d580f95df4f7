#![no_main]
use libfuzzer_sys::fuzz_target;
use lifted_tfhe::codec;

fuzz_target!(|data: &[u8]| {
    if let Ok((params, cts)) = codec::decode_lwe_list(data) {
        assert_eq!(codec::encode_lwe_list(&params, &cts).unwrap(), data);
    }
});
