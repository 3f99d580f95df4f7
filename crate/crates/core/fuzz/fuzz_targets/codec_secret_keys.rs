#![no_main]
use libfuzzer_sys::fuzz_target;
use lifted_tfhe::codec;

fuzz_target!(|data: &[u8]| {
    let _ = codec::peek_header(data);
    if let Ok((params, sk)) = codec::decode_secret_keys(data) {
        assert_eq!(codec::encode_secret_keys(&params, &sk), data);
    }
});
