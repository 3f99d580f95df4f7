#![no_main]
use libfuzzer_sys::fuzz_target;
use lifted_tfhe::codec;

fuzz_target!(|data: &[u8]| {
    if let Ok(cloud) = codec::decode_cloud_keys(data) {
        assert_eq!(codec::encode_cloud_keys(&cloud), data);
    }
});
