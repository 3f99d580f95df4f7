//! LWE, ring LWE and GSW ciphertext algebra.

pub mod extract;
pub mod keyswitch;
pub mod lwe;
pub mod tgsw;
pub mod trlwe;

pub use extract::sample_extract;
pub use keyswitch::{key_switch, KeySwitchingKey};
pub use lwe::{decode_sign, lwe_decrypt, lwe_encrypt, lwe_encrypt_torus, lwe_phase, LweCiphertext};
pub use tgsw::{
    decompose_trlwe, external_product, external_product_lagrange, gadget_decompose, gadget_value, tgsw_encrypt,
    tgsw_encrypt_constant, TgswCiphertext, TgswLagrange,
};
pub use trlwe::{round_to_grid, trlwe_decrypt, trlwe_encrypt, trlwe_phase, TrlweCiphertext};
