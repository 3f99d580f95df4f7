//! Gate bootstrapping with unrolled bootstrapping keys.

pub mod blind_rotate;
pub mod bundle;
pub mod gate;
pub mod keyset;

pub use blind_rotate::{blind_rotate, blind_rotate_with, RotationMode};
pub use bundle::{build_bundle, build_bundle_lagrange, pattern_exponents};
pub use gate::{
    bootstrap_program, decrypt_bit, encode_bit, encrypt_bit, eval_gate, eval_gate_with, gate_bootstrap, gate_linear,
    half_bootstrap, rotate_and_extract, GateKind, Program, GATE_MU,
};
pub use keyset::{generate_cloud_keys, pattern_indicator, BootstrapKeyBundleSet, CloudKeySet};
