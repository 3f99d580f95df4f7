use crate::error::Result;
use crate::params::ParameterSet;
use crate::rng::{streams, DetRng};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKeys {
    /// `s`, the LWE key.
    pub lwe: Vec<u8>,
    /// `s''`, one binary polynomial per ring mask component.
    pub trlwe: Vec<Vec<u8>>,
    /// `s'`, the coefficients of `s''` read as an LWE key of dimension `N·k`.
    pub extracted: Vec<u8>,
}

impl SecretKeys {
    pub fn from_bits(lwe: Vec<u8>, trlwe: Vec<Vec<u8>>) -> SecretKeys {
        let extracted = key_extract(&trlwe);
        SecretKeys { lwe, trlwe, extracted }
    }
}

pub fn key_extract(trlwe: &[Vec<u8>]) -> Vec<u8> {
    trlwe.iter().flatten().copied().collect()
}

pub fn sample_secret_keys(params: &ParameterSet, seed: u64) -> Result<SecretKeys> {
    params.validate()?;
    let mut rng = DetRng::stream(seed, streams::SECRET_KEYS);
    let lwe = (0..params.lwe_dimension).map(|_| rng.bit()).collect();
    let trlwe = (0..params.trlwe_dimension)
        .map(|_| (0..params.ring_degree).map(|_| rng.bit()).collect())
        .collect();
    Ok(SecretKeys::from_bits(lwe, trlwe))
}
