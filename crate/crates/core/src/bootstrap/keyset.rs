use rayon::prelude::*;

use crate::error::{check_len, Result};
use crate::keys::SecretKeys;
use crate::lattice::{tgsw_encrypt_constant, KeySwitchingKey, TgswCiphertext};
use crate::params::ParameterSet;
use crate::rng::DetRng;
use crate::transform::{Backend, TransformCounters};

/// Unrolled bootstrapping keys: group `g` covers secret bits `g·m .. g·m+m`.
///
/// Key `p - 1` of a group, for a nonzero bit pattern `p` (bit `j` selects
/// member `j`), encrypts `∏_{j∈p} s_j · ∏_{j∉p} (1 - s_j)`. Members past
/// the key length count as zero bits.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapKeyBundleSet {
    pub unroll_factor: usize,
    pub lwe_dimension: usize,
    pub groups: Vec<Vec<TgswCiphertext>>,
}

impl BootstrapKeyBundleSet {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn keys_per_group(&self) -> usize {
        (1 << self.unroll_factor) - 1
    }

    pub fn key_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Secret-bit indices covered by group `g`, padding excluded.
    pub fn members(&self, g: usize) -> std::ops::Range<usize> {
        let start = g * self.unroll_factor;
        start..(start + self.unroll_factor).min(self.lwe_dimension)
    }

    pub fn is_prepared(&self) -> bool {
        self.groups.iter().flatten().all(|k| k.lagrange_cache.is_some())
    }
}

/// Product indicator of pattern `p` for the group bits `bits`.
pub fn pattern_indicator(p: usize, bits: &[u8]) -> u8 {
    bits.iter().enumerate().all(|(j, &b)| (p >> j & 1) as u8 == b) as u8
}

/// Bootstrapping and key-switching keys.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudKeySet {
    pub params: ParameterSet,
    pub bundle_set: BootstrapKeyBundleSet,
    pub ks: KeySwitchingKey,
}

pub fn generate_cloud_keys(sk: &SecretKeys, params: &ParameterSet, rng: &mut DetRng) -> Result<CloudKeySet> {
    params.validate()?;
    check_len(params.lwe_dimension, sk.lwe.len())?;
    check_len(params.trlwe_dimension, sk.trlwe.len())?;
    let m = params.unroll_factor;
    let seed = rng.next_u64();
    let groups = (0..params.group_count())
        .into_par_iter()
        .map(|g| {
            let mut grng = DetRng::stream(seed, g as u64);
            let bits: Vec<u8> = (0..m).map(|j| sk.lwe.get(g * m + j).copied().unwrap_or(0)).collect();
            (1..1usize << m)
                .map(|p| tgsw_encrypt_constant(pattern_indicator(p, &bits) as i32, &sk.trlwe, params, &mut grng))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut krng = DetRng::stream(seed, u64::MAX);
    let ks = KeySwitchingKey::generate(&sk.extracted, &sk.lwe, params.ks_base_log, params.ks_length, params.lwe_noise_stddev, &mut krng)?;
    Ok(CloudKeySet {
        params: params.clone(),
        bundle_set: BootstrapKeyBundleSet { unroll_factor: m, lwe_dimension: params.lwe_dimension, groups },
        ks,
    })
}

impl CloudKeySet {
    /// Caches every bootstrapping key in `backend`'s Lagrange representation.
    pub fn prepare(&mut self, backend: &Backend) -> Result<TransformCounters> {
        check_len(self.params.ring_degree, backend.ring_degree())?;
        let counters = self
            .bundle_set
            .groups
            .par_iter_mut()
            .flatten()
            .map(|key| {
                let mut c = TransformCounters::default();
                key.prepare(backend, &mut c).map(|_| c)
            })
            .try_reduce(TransformCounters::default, |mut a, b| {
                a.merge(&b);
                Ok(a)
            })?;
        Ok(counters)
    }

    pub fn prepared(mut self, backend: &Backend) -> Result<CloudKeySet> {
        self.prepare(backend)?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::sample_secret_keys;
    use crate::lattice::trlwe_decrypt;

    #[test]
    fn indicators_are_exclusive() {
        for m in 1..=4usize {
            for assignment in 0..1usize << m {
                let bits: Vec<u8> = (0..m).map(|j| (assignment >> j & 1) as u8).collect();
                let ones: Vec<usize> = (1..1 << m).filter(|&p| pattern_indicator(p, &bits) == 1).collect();
                if assignment == 0 {
                    assert!(ones.is_empty());
                } else {
                    assert_eq!(ones, vec![assignment]);
                }
            }
        }
    }

    #[test]
    fn key_counts_and_messages() {
        for m in [1usize, 2, 3] {
            let mut params = ParameterSet::toy(7, 16).with_unroll(m).unwrap();
            params.trlwe_noise_stddev = 0.0;
            let sk = sample_secret_keys(&params, 11).unwrap();
            let cloud = generate_cloud_keys(&sk, &params, &mut DetRng::new(1)).unwrap();
            let set = &cloud.bundle_set;
            assert_eq!(set.group_count(), 7usize.div_ceil(m));
            assert_eq!(set.key_count(), set.group_count() * ((1 << m) - 1));
            for (g, keys) in set.groups.iter().enumerate() {
                let mut bits: Vec<u8> = set.members(g).map(|i| sk.lwe[i]).collect();
                bits.resize(m, 0);
                for (idx, key) in keys.iter().enumerate() {
                    let last = &key.rows[key.rows.len() - 3];
                    let msg = trlwe_decrypt(last, &sk.trlwe, 10).unwrap().coeffs[0];
                    let want = pattern_indicator(idx + 1, &bits) as u32;
                    assert_eq!(msg.0 >> 22, want, "m {m} group {g} key {idx}");
                }
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let params = ParameterSet::toy(4, 16).with_unroll(2).unwrap();
        let sk = sample_secret_keys(&params, 2).unwrap();
        let a = generate_cloud_keys(&sk, &params, &mut DetRng::new(3)).unwrap();
        let b = generate_cloud_keys(&sk, &params, &mut DetRng::new(3)).unwrap();
        assert_eq!(a, b);
    }
}
