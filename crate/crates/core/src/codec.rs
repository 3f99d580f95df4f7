//! Versioned binary form for keys and ciphertexts.
//!
//! Layout, all little-endian 32-bit words after the magic:
//! `"TGLW"`, version, payload kind, the parameter echo (14 words), then the
//! payload. Lengths are checked against the echo before anything is
//! allocated.

use crate::bootstrap::{BootstrapKeyBundleSet, CloudKeySet};
use crate::error::{Error, Result};
use crate::keys::SecretKeys;
use crate::lattice::{KeySwitchingKey, LweCiphertext, TgswCiphertext, TrlweCiphertext};
use crate::params::ParameterSet;
use crate::torus::{Torus, TorusPolynomial};

pub const MAGIC: &[u8; 4] = b"TGLW";
pub const FORMAT_VERSION: u32 = 1;
const ECHO_WORDS: usize = 14;
const HEADER_BYTES: usize = 4 + 4 * (2 + ECHO_WORDS);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    SecretKeys = 1,
    CloudKeys = 2,
    LweList = 3,
}

impl PayloadKind {
    fn from_word(w: u32) -> Result<PayloadKind> {
        match w {
            1 => Ok(PayloadKind::SecretKeys),
            2 => Ok(PayloadKind::CloudKeys),
            3 => Ok(PayloadKind::LweList),
            _ => Err(Error::Decode(format!("unknown payload kind {w}"))),
        }
    }
}

fn decode_err(msg: impl Into<String>) -> Error {
    Error::Decode(msg.into())
}

struct Writer(Vec<u8>);

impl Writer {
    fn new(kind: PayloadKind, params: &ParameterSet, payload_words: usize) -> Writer {
        let mut w = Writer(Vec::with_capacity(HEADER_BYTES + 4 * payload_words));
        w.0.extend_from_slice(MAGIC);
        w.word(FORMAT_VERSION);
        w.word(kind as u32);
        for x in echo(params) {
            w.word(x);
        }
        w
    }

    fn word(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn torus(&mut self, xs: &[Torus]) {
        for x in xs {
            self.word(x.0);
        }
    }
}

fn echo(p: &ParameterSet) -> [u32; ECHO_WORDS] {
    let lwe = p.lwe_noise_stddev.to_bits();
    let trlwe = p.trlwe_noise_stddev.to_bits();
    [
        p.security_lambda,
        p.lwe_dimension as u32,
        p.ring_degree as u32,
        p.trlwe_dimension as u32,
        p.gadget_base_log,
        p.gadget_length as u32,
        p.ks_base_log,
        p.ks_length as u32,
        lwe as u32,
        (lwe >> 32) as u32,
        trlwe as u32,
        (trlwe >> 32) as u32,
        p.unroll_factor as u32,
        p.twiddle_bitwidth,
    ]
}

fn from_echo(w: &[u32]) -> Result<ParameterSet> {
    let p = ParameterSet {
        security_lambda: w[0],
        lwe_dimension: w[1] as usize,
        ring_degree: w[2] as usize,
        trlwe_dimension: w[3] as usize,
        gadget_base_log: w[4],
        gadget_length: w[5] as usize,
        ks_base_log: w[6],
        ks_length: w[7] as usize,
        lwe_noise_stddev: f64::from_bits(w[8] as u64 | (w[9] as u64) << 32),
        trlwe_noise_stddev: f64::from_bits(w[10] as u64 | (w[11] as u64) << 32),
        unroll_factor: w[12] as usize,
        twiddle_bitwidth: w[13],
    };
    p.validate().map_err(|e| decode_err(format!("parameter echo: {e}")))?;
    Ok(p)
}

struct Reader<'a> {
    words: std::slice::ChunksExact<'a, u8>,
}

impl Reader<'_> {
    fn word(&mut self) -> u32 {
        u32::from_le_bytes(self.words.next().expect("length checked").try_into().unwrap())
    }

    fn torus_poly(&mut self, n: usize) -> TorusPolynomial {
        TorusPolynomial { coeffs: (0..n).map(|_| Torus(self.word())).collect() }
    }
}

/// Kind and parameter echo of an encoded payload.
pub fn peek_header(bytes: &[u8]) -> Result<(PayloadKind, ParameterSet)> {
    if bytes.len() < HEADER_BYTES {
        return Err(decode_err("truncated header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(decode_err("bad magic"));
    }
    let words: Vec<u32> = bytes[4..HEADER_BYTES].chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
    if words[0] != FORMAT_VERSION {
        return Err(decode_err(format!("unsupported format version {}", words[0])));
    }
    Ok((PayloadKind::from_word(words[1])?, from_echo(&words[2..])?))
}

/// Checks the kind and that the payload holds exactly `payload_words` words.
fn open(bytes: &[u8], kind: PayloadKind, payload_words: impl FnOnce(&ParameterSet, &[u8]) -> Result<usize>) -> Result<(ParameterSet, Reader<'_>)> {
    let (found, params) = peek_header(bytes)?;
    if found != kind {
        return Err(decode_err(format!("expected {kind:?} payload, found {found:?}")));
    }
    let body = &bytes[HEADER_BYTES..];
    let want = payload_words(&params, body)?.checked_mul(4).ok_or_else(|| decode_err("payload size overflows"))?;
    if body.len() != want {
        return Err(decode_err(format!("payload is {} bytes, parameters require {want}", body.len())));
    }
    Ok((params, Reader { words: body.chunks_exact(4) }))
}

fn checked_product(xs: &[usize]) -> Result<usize> {
    xs.iter().try_fold(1usize, |a, &x| a.checked_mul(x)).ok_or_else(|| decode_err("payload size overflows"))
}

/// Rejects a payload whose parameter echo differs from `expected`.
pub fn require_params(found: &ParameterSet, expected: &ParameterSet) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(decode_err(format!("parameter echo mismatch: file has {}, expected {}", found.compact(), expected.compact())))
    }
}

pub fn encode_secret_keys(params: &ParameterSet, sk: &SecretKeys) -> Vec<u8> {
    let mut w = Writer::new(PayloadKind::SecretKeys, params, sk.lwe.len() + sk.extracted.len());
    for &b in sk.lwe.iter().chain(sk.trlwe.iter().flatten()) {
        w.word(b as u32);
    }
    w.0
}

pub fn decode_secret_keys(bytes: &[u8]) -> Result<(ParameterSet, SecretKeys)> {
    let (p, mut r) = open(bytes, PayloadKind::SecretKeys, |p, _| {
        Ok(p.lwe_dimension + checked_product(&[p.trlwe_dimension, p.ring_degree])?)
    })?;
    let mut bit = || match r.word() {
        w @ (0 | 1) => Ok(w as u8),
        w => Err(decode_err(format!("key bit {w} is not binary"))),
    };
    let lwe = (0..p.lwe_dimension).map(|_| bit()).collect::<Result<Vec<_>>>()?;
    let trlwe = (0..p.trlwe_dimension)
        .map(|_| (0..p.ring_degree).map(|_| bit()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok((p, SecretKeys::from_bits(lwe, trlwe)))
}

fn key_switch_words(p: &ParameterSet) -> Result<usize> {
    let entries = checked_product(&[p.extracted_dimension(), p.ks_length, (1usize << p.ks_base_log) - 1, p.lwe_dimension + 1])?;
    entries.checked_add(4).ok_or_else(|| decode_err("payload size overflows"))
}

fn bundle_words(p: &ParameterSet) -> Result<usize> {
    let k1 = p.trlwe_dimension + 1;
    checked_product(&[p.group_count(), p.keys_per_group(), p.tgsw_rows(), k1, p.ring_degree])
}

/// Bootstrapping keys in group order, each TGSW row by row, then the
/// key-switching key. Lagrange caches are not stored.
pub fn encode_cloud_keys(cloud: &CloudKeySet) -> Vec<u8> {
    let p = &cloud.params;
    let words = bundle_words(p).unwrap_or(0) + key_switch_words(p).unwrap_or(0);
    let mut w = Writer::new(PayloadKind::CloudKeys, p, words);
    for key in cloud.bundle_set.groups.iter().flatten() {
        for row in &key.rows {
            for comp in row.components() {
                w.torus(&comp.coeffs);
            }
        }
    }
    let ks = &cloud.ks;
    for x in [ks.input_dimension as u32, ks.output_dimension as u32, ks.base_log, ks.levels as u32] {
        w.word(x);
    }
    for &x in &ks.data {
        w.word(x);
    }
    w.0
}

pub fn decode_cloud_keys(bytes: &[u8]) -> Result<CloudKeySet> {
    let (p, mut r) = open(bytes, PayloadKind::CloudKeys, |p, _| {
        bundle_words(p)?.checked_add(key_switch_words(p)?).ok_or_else(|| decode_err("payload size overflows"))
    })?;
    let (n, k, l, bg) = (p.ring_degree, p.trlwe_dimension, p.gadget_length, p.gadget_base_log);
    let groups = (0..p.group_count())
        .map(|_| {
            (0..p.keys_per_group())
                .map(|_| {
                    let rows = (0..p.tgsw_rows())
                        .map(|_| {
                            let mask = (0..k).map(|_| r.torus_poly(n)).collect();
                            TrlweCiphertext { mask, body: r.torus_poly(n) }
                        })
                        .collect();
                    TgswCiphertext { gadget_base_log: bg, gadget_length: l, rows, lagrange_cache: None }
                })
                .collect()
        })
        .collect();
    let (input_dimension, output_dimension, base_log, levels) = (r.word() as usize, r.word() as usize, r.word(), r.word() as usize);
    if (input_dimension, output_dimension, base_log, levels) != (p.extracted_dimension(), p.lwe_dimension, p.ks_base_log, p.ks_length) {
        return Err(decode_err("key-switching key shape disagrees with the parameter echo"));
    }
    let data = r.words.by_ref().map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
    let ks = KeySwitchingKey { input_dimension, output_dimension, base_log, levels, data };
    ks.validate()?;
    Ok(CloudKeySet {
        bundle_set: BootstrapKeyBundleSet { unroll_factor: p.unroll_factor, lwe_dimension: p.lwe_dimension, groups },
        ks,
        params: p,
    })
}

/// A count word, then each ciphertext as mask followed by body.
pub fn encode_lwe_list(params: &ParameterSet, cts: &[LweCiphertext]) -> Result<Vec<u8>> {
    if let Some(c) = cts.iter().find(|c| c.dimension() != params.lwe_dimension) {
        return Err(Error::DimensionMismatch { expected: params.lwe_dimension, got: c.dimension() });
    }
    let mut w = Writer::new(PayloadKind::LweList, params, 1 + cts.len() * (params.lwe_dimension + 1));
    w.word(u32::try_from(cts.len()).map_err(|_| Error::OutOfRange("too many ciphertexts".into()))?);
    for c in cts {
        w.torus(&c.mask);
        w.word(c.body.0);
    }
    Ok(w.0)
}

pub fn decode_lwe_list(bytes: &[u8]) -> Result<(ParameterSet, Vec<LweCiphertext>)> {
    let (p, mut r) = open(bytes, PayloadKind::LweList, |p, body| {
        let count = body.get(..4).map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize).ok_or_else(|| decode_err("missing count"))?;
        checked_product(&[count, p.lwe_dimension + 1])?.checked_add(1).ok_or_else(|| decode_err("payload size overflows"))
    })?;
    let count = r.word() as usize;
    let n = p.lwe_dimension;
    let cts = (0..count)
        .map(|_| {
            let mask = (0..n).map(|_| Torus(r.word())).collect();
            LweCiphertext { mask, body: Torus(r.word()) }
        })
        .collect();
    Ok((p, cts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::generate_cloud_keys;
    use crate::keys::sample_secret_keys;
    use crate::rng::DetRng;

    fn toy() -> (ParameterSet, SecretKeys, CloudKeySet) {
        let p = ParameterSet::toy(5, 16).with_unroll(2).unwrap();
        let sk = sample_secret_keys(&p, 1).unwrap();
        let cloud = generate_cloud_keys(&sk, &p, &mut DetRng::new(2)).unwrap();
        (p, sk, cloud)
    }

    #[test]
    fn round_trips() {
        let (p, sk, cloud) = toy();
        let (p2, sk2) = decode_secret_keys(&encode_secret_keys(&p, &sk)).unwrap();
        assert_eq!((p2, sk2), (p.clone(), sk));
        assert_eq!(decode_cloud_keys(&encode_cloud_keys(&cloud)).unwrap(), cloud);
        let mut rng = DetRng::new(3);
        let cts: Vec<LweCiphertext> = (0..3)
            .map(|_| {
                let mut c = LweCiphertext::zero(5);
                rng.fill_uniform(&mut c.mask);
                c.body = rng.uniform_torus();
                c
            })
            .collect();
        let bytes = encode_lwe_list(&p, &cts).unwrap();
        assert_eq!(decode_lwe_list(&bytes).unwrap(), (p.clone(), cts));
        assert!(encode_lwe_list(&p, &[LweCiphertext::zero(4)]).is_err());
    }

    #[test]
    fn rejects_corruption() {
        let (p, sk, cloud) = toy();
        let bytes = encode_secret_keys(&p, &sk);
        assert!(decode_secret_keys(&bytes[..bytes.len() - 4]).is_err());
        assert!(decode_cloud_keys(&bytes).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_secret_keys(&bad).is_err());
        let mut bad = bytes.clone();
        let last = bad.len() - 4;
        bad[last] = 2;
        assert!(decode_secret_keys(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(decode_secret_keys(&bad).is_err());
        let cloud_bytes = encode_cloud_keys(&cloud);
        let mut bad = cloud_bytes.clone();
        bad[HEADER_BYTES - 8] = 7;
        assert!(decode_cloud_keys(&bad).is_err());
        let mut huge = encode_lwe_list(&p, &[]).unwrap();
        huge[HEADER_BYTES..HEADER_BYTES + 4].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_lwe_list(&huge).is_err());
    }

    #[test]
    fn echo_mismatch_is_reported() {
        let (p, _, _) = toy();
        let other = p.with_unroll(1).unwrap();
        assert!(require_params(&p, &p).is_ok());
        assert!(require_params(&p, &other).is_err());
    }
}
