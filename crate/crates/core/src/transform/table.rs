//! Dyadic twiddle tables.
//!
//! Entry `j` of a table for degree `N` realizes the rotation by `πj/N` for
//! `j < N/2`. The negacyclic twist reads every entry once; a butterfly of
//! size `s` at position `k` reads entry `k·2N/s`, the conjugate being
//! derived from the same entry.

use num_bigint::BigInt;

use super::dyadic::{DyadicCoefficient, Rotation};
use super::hp;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DYTW";
const VERSION: u16 = 1;
const ENTRY_BYTES: usize = 1 + 16 + 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicTwiddleTable {
    pub ring_degree: usize,
    pub beta: u32,
    pub entries: Vec<Rotation>,
}

fn validate_shape(ring_degree: usize, beta: u32) -> Result<()> {
    if !ring_degree.is_power_of_two() || !(4..=1 << 16).contains(&ring_degree) {
        return Err(Error::OutOfRange(format!("ring degree {ring_degree} must be a power of two in [4, 65536]")));
    }
    if !(4..=64).contains(&beta) {
        return Err(Error::OutOfRange(format!("beta {beta} not in [4, 64]")));
    }
    Ok(())
}

pub fn build_twiddle_table(ring_degree: usize, beta: u32) -> Result<DyadicTwiddleTable> {
    validate_shape(ring_degree, beta)?;
    let n = ring_degree as i64;
    let pi = hp::pi();
    let entries = (0..ring_degree as i64 / 2)
        .map(|j| {
            let (quarter, r) = if 4 * j <= n {
                (0u8, &pi * BigInt::from(j) / BigInt::from(n))
            } else {
                (1u8, &pi * BigInt::from(2 * j - n) / BigInt::from(2 * n))
            };
            let (p, u) = hp::lifting_pair(&r);
            Rotation::new(
                quarter,
                DyadicCoefficient::from_alpha(hp::quantize(&p, beta), beta),
                DyadicCoefficient::from_alpha(hp::quantize(&u, beta), beta),
            )
        })
        .collect();
    Ok(DyadicTwiddleTable { ring_degree, beta, entries })
}

impl DyadicTwiddleTable {
    pub fn half(&self) -> usize {
        self.ring_degree / 2
    }

    /// Rotation by `π·r/N` for any `r`, as `(entry, extra quarter turns)`.
    pub fn root(&self, r: usize) -> (&Rotation, u8) {
        let m = self.half();
        let r = r % (2 * self.ring_degree);
        (&self.entries[r % m], (r / m) as u8)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.entries.len() * ENTRY_BYTES);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(&(self.ring_degree as u32).to_le_bytes());
        out.extend_from_slice(&self.beta.to_le_bytes());
        for e in &self.entries {
            out.push(e.quarter);
            out.extend_from_slice(&e.p.alpha.to_le_bytes());
            out.extend_from_slice(&e.u.alpha.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<DyadicTwiddleTable> {
        let err = |m: &str| Error::Decode(format!("twiddle table: {m}"));
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(err("bad magic"));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(err("unsupported version"));
        }
        let ring_degree = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let beta = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
        validate_shape(ring_degree, beta).map_err(|e| err(&e.to_string()))?;
        let body = &bytes[16..];
        if body.len() != ring_degree / 2 * ENTRY_BYTES {
            return Err(err("length does not match ring degree"));
        }
        let limit = 1i128 << beta;
        let entries = body
            .chunks_exact(ENTRY_BYTES)
            .map(|c| {
                let quarter = c[0];
                let p = i128::from_le_bytes(c[1..17].try_into().unwrap());
                let u = i128::from_le_bytes(c[17..33].try_into().unwrap());
                if quarter > 3 || p.abs() > limit || u.abs() > limit {
                    return Err(err("entry out of range"));
                }
                Ok(Rotation::new(
                    quarter,
                    DyadicCoefficient::from_alpha(p, beta),
                    DyadicCoefficient::from_alpha(u, beta),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DyadicTwiddleTable { ring_degree, beta, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(build_twiddle_table(64, 38).unwrap(), build_twiddle_table(64, 38).unwrap());
    }

    #[test]
    fn codec_round_trip() {
        let t = build_twiddle_table(32, 64).unwrap();
        let bytes = t.encode();
        assert_eq!(DyadicTwiddleTable::decode(&bytes).unwrap(), t);
        assert!(DyadicTwiddleTable::decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(DyadicTwiddleTable::decode(&bad).is_err());
    }

    #[test]
    fn invalid_degree() {
        assert!(build_twiddle_table(12, 32).is_err());
        assert!(build_twiddle_table(2, 32).is_err());
    }

    #[test]
    fn entries_track_true_angles() {
        let t = build_twiddle_table(64, 40).unwrap();
        for (j, e) in t.entries.iter().enumerate() {
            let th = std::f64::consts::PI * j as f64 / 64.0;
            let (c, s) = e.realized();
            assert!((c - th.cos()).abs() < 1e-11 && (s - th.sin()).abs() < 1e-11, "entry {j}");
        }
    }
}
