use super::lwe::{lwe_encrypt_torus, LweCiphertext};
use crate::error::{check_len, Error, Result};
use crate::rng::DetRng;
use crate::torus::Torus;

/// Encryptions of `v·s'_i / base^(j+1)` for every input coefficient `i`,
/// level `j < t` and digit `v` in `1..base`, stored flat as `[mask.., body]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySwitchingKey {
    pub input_dimension: usize,
    pub output_dimension: usize,
    pub base_log: u32,
    pub levels: usize,
    pub data: Vec<u32>,
}

impl KeySwitchingKey {
    pub fn generate(input_key: &[u8], output_key: &[u8], base_log: u32, levels: usize, stddev: f64, rng: &mut DetRng) -> Result<KeySwitchingKey> {
        Self::check_shape(base_log, levels)?;
        let base = 1usize << base_log;
        let n = output_key.len();
        let mut data = Vec::with_capacity(input_key.len() * levels * (base - 1) * (n + 1));
        for &bit in input_key {
            for j in 0..levels {
                let unit = 1u64 << (32 - base_log as usize * (j + 1));
                for v in 1..base {
                    let mu = Torus((v as u64 * unit * bit as u64) as u32);
                    let c = lwe_encrypt_torus(mu, output_key, stddev, rng);
                    data.extend(c.mask.iter().map(|t| t.0));
                    data.push(c.body.0);
                }
            }
        }
        Ok(KeySwitchingKey { input_dimension: input_key.len(), output_dimension: n, base_log, levels, data })
    }

    pub(crate) fn check_shape(base_log: u32, levels: usize) -> Result<()> {
        if levels == 0 {
            return Err(Error::InvalidParams("key switching needs at least one level".into()));
        }
        if base_log == 0 || base_log as usize * levels > 32 {
            return Err(Error::InvalidParams("key switching base_log * levels must be in [1, 32]".into()));
        }
        Ok(())
    }

    pub fn entry_count(&self) -> usize {
        self.input_dimension * self.levels * ((1 << self.base_log) - 1)
    }

    /// Checks that `data` has the size implied by the shape.
    pub fn validate(&self) -> Result<()> {
        Self::check_shape(self.base_log, self.levels)?;
        check_len(self.entry_count() * (self.output_dimension + 1), self.data.len())
    }

    pub fn entry(&self, i: usize, j: usize, v: usize) -> LweCiphertext {
        let stride = self.output_dimension + 1;
        let idx = ((i * self.levels + j) * ((1 << self.base_log) - 1) + v - 1) * stride;
        let row = &self.data[idx..idx + stride];
        LweCiphertext { mask: row[..stride - 1].iter().map(|&x| Torus(x)).collect(), body: Torus(row[stride - 1]) }
    }
}

/// Re-encrypts `c` under the output key of `ks`.
pub fn key_switch(c: &LweCiphertext, ks: &KeySwitchingKey) -> Result<LweCiphertext> {
    check_len(ks.input_dimension, c.dimension())?;
    let stride = ks.output_dimension + 1;
    let precision = ks.base_log * ks.levels as u32;
    let round = if precision < 32 { 1u32 << (32 - precision - 1) } else { 0 };
    let digit_mask = (1u32 << ks.base_log) - 1;
    let per_level = digit_mask as usize;
    let mut acc = vec![0u32; stride];
    acc[stride - 1] = c.body.0;
    for (i, a) in c.mask.iter().enumerate() {
        let x = a.0.wrapping_add(round);
        for j in 0..ks.levels {
            let v = ((x >> (32 - ks.base_log * (j as u32 + 1))) & digit_mask) as usize;
            if v == 0 {
                continue;
            }
            let idx = ((i * ks.levels + j) * per_level + v - 1) * stride;
            for (d, &s) in acc.iter_mut().zip(&ks.data[idx..idx + stride]) {
                *d = d.wrapping_sub(s);
            }
        }
    }
    let body = Torus(acc[stride - 1]);
    acc.truncate(stride - 1);
    Ok(LweCiphertext { mask: acc.into_iter().map(Torus).collect(), body })
}
