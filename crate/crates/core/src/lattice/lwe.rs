use crate::error::{check_len, Error, Result};
use crate::params::ParameterSet;
use crate::rng::{sample_torus_gaussian, DetRng};
use crate::torus::Torus;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LweCiphertext {
    pub mask: Vec<Torus>,
    pub body: Torus,
}

impl LweCiphertext {
    pub fn zero(n: usize) -> LweCiphertext {
        LweCiphertext { mask: vec![Torus::ZERO; n], body: Torus::ZERO }
    }

    /// Noiseless zero-mask encryption of `mu`.
    pub fn trivial(n: usize, mu: Torus) -> LweCiphertext {
        LweCiphertext { mask: vec![Torus::ZERO; n], body: mu }
    }

    pub fn dimension(&self) -> usize {
        self.mask.len()
    }

    pub fn add_assign(&mut self, o: &LweCiphertext) -> Result<()> {
        check_len(self.dimension(), o.dimension())?;
        for (a, &b) in self.mask.iter_mut().zip(&o.mask) {
            *a += b;
        }
        self.body += o.body;
        Ok(())
    }

    pub fn sub_assign(&mut self, o: &LweCiphertext) -> Result<()> {
        check_len(self.dimension(), o.dimension())?;
        for (a, &b) in self.mask.iter_mut().zip(&o.mask) {
            *a -= b;
        }
        self.body -= o.body;
        Ok(())
    }

    pub fn negate(&self) -> LweCiphertext {
        LweCiphertext { mask: self.mask.iter().map(|&a| -a).collect(), body: -self.body }
    }

    pub fn scaled(&self, k: i32) -> LweCiphertext {
        LweCiphertext { mask: self.mask.iter().map(|&a| a * k).collect(), body: self.body * k }
    }

    pub fn add_constant(&mut self, mu: Torus) {
        self.body += mu;
    }
}

/// `(a, a·s + e + mu)` with `a` uniform.
pub fn lwe_encrypt_torus(mu: Torus, s: &[u8], stddev: f64, rng: &mut DetRng) -> LweCiphertext {
    let mut mask = vec![Torus::ZERO; s.len()];
    rng.fill_uniform(&mut mask);
    let body = dot(&mask, s) + sample_torus_gaussian(stddev, rng) + mu;
    LweCiphertext { mask, body }
}

/// Encrypts the bit `m` as `m/2`.
pub fn lwe_encrypt(m: u8, s: &[u8], params: &ParameterSet, rng: &mut DetRng) -> Result<LweCiphertext> {
    if m > 1 {
        return Err(Error::OutOfRange(format!("message {m} is not a bit")));
    }
    check_len(params.lwe_dimension, s.len())?;
    Ok(lwe_encrypt_torus(Torus((m as u32) << 31), s, params.lwe_noise_stddev, rng))
}

pub(crate) fn dot(a: &[Torus], s: &[u8]) -> Torus {
    let mut acc = 0u32;
    for (&x, &b) in a.iter().zip(s) {
        acc = acc.wrapping_add(x.0 & (b as u32).wrapping_neg());
    }
    Torus(acc)
}

/// `b - a·s`.
pub fn lwe_phase(c: &LweCiphertext, s: &[u8]) -> Result<Torus> {
    check_len(c.dimension(), s.len())?;
    Ok(c.body - dot(&c.mask, s))
}

/// `⌈2·phase⌋ mod 2`.
pub fn lwe_decrypt(c: &LweCiphertext, s: &[u8]) -> Result<u8> {
    Ok(round_half(lwe_phase(c, s)?))
}

pub(crate) fn round_half(phase: Torus) -> u8 {
    ((phase.0.wrapping_add(1 << 30) >> 31) & 1) as u8
}

/// Sign decoding of the gate encoding: positive phase is `true`.
pub fn decode_sign(phase: Torus) -> u8 {
    (phase.signed() > 0) as u8
}
