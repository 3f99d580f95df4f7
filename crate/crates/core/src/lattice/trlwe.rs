use crate::error::{check_len, Result};
use crate::rng::{sample_torus_gaussian, DetRng};
use crate::torus::{Torus, TorusPolynomial};

/// Ring ciphertext `(a_1..a_k, b)` with `b = Σ a_i·s_i + e + μ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrlweCiphertext {
    pub mask: Vec<TorusPolynomial>,
    pub body: TorusPolynomial,
}

impl TrlweCiphertext {
    pub fn zero(k: usize, n: usize) -> TrlweCiphertext {
        TrlweCiphertext { mask: vec![TorusPolynomial::zero(n); k], body: TorusPolynomial::zero(n) }
    }

    pub fn trivial(k: usize, mu: TorusPolynomial) -> TrlweCiphertext {
        let n = mu.len();
        TrlweCiphertext { mask: vec![TorusPolynomial::zero(n); k], body: mu }
    }

    pub fn ring_degree(&self) -> usize {
        self.body.len()
    }

    pub fn mask_count(&self) -> usize {
        self.mask.len()
    }

    /// Component `c`, the body being component `k`.
    pub fn component(&self, c: usize) -> &TorusPolynomial {
        if c < self.mask.len() {
            &self.mask[c]
        } else {
            &self.body
        }
    }

    pub fn component_mut(&mut self, c: usize) -> &mut TorusPolynomial {
        if c < self.mask.len() {
            &mut self.mask[c]
        } else {
            &mut self.body
        }
    }

    pub fn components(&self) -> impl Iterator<Item = &TorusPolynomial> {
        self.mask.iter().chain(std::iter::once(&self.body))
    }

    fn check_shape(&self, o: &TrlweCiphertext) -> Result<()> {
        check_len(self.mask.len(), o.mask.len())?;
        check_len(self.ring_degree(), o.ring_degree())
    }

    pub fn add_assign(&mut self, o: &TrlweCiphertext) -> Result<()> {
        self.check_shape(o)?;
        for (a, b) in self.mask.iter_mut().zip(&o.mask) {
            a.add_assign(b);
        }
        self.body.add_assign(&o.body);
        Ok(())
    }

    pub fn sub_assign(&mut self, o: &TrlweCiphertext) -> Result<()> {
        self.check_shape(o)?;
        for (a, b) in self.mask.iter_mut().zip(&o.mask) {
            a.sub_assign(b);
        }
        self.body.sub_assign(&o.body);
        Ok(())
    }

    /// `X^e · self` for `e` in `[0, 2N)`.
    pub fn mul_monomial(&self, e: usize) -> TrlweCiphertext {
        TrlweCiphertext {
            mask: self.mask.iter().map(|a| a.mul_monomial(e)).collect(),
            body: self.body.mul_monomial(e),
        }
    }
}

fn check_key(s: &[Vec<u8>], n: usize) -> Result<()> {
    for key in s {
        check_len(n, key.len())?;
    }
    Ok(())
}

pub fn trlwe_encrypt(mu: &TorusPolynomial, s: &[Vec<u8>], stddev: f64, rng: &mut DetRng) -> Result<TrlweCiphertext> {
    let n = mu.len();
    check_key(s, n)?;
    let mut body = mu.clone();
    for c in body.coeffs.iter_mut() {
        *c += sample_torus_gaussian(stddev, rng);
    }
    let mut mask = Vec::with_capacity(s.len());
    for key in s {
        let mut a = TorusPolynomial::zero(n);
        rng.fill_uniform(&mut a.coeffs);
        body.add_assign(&a.mul_binary(key));
        mask.push(a);
    }
    Ok(TrlweCiphertext { mask, body })
}

/// `b - Σ a_i·s_i`.
pub fn trlwe_phase(c: &TrlweCiphertext, s: &[Vec<u8>]) -> Result<TorusPolynomial> {
    check_len(c.mask.len(), s.len())?;
    check_key(s, c.ring_degree())?;
    let mut phase = c.body.clone();
    for (a, key) in c.mask.iter().zip(s) {
        phase.sub_assign(&a.mul_binary(key));
    }
    Ok(phase)
}

/// Phase rounded to the grid of multiples of `2^-grid_log`.
pub fn trlwe_decrypt(c: &TrlweCiphertext, s: &[Vec<u8>], grid_log: u32) -> Result<TorusPolynomial> {
    let mut p = trlwe_phase(c, s)?;
    for x in p.coeffs.iter_mut() {
        *x = round_to_grid(*x, grid_log);
    }
    Ok(p)
}

pub fn round_to_grid(x: Torus, grid_log: u32) -> Torus {
    if grid_log >= 32 {
        return x;
    }
    let drop = 32 - grid_log;
    Torus((x.0.wrapping_add(1 << (drop - 1)) >> drop) << drop)
}
