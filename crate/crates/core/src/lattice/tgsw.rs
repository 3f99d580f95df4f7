use super::trlwe::{trlwe_encrypt, TrlweCiphertext};
use crate::error::{check_len, Error, Result};
use crate::params::ParameterSet;
use crate::rng::DetRng;
use crate::torus::{IntPolynomial, Torus, TorusPolynomial};
use crate::transform::{Backend, LagrangeRep, TransformCounters};

/// Rows ordered `block·l + j`: blocks `0..k` act on mask components, block `k` on the body.
#[derive(Debug, Clone, PartialEq)]
pub struct TgswCiphertext {
    pub gadget_base_log: u32,
    pub gadget_length: usize,
    pub rows: Vec<TrlweCiphertext>,
    pub lagrange_cache: Option<TgswLagrange>,
}

/// Rows in the Lagrange representation, `rows[r][c]` for component `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct TgswLagrange {
    pub gadget_base_log: u32,
    pub gadget_length: usize,
    /// Twiddle bitwidth of the producing backend, `None` for the reference.
    pub beta: Option<u32>,
    pub rows: Vec<Vec<LagrangeRep>>,
    /// Bound on every real or imaginary magnitude of the fixed-point rows.
    pub peak: u64,
}

pub(crate) fn fixed_peak(rows: &[Vec<LagrangeRep>]) -> u64 {
    rows.iter()
        .flatten()
        .filter_map(|r| r.as_fixed())
        .flat_map(|(v, _)| v.iter().map(|c| c.re.unsigned_abs().max(c.im.unsigned_abs())))
        .max()
        .unwrap_or(0)
}

/// Torus value `1/Bg^(j+1)`.
pub fn gadget_value(gadget_base_log: u32, j: usize) -> Torus {
    let shift = 32 - gadget_base_log as i64 * (j as i64 + 1);
    if shift < 0 {
        Torus::ZERO
    } else {
        Torus((1u64 << shift) as u32)
    }
}

fn add_scaled_constant(p: &mut TorusPolynomial, m: &IntPolynomial, g: Torus) {
    for (c, &mi) in p.coeffs.iter_mut().zip(&m.coeffs) {
        *c += g * mi;
    }
}

pub fn tgsw_encrypt(m: &IntPolynomial, s: &[Vec<u8>], params: &ParameterSet, rng: &mut DetRng) -> Result<TgswCiphertext> {
    let (k, n, l) = (params.trlwe_dimension, params.ring_degree, params.gadget_length);
    check_len(k, s.len())?;
    check_len(n, m.len())?;
    let zero = TorusPolynomial::zero(n);
    let mut rows = Vec::with_capacity((k + 1) * l);
    for block in 0..=k {
        for j in 0..l {
            let mut row = trlwe_encrypt(&zero, s, params.trlwe_noise_stddev, rng)?;
            add_scaled_constant(row.component_mut(block), m, gadget_value(params.gadget_base_log, j));
            rows.push(row);
        }
    }
    Ok(TgswCiphertext { gadget_base_log: params.gadget_base_log, gadget_length: l, rows, lagrange_cache: None })
}

pub fn tgsw_encrypt_constant(bit: i32, s: &[Vec<u8>], params: &ParameterSet, rng: &mut DetRng) -> Result<TgswCiphertext> {
    let mut m = IntPolynomial::zero(params.ring_degree);
    m.coeffs[0] = bit;
    tgsw_encrypt(&m, s, params, rng)
}

impl TgswCiphertext {
    pub fn mask_count(&self) -> usize {
        self.rows.len() / self.gadget_length - 1
    }

    pub fn ring_degree(&self) -> usize {
        self.rows[0].ring_degree()
    }

    /// Noiseless TGSW of zero with the given shape.
    pub fn zero(k: usize, n: usize, gadget_base_log: u32, gadget_length: usize) -> TgswCiphertext {
        TgswCiphertext {
            gadget_base_log,
            gadget_length,
            rows: vec![TrlweCiphertext::zero(k, n); (k + 1) * gadget_length],
            lagrange_cache: None,
        }
    }

    /// Adds `c·h`, the gadget matrix times a constant.
    pub fn add_gadget(&mut self, c: i32) {
        let l = self.gadget_length;
        for (r, row) in self.rows.iter_mut().enumerate() {
            let g = gadget_value(self.gadget_base_log, r % l) * c;
            row.component_mut(r / l).coeffs[0] += g;
        }
        self.lagrange_cache = None;
    }

    pub fn add_assign(&mut self, o: &TgswCiphertext) -> Result<()> {
        check_len(self.rows.len(), o.rows.len())?;
        for (a, b) in self.rows.iter_mut().zip(&o.rows) {
            a.add_assign(b)?;
        }
        self.lagrange_cache = None;
        Ok(())
    }

    /// `(X^e - 1)·self`.
    pub fn mul_monomial_minus_one(&self, e: usize) -> Result<TgswCiphertext> {
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut r = row.mul_monomial(e);
            r.sub_assign(row)?;
            rows.push(r);
        }
        Ok(TgswCiphertext { rows, lagrange_cache: None, ..*self })
    }

    pub fn to_lagrange(&self, backend: &Backend, counters: &mut TransformCounters) -> Result<TgswLagrange> {
        let rows = self
            .rows
            .iter()
            .map(|row| row.components().map(|p| backend.forward_torus(p, counters)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(TgswLagrange {
            gadget_base_log: self.gadget_base_log,
            gadget_length: self.gadget_length,
            beta: backend.beta(),
            peak: fixed_peak(&rows),
            rows,
        })
    }

    pub fn prepare(&mut self, backend: &Backend, counters: &mut TransformCounters) -> Result<()> {
        self.lagrange_cache = Some(self.to_lagrange(backend, counters)?);
        Ok(())
    }
}

/// Balanced base-`2^gadget_base_log` digits in `(-Bg/2, Bg/2]`, most significant first.
pub fn gadget_decompose(p: &TorusPolynomial, gadget_base_log: u32, gadget_length: usize) -> Vec<IntPolynomial> {
    let mut out = vec![IntPolynomial::zero(p.len()); gadget_length];
    decompose_into(p, gadget_base_log, &mut out);
    out
}

fn decompose_into(p: &TorusPolynomial, bg: u32, out: &mut [IntPolynomial]) {
    let l = out.len() as u32;
    let half_minus_one = (1u32 << (bg - 1)) - 1;
    let mut offset = 0u32;
    for j in 0..l {
        offset = offset.wrapping_add(half_minus_one << (32 - bg * (j + 1)));
    }
    if bg * l < 32 {
        offset = offset.wrapping_add(1 << (32 - bg * l - 1));
    }
    let mask = (1u32 << bg) - 1;
    for (i, c) in p.coeffs.iter().enumerate() {
        let x = c.0.wrapping_add(offset);
        for (j, d) in out.iter_mut().enumerate() {
            let field = (x >> (32 - bg * (j as u32 + 1))) & mask;
            d.coeffs[i] = field as i32 - half_minus_one as i32;
        }
    }
}

/// Digits of every component, component-major.
pub fn decompose_trlwe(c: &TrlweCiphertext, gadget_base_log: u32, gadget_length: usize) -> Vec<IntPolynomial> {
    c.components().flat_map(|p| gadget_decompose(p, gadget_base_log, gadget_length)).collect()
}

/// `A ⊡ c` using `A`'s cached Lagrange rows.
pub fn external_product(a: &TgswCiphertext, c: &TrlweCiphertext, backend: &Backend, counters: &mut TransformCounters) -> Result<TrlweCiphertext> {
    let cache = a.lagrange_cache.as_ref().ok_or(Error::RepresentationMismatch("TGSW ciphertext has no Lagrange cache"))?;
    external_product_lagrange(cache, c, backend, counters)
}

pub fn external_product_lagrange(a: &TgswLagrange, c: &TrlweCiphertext, backend: &Backend, counters: &mut TransformCounters) -> Result<TrlweCiphertext> {
    if a.beta != backend.beta() {
        return Err(Error::RepresentationMismatch("TGSW cache was built by a different backend"));
    }
    let k = c.mask_count();
    check_len((k + 1) * a.gadget_length, a.rows.len())?;
    let digits = decompose_trlwe(c, a.gadget_base_log, a.gadget_length);
    let bound = a.gadget_base_log - 1;
    let spectra = digits.iter().map(|d| backend.forward_int(d, bound, counters)).collect::<Result<Vec<_>>>()?;
    let mut out = TrlweCiphertext::zero(k, c.ring_degree());
    for q in 0..=k {
        let mut acc = backend.accumulator();
        for (d, row) in spectra.iter().zip(&a.rows) {
            acc.mac(d, &row[q], counters)?;
        }
        *out.component_mut(q) = backend.inverse_torus(&acc.finish(), counters)?;
    }
    counters.external_products += 1;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::trlwe::{trlwe_decrypt, trlwe_phase};

    #[test]
    fn zero_decomposes_to_zero() {
        let d = gadget_decompose(&TorusPolynomial::zero(8), 10, 3);
        assert!(d.iter().all(|p| p.coeffs.iter().all(|&x| x == 0)));
    }

    #[test]
    fn single_digit() {
        let p = TorusPolynomial::constant(4, Torus(1 << 22));
        let d = gadget_decompose(&p, 10, 3);
        assert_eq!((d[0].coeffs[0], d[1].coeffs[0], d[2].coeffs[0]), (1, 0, 0));
    }

    #[test]
    fn digits_balanced_and_recompose() {
        let mut rng = DetRng::new(1);
        let mut p = TorusPolynomial::zero(10_000);
        rng.fill_uniform(&mut p.coeffs);
        p.coeffs[0] = Torus(u32::MAX);
        p.coeffs[1] = Torus(1 << 31);
        let d = gadget_decompose(&p, 10, 3);
        for i in 0..p.len() {
            let mut r: i64 = 0;
            for (j, dj) in d.iter().enumerate() {
                let x = dj.coeffs[i];
                assert!(-512 < x && x <= 512);
                r += (x as i64) << (32 - 10 * (j + 1));
            }
            let err = (p.coeffs[i].0 as i64 - r).rem_euclid(1 << 32);
            let err = if err >= 1 << 31 { err - (1 << 32) } else { err };
            assert!(err.abs() <= 1 << 1, "coefficient {i}: {err}");
        }
    }

    #[test]
    fn identity_and_monomial_products() {
        let params = ParameterSet::toy(8, 64);
        let mut rng = DetRng::new(5);
        let s: Vec<Vec<u8>> = vec![(0..64).map(|_| rng.bit()).collect()];
        for backend in [Backend::reference(64), Backend::approximate(64, 64).unwrap()] {
            let mut counters = TransformCounters::default();
            let mu = TorusPolynomial { coeffs: (0..64).map(|i| Torus((i as u32 * 7 % 128) << 25)).collect() };
            let c = trlwe_encrypt(&mu, &s, 0.0, &mut rng).unwrap();
            for e in [0usize, 1, 63, 64, 100, 127] {
                let mut a = tgsw_encrypt(&IntPolynomial::monomial(64, e), &s, &params, &mut rng).unwrap();
                a.prepare(&backend, &mut counters).unwrap();
                counters.reset();
                let out = external_product(&a, &c, &backend, &mut counters).unwrap();
                assert_eq!((counters.forward_count, counters.inverse_count), (6, 2));
                assert_eq!(trlwe_decrypt(&out, &s, 7).unwrap(), mu.mul_monomial(e), "e {e}");
            }
            let mut zero = tgsw_encrypt(&IntPolynomial::zero(64), &s, &params, &mut rng).unwrap();
            zero.prepare(&backend, &mut counters).unwrap();
            let out = external_product(&zero, &c, &backend, &mut counters).unwrap();
            assert_eq!(trlwe_decrypt(&out, &s, 7).unwrap(), TorusPolynomial::zero(64));
            let ph = trlwe_phase(&out, &s).unwrap();
            assert!(ph.coeffs.iter().all(|x| x.signed().unsigned_abs() < 1 << 12));
        }
    }

    #[test]
    fn missing_cache_or_backend_mismatch() {
        let params = ParameterSet::toy(8, 16);
        let s = vec![vec![1u8; 16]];
        let mut rng = DetRng::new(0);
        let mut a = tgsw_encrypt_constant(1, &s, &params, &mut rng).unwrap();
        let c = TrlweCiphertext::zero(1, 16);
        let reference = Backend::reference(16);
        let mut counters = TransformCounters::default();
        assert!(external_product(&a, &c, &reference, &mut counters).is_err());
        a.prepare(&reference, &mut counters).unwrap();
        assert!(external_product(&a, &c, &Backend::approximate(16, 38).unwrap(), &mut counters).is_err());
    }

    #[test]
    fn adding_h_to_zero_gives_one() {
        let params = ParameterSet::toy(8, 16);
        let s = vec![(0..16).map(|i| (i % 3 == 0) as u8).collect::<Vec<u8>>()];
        let mut rng = DetRng::new(9);
        let mut a = tgsw_encrypt_constant(0, &s, &params, &mut rng).unwrap();
        a.add_gadget(1);
        let b = {
            let mut rng = DetRng::new(9);
            tgsw_encrypt_constant(1, &s, &params, &mut rng).unwrap()
        };
        assert_eq!(a, b);
    }
}
