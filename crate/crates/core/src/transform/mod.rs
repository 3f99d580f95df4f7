//! Polynomial multiplication backends over the Lagrange representation.
//!
//! Fixed-point scale schedule of the approximate backend, with `M = N/2`:
//! a torus polynomial enters at scale `60 - log2 M - 31`, an integer
//! polynomial bounded by `2^b` at `60 - log2 M - b`. Pointwise products are
//! formed and summed in `i128` and renormalized so the largest part fits in
//! `2^59` before the inverse, whose output keeps the product scale.

pub(crate) mod hp;
pub mod dyadic;
pub mod integer;
pub mod reference;
pub mod table;

use std::sync::Arc;

use num_complex::{Complex, Complex64};
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::rng::DetRng;
use crate::torus::{schoolbook_negacyclic_exact, IntPolynomial, Torus, TorusPolynomial};

pub use dyadic::{lifting_rotate, quantize_dyadic, Direction, DyadicCoefficient, LiftKernel, Rotation, ShiftTerm};
pub use integer::{IntegerTransform, C64, HEADROOM_BITS};
pub use reference::ReferenceTransform;
pub use table::{build_twiddle_table, DyadicTwiddleTable};

/// Largest magnitude (in bits) allowed into an inverse transform.
pub const RENORM_BITS: u32 = 59;
const TORUS_BOUND_LOG: u32 = 31;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TransformCounters {
    pub forward_count: u64,
    pub inverse_count: u64,
    pub butterfly_count: u64,
    pub radix4_count: u64,
    pub add_count: u64,
    pub shift_count: u64,
    pub multiply_count: u64,
    pub twiddle_reads: u64,
    pub twist_reads: u64,
    pub pointwise_macs: u64,
    pub external_products: u64,
    pub bundle_scale_adds: u64,
    pub bundle_h_adds: u64,
    pub bootstraps: u64,
}

impl TransformCounters {
    pub fn reset(&mut self) {
        *self = TransformCounters::default();
    }

    pub fn merge(&mut self, o: &TransformCounters) {
        self.forward_count += o.forward_count;
        self.inverse_count += o.inverse_count;
        self.butterfly_count += o.butterfly_count;
        self.radix4_count += o.radix4_count;
        self.add_count += o.add_count;
        self.shift_count += o.shift_count;
        self.multiply_count += o.multiply_count;
        self.twiddle_reads += o.twiddle_reads;
        self.twist_reads += o.twist_reads;
        self.pointwise_macs += o.pointwise_macs;
        self.external_products += o.external_products;
        self.bundle_scale_adds += o.bundle_scale_adds;
        self.bundle_h_adds += o.bundle_h_adds;
        self.bootstraps += o.bootstraps;
    }
}

/// Evaluations at `exp(i(2j+1)π/N)` for `j < N/2`.
#[derive(Debug, Clone, PartialEq)]
pub enum LagrangeRep {
    Float(Vec<Complex64>),
    /// Integers equal to the evaluations times `2^scale`.
    Fixed { values: Vec<C64>, scale: i32 },
}

impl LagrangeRep {
    pub fn len(&self) -> usize {
        match self {
            LagrangeRep::Float(v) => v.len(),
            LagrangeRep::Fixed { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_float(&self) -> Option<&[Complex64]> {
        match self {
            LagrangeRep::Float(v) => Some(v),
            LagrangeRep::Fixed { .. } => None,
        }
    }

    pub fn as_fixed(&self) -> Option<(&[C64], i32)> {
        match self {
            LagrangeRep::Fixed { values, scale } => Some((values, *scale)),
            LagrangeRep::Float(_) => None,
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, LagrangeRep::Fixed { .. })
    }

    /// Evaluations as doubles, scale removed.
    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            LagrangeRep::Float(v) => v.clone(),
            LagrangeRep::Fixed { values, scale } => {
                let f = 2f64.powi(-scale);
                values.iter().map(|v| Complex64::new(v.re as f64 * f, v.im as f64 * f)).collect()
            }
        }
    }
}

/// Running sum of pointwise products.
#[derive(Debug, Clone)]
pub enum Accumulator {
    Float(Vec<Complex64>),
    Fixed { values: Vec<Complex<i128>>, scale: Option<i32> },
}

impl Accumulator {
    pub fn mac(&mut self, a: &LagrangeRep, b: &LagrangeRep, counters: &mut TransformCounters) -> Result<()> {
        match (self, a, b) {
            (Accumulator::Float(acc), LagrangeRep::Float(x), LagrangeRep::Float(y)) => {
                check_len(acc.len(), x.len())?;
                check_len(acc.len(), y.len())?;
                for ((s, &u), &v) in acc.iter_mut().zip(x).zip(y) {
                    *s += u * v;
                }
                counters.pointwise_macs += acc.len() as u64;
                Ok(())
            }
            (
                Accumulator::Fixed { values, scale },
                LagrangeRep::Fixed { values: x, scale: sx },
                LagrangeRep::Fixed { values: y, scale: sy },
            ) => {
                check_len(values.len(), x.len())?;
                check_len(values.len(), y.len())?;
                let s = sx + sy;
                match scale {
                    None => *scale = Some(s),
                    Some(prev) if *prev != s => return Err(Error::RepresentationMismatch("accumulated products differ in scale")),
                    _ => {}
                }
                for ((acc, u), v) in values.iter_mut().zip(x).zip(y) {
                    let (ur, ui, vr, vi) = (u.re as i128, u.im as i128, v.re as i128, v.im as i128);
                    acc.re += ur * vr - ui * vi;
                    acc.im += ur * vi + ui * vr;
                }
                counters.pointwise_macs += values.len() as u64;
                Ok(())
            }
            _ => Err(Error::RepresentationMismatch("mixed float and fixed-point operands")),
        }
    }

    pub fn finish(self) -> LagrangeRep {
        match self {
            Accumulator::Float(v) => LagrangeRep::Float(v),
            Accumulator::Fixed { values, scale } => renormalize(&values, scale.unwrap_or(0)),
        }
    }
}

fn renorm_shift<'a>(values: impl Iterator<Item = &'a Complex<i128>>) -> u32 {
    let max = values.map(|v| v.re.unsigned_abs().max(v.im.unsigned_abs())).max().unwrap_or(0);
    (128 - max.leading_zeros()).saturating_sub(RENORM_BITS)
}

fn shift_down(values: &[Complex<i128>], shift: u32) -> Vec<C64> {
    let round = |x: i128| -> i64 {
        if shift == 0 {
            x as i64
        } else {
            ((x + (1i128 << (shift - 1))) >> shift) as i64
        }
    };
    values.iter().map(|v| C64::new(round(v.re), round(v.im))).collect()
}

/// Block floating point: shift `values` right until every part fits the inverse headroom.
pub(crate) fn renormalize(values: &[Complex<i128>], scale: i32) -> LagrangeRep {
    let shift = renorm_shift(values.iter());
    LagrangeRep::Fixed { values: shift_down(values, shift), scale: scale - shift as i32 }
}

/// Renormalizes a whole TGSW worth of spectra with one common shift.
pub fn renormalize_block(rows: &[Vec<Vec<Complex<i128>>>], scale: i32) -> Vec<Vec<LagrangeRep>> {
    let shift = renorm_shift(rows.iter().flatten().flatten());
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|v| LagrangeRep::Fixed { values: shift_down(v, shift), scale: scale - shift as i32 })
                .collect()
        })
        .collect()
}

/// Polynomial multiplication backend.
#[derive(Debug, Clone)]
pub enum Backend {
    Reference(Arc<ReferenceTransform>),
    Approximate(Arc<IntegerTransform>),
}

impl Backend {
    pub fn reference(ring_degree: usize) -> Backend {
        Backend::Reference(Arc::new(ReferenceTransform::new(ring_degree)))
    }

    pub fn approximate(ring_degree: usize, beta: u32) -> Result<Backend> {
        Self::approximate_with(ring_degree, beta, LiftKernel::default())
    }

    pub fn approximate_with(ring_degree: usize, beta: u32, kernel: LiftKernel) -> Result<Backend> {
        let table = build_twiddle_table(ring_degree, beta)?;
        Ok(Self::from_table(Arc::new(table), kernel))
    }

    pub fn from_table(table: Arc<DyadicTwiddleTable>, kernel: LiftKernel) -> Backend {
        Backend::Approximate(Arc::new(IntegerTransform::new(table, kernel)))
    }

    pub fn ring_degree(&self) -> usize {
        match self {
            Backend::Reference(r) => r.ring_degree(),
            Backend::Approximate(t) => t.ring_degree(),
        }
    }

    pub fn beta(&self) -> Option<u32> {
        match self {
            Backend::Reference(_) => None,
            Backend::Approximate(t) => Some(t.table().beta),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Backend::Reference(_) => "reference".into(),
            Backend::Approximate(t) => format!("approximate-b{}", t.table().beta),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        check_len(self.ring_degree(), n)
    }

    pub fn forward_torus(&self, p: &TorusPolynomial, counters: &mut TransformCounters) -> Result<LagrangeRep> {
        self.check(p.len())?;
        let coeffs: Vec<i64> = p.coeffs.iter().map(|c| c.signed() as i64).collect();
        Ok(self.forward_i64(&coeffs, TORUS_BOUND_LOG, counters))
    }

    /// Forward transform of an integer polynomial with `|coeff| ≤ 2^bound_log`.
    pub fn forward_int(&self, p: &IntPolynomial, bound_log: u32, counters: &mut TransformCounters) -> Result<LagrangeRep> {
        self.check(p.len())?;
        if p.max_abs() as u64 > 1u64 << bound_log {
            return Err(Error::OutOfRange(format!("coefficient exceeds 2^{bound_log}")));
        }
        let coeffs: Vec<i64> = p.coeffs.iter().map(|&c| c as i64).collect();
        Ok(self.forward_i64(&coeffs, bound_log, counters))
    }

    fn forward_i64(&self, coeffs: &[i64], bound_log: u32, counters: &mut TransformCounters) -> LagrangeRep {
        match self {
            Backend::Reference(r) => {
                counters.forward_count += 1;
                let v: Vec<f64> = coeffs.iter().map(|&c| c as f64).collect();
                LagrangeRep::Float(r.forward(&v))
            }
            Backend::Approximate(t) => {
                let scale = t.input_scale(bound_log);
                LagrangeRep::Fixed { values: t.forward_coeffs(coeffs, scale, counters), scale: scale as i32 }
            }
        }
    }

    pub fn accumulator(&self) -> Accumulator {
        let m = self.ring_degree() / 2;
        match self {
            Backend::Reference(_) => Accumulator::Float(vec![Complex64::new(0.0, 0.0); m]),
            Backend::Approximate(_) => Accumulator::Fixed { values: vec![Complex::new(0, 0); m], scale: None },
        }
    }

    /// Unreduced inverse: real coefficients of the represented polynomial.
    pub fn inverse_unreduced(&self, l: &LagrangeRep, counters: &mut TransformCounters) -> Result<Unreduced> {
        self.check(2 * l.len())?;
        match (self, l) {
            (Backend::Reference(r), LagrangeRep::Float(v)) => {
                counters.inverse_count += 1;
                Ok(Unreduced::Float(r.inverse(v)))
            }
            (Backend::Approximate(t), LagrangeRep::Fixed { values, scale }) => {
                Ok(Unreduced::Fixed { values: t.inverse_coeffs(values, counters), scale: *scale })
            }
            _ => Err(Error::RepresentationMismatch("backend does not match representation")),
        }
    }

    pub fn inverse_torus(&self, l: &LagrangeRep, counters: &mut TransformCounters) -> Result<TorusPolynomial> {
        Ok(self.inverse_unreduced(l, counters)?.to_torus())
    }

    pub fn pointwise_mul(&self, a: &LagrangeRep, b: &LagrangeRep, counters: &mut TransformCounters) -> Result<LagrangeRep> {
        let mut acc = self.accumulator();
        acc.mac(a, b, counters)?;
        Ok(acc.finish())
    }

    /// `a · b` through forward transforms, one pointwise product and the inverse.
    pub fn multiply(&self, a: &IntPolynomial, bound_log: u32, b: &TorusPolynomial, counters: &mut TransformCounters) -> Result<TorusPolynomial> {
        let fa = self.forward_int(a, bound_log, counters)?;
        let fb = self.forward_torus(b, counters)?;
        let prod = self.pointwise_mul(&fa, &fb, counters)?;
        self.inverse_torus(&prod, counters)
    }
}

/// Inverse-transform output before reduction modulo 1.
#[derive(Debug, Clone, PartialEq)]
pub enum Unreduced {
    Float(Vec<f64>),
    Fixed { values: Vec<i64>, scale: i32 },
}

impl Unreduced {
    pub fn to_torus(&self) -> TorusPolynomial {
        let coeffs = match self {
            Unreduced::Float(v) => v.iter().map(|&x| Torus(x.round() as i64 as u32)).collect(),
            Unreduced::Fixed { values, scale } => values
                .iter()
                .map(|&y| {
                    let r: i128 = if *scale > 0 {
                        (y as i128 + (1i128 << (scale - 1))) >> scale
                    } else {
                        (y as i128) << (-scale)
                    };
                    Torus(r as u32)
                })
                .collect(),
        };
        TorusPolynomial { coeffs }
    }

    /// Per-coefficient error against exact integers, in coefficient units.
    pub fn error_against(&self, exact: &[i128]) -> Vec<f64> {
        match self {
            Unreduced::Float(v) => v.iter().zip(exact).map(|(&y, &e)| y - e as f64).collect(),
            Unreduced::Fixed { values, scale } => values
                .iter()
                .zip(exact)
                .map(|(&y, &e)| {
                    if *scale >= 0 {
                        (y as i128 - (e << scale)) as f64 / 2f64.powi(*scale)
                    } else {
                        ((y as i128) << (-scale)) as f64 - e as f64
                    }
                })
                .collect(),
        }
    }
}

pub fn forward_transform(p: &TorusPolynomial, backend: &Backend, counters: &mut TransformCounters) -> Result<LagrangeRep> {
    backend.forward_torus(p, counters)
}

pub fn inverse_transform(l: &LagrangeRep, backend: &Backend, counters: &mut TransformCounters) -> Result<TorusPolynomial> {
    backend.inverse_torus(l, counters)
}

pub fn lagrange_pointwise_mul(a: &LagrangeRep, b: &LagrangeRep) -> Result<LagrangeRep> {
    check_len(a.len(), b.len())?;
    let mut acc = match a {
        LagrangeRep::Float(v) => Accumulator::Float(vec![Complex64::new(0.0, 0.0); v.len()]),
        LagrangeRep::Fixed { values, .. } => Accumulator::Fixed { values: vec![Complex::new(0, 0); values.len()], scale: None },
    };
    acc.mac(a, b, &mut TransformCounters::default())?;
    Ok(acc.finish())
}

/// Gadget-digit bound used by the error study: digits in `(-512, 512]`.
pub const STUDY_DIGIT_LOG: u32 = 9;

/// Random digit polynomial and uniform torus polynomial.
pub fn random_pair(n: usize, digit_log: u32, rng: &mut DetRng) -> (IntPolynomial, TorusPolynomial) {
    let half = 1i32 << digit_log;
    let a = IntPolynomial { coeffs: (0..n).map(|_| rng.range_i32(-half + 1, half)).collect() };
    let mut b = TorusPolynomial::zero(n);
    rng.fill_uniform(&mut b.coeffs);
    (a, b)
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x * x, n + 1));
    (s / n.max(1) as f64).sqrt()
}

/// Relative RMS error of `backend`'s product against the exact product, in dB.
pub fn product_error_db(backend: &Backend, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be positive".into()));
    }
    let n = backend.ring_degree();
    let mut total = 0.0;
    for t in 0..trials {
        let mut rng = DetRng::trial(seed, t as u64);
        let (a, b) = random_pair(n, STUDY_DIGIT_LOG, &mut rng);
        let exact = schoolbook_negacyclic_exact(&a, &b)?;
        let mut c = TransformCounters::default();
        let fa = backend.forward_int(&a, STUDY_DIGIT_LOG, &mut c)?;
        let fb = backend.forward_torus(&b, &mut c)?;
        let prod = backend.pointwise_mul(&fa, &fb, &mut c)?;
        let out = backend.inverse_unreduced(&prod, &mut c)?;
        let err = rms(out.error_against(&exact).into_iter());
        let reference = rms(exact.iter().map(|&e| e as f64));
        total += 20.0 * (err / reference).log10();
    }
    Ok(total / trials as f64)
}

pub const ERROR_STUDY_SEED: u64 = 0x5eed_e770;

/// Error of the approximate backend at bitwidth `beta`.
pub fn measure_error_db(beta: u32, trials: usize, ring_degree: usize) -> Result<f64> {
    product_error_db(&Backend::approximate(ring_degree, beta)?, trials, ERROR_STUDY_SEED)
}

/// Error of the double-precision reference.
pub fn measure_reference_error_db(trials: usize, ring_degree: usize) -> Result<f64> {
    product_error_db(&Backend::reference(ring_degree), trials, ERROR_STUDY_SEED)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::schoolbook_negacyclic_mul;

    #[test]
    fn zero_in_zero_out() {
        let b = Backend::approximate(64, 38).unwrap();
        let mut c = TransformCounters::default();
        let l = b.forward_torus(&TorusPolynomial::zero(64), &mut c).unwrap();
        assert!(matches!(&l, LagrangeRep::Fixed { values, .. } if values.iter().all(|v| v.re == 0 && v.im == 0)));
        assert_eq!(b.inverse_torus(&l, &mut c).unwrap(), TorusPolynomial::zero(64));
    }

    #[test]
    fn pipeline_matches_schoolbook() {
        let n = 1024;
        let backend = Backend::approximate(n, 64).unwrap();
        let mut rng = DetRng::new(3);
        let (a, b) = random_pair(n, 9, &mut rng);
        let mut c = TransformCounters::default();
        let got = backend.multiply(&a, 9, &b, &mut c).unwrap();
        let want = schoolbook_negacyclic_mul(&a, &b).unwrap();
        let worst = got.coeffs.iter().zip(&want.coeffs).map(|(x, y)| (x.0.wrapping_sub(y.0) as i32).unsigned_abs()).max().unwrap();
        assert!(worst <= 2, "worst {worst}");
    }

    #[test]
    fn multiply_by_one_is_identity() {
        let n = 256;
        for backend in [Backend::reference(n), Backend::approximate(n, 64).unwrap()] {
            let mut rng = DetRng::new(5);
            let (_, b) = random_pair(n, 9, &mut rng);
            let one = IntPolynomial::monomial(n, 0);
            let mut c = TransformCounters::default();
            assert_eq!(backend.multiply(&one, 0, &b, &mut c).unwrap(), b);
        }
    }

    #[test]
    fn mixed_tags_rejected() {
        let a = LagrangeRep::Float(vec![Complex64::new(1.0, 0.0); 4]);
        let b = LagrangeRep::Fixed { values: vec![C64::new(1, 0); 4], scale: 0 };
        assert!(lagrange_pointwise_mul(&a, &b).is_err());
    }

    #[test]
    fn pointwise_commutes() {
        let n = 64;
        let backend = Backend::approximate(n, 38).unwrap();
        let mut rng = DetRng::new(9);
        let (a, b) = random_pair(n, 9, &mut rng);
        let mut c = TransformCounters::default();
        let fa = backend.forward_int(&a, 9, &mut c).unwrap();
        let fb = backend.forward_torus(&b, &mut c).unwrap();
        assert_eq!(lagrange_pointwise_mul(&fa, &fb).unwrap(), lagrange_pointwise_mul(&fb, &fa).unwrap());
    }
}
