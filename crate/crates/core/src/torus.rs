//! Torus elements and negacyclic polynomials over `Z[X]/(X^N + 1)`.
//!
//! A torus value `x` in `[0, 1)` is stored as the `u32` `round(x * 2^32)`.
//! Every operation wraps, which is the reduction modulo 1.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{check_len, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct Torus(pub u32);

impl Torus {
    pub const ZERO: Torus = Torus(0);

    /// Nearest grid point to the real `x` (taken modulo 1).
    pub fn from_f64(x: f64) -> Torus {
        let frac = x - x.floor();
        Torus((frac * 4294967296.0).round() as u64 as u32)
    }

    /// Representative in `[-1/2, 1/2)`.
    pub fn to_f64(self) -> f64 {
        self.signed() as f64 / 4294967296.0
    }

    pub fn signed(self) -> i32 {
        self.0 as i32
    }

    /// `2^32 / d` for a power of two `d`, i.e. the torus value `1/d`.
    pub fn inv_pow2(log_d: u32) -> Torus {
        if log_d == 0 {
            Torus(0)
        } else {
            Torus(1u32 << (32 - log_d))
        }
    }
}

impl Add for Torus {
    type Output = Torus;
    #[inline]
    fn add(self, rhs: Torus) -> Torus {
        Torus(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for Torus {
    type Output = Torus;
    #[inline]
    fn sub(self, rhs: Torus) -> Torus {
        Torus(self.0.wrapping_sub(rhs.0))
    }
}

impl Neg for Torus {
    type Output = Torus;
    #[inline]
    fn neg(self) -> Torus {
        Torus(self.0.wrapping_neg())
    }
}

impl Mul<i32> for Torus {
    type Output = Torus;
    #[inline]
    fn mul(self, rhs: i32) -> Torus {
        Torus(self.0.wrapping_mul(rhs as u32))
    }
}

impl AddAssign for Torus {
    #[inline]
    fn add_assign(&mut self, rhs: Torus) {
        self.0 = self.0.wrapping_add(rhs.0);
    }
}

impl SubAssign for Torus {
    #[inline]
    fn sub_assign(&mut self, rhs: Torus) {
        self.0 = self.0.wrapping_sub(rhs.0);
    }
}

/// `⌈2N·x⌋ mod 2N`, ties rounded up.
pub fn round_to_2n(x: Torus, ring_degree: usize) -> usize {
    let log2n = (2 * ring_degree).trailing_zeros();
    debug_assert!(ring_degree.is_power_of_two() && log2n <= 32);
    if log2n == 32 {
        return x.0 as usize;
    }
    let shift = 32 - log2n;
    let half = 1u32 << (shift - 1);
    (x.0.wrapping_add(half) >> shift) as usize & (2 * ring_degree - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusPolynomial {
    pub coeffs: Vec<Torus>,
}

impl TorusPolynomial {
    pub fn zero(n: usize) -> Self {
        TorusPolynomial { coeffs: vec![Torus::ZERO; n] }
    }

    pub fn from_raw(raw: &[u32]) -> Self {
        TorusPolynomial { coeffs: raw.iter().map(|&v| Torus(v)).collect() }
    }

    pub fn constant(n: usize, c: Torus) -> Self {
        let mut p = Self::zero(n);
        p.coeffs[0] = c;
        p
    }

    /// Every coefficient equal to `c`.
    pub fn constant_all(n: usize, c: Torus) -> Self {
        TorusPolynomial { coeffs: vec![c; n] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_assign(&mut self, other: &TorusPolynomial) {
        debug_assert_eq!(self.len(), other.len());
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &TorusPolynomial) {
        debug_assert_eq!(self.len(), other.len());
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
    }

    pub fn negate(&self) -> TorusPolynomial {
        TorusPolynomial { coeffs: self.coeffs.iter().map(|&c| -c).collect() }
    }

    /// `X^e · self` for `e` in `[0, 2N)`.
    pub fn mul_monomial(&self, e: usize) -> TorusPolynomial {
        let n = self.len();
        let e = e % (2 * n);
        let mut out = vec![Torus::ZERO; n];
        let (shift, flip) = if e < n { (e, false) } else { (e - n, true) };
        for (i, &c) in self.coeffs.iter().enumerate() {
            let j = i + shift;
            let (dst, neg) = if j < n { (j, flip) } else { (j - n, !flip) };
            out[dst] = if neg { -c } else { c };
        }
        TorusPolynomial { coeffs: out }
    }

    /// `self · key` where `key` has coefficients in `{0, 1}`.
    pub fn mul_binary(&self, key: &[u8]) -> TorusPolynomial {
        let n = self.len();
        debug_assert_eq!(key.len(), n);
        let mut acc = vec![0u32; n];
        let a: Vec<u32> = self.coeffs.iter().map(|t| t.0).collect();
        for (i, &bit) in key.iter().enumerate() {
            if bit == 0 {
                continue;
            }
            for (d, &s) in acc[i..].iter_mut().zip(&a[..n - i]) {
                *d = d.wrapping_add(s);
            }
            for (d, &s) in acc[..i].iter_mut().zip(&a[n - i..]) {
                *d = d.wrapping_sub(s);
            }
        }
        TorusPolynomial::from_raw(&acc)
    }
}

pub fn torus_linear(a: &TorusPolynomial, b: &TorusPolynomial, op: LinearOp) -> Result<TorusPolynomial> {
    check_len(a.len(), b.len())?;
    let mut out = a.clone();
    match op {
        LinearOp::Add => out.add_assign(b),
        LinearOp::Sub => out.sub_assign(b),
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    pub coeffs: Vec<i32>,
}

impl IntPolynomial {
    pub fn zero(n: usize) -> Self {
        IntPolynomial { coeffs: vec![0; n] }
    }

    pub fn monomial(n: usize, e: usize) -> Self {
        let mut p = Self::zero(n);
        let e = e % (2 * n);
        if e < n {
            p.coeffs[e] = 1;
        } else {
            p.coeffs[e - n] = -1;
        }
        p
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs(&self) -> u32 {
        self.coeffs.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }
}

/// Exact product in `T_N[X]`; the reference every fast multiplier is checked against.
pub fn schoolbook_negacyclic_mul(a: &IntPolynomial, b: &TorusPolynomial) -> Result<TorusPolynomial> {
    check_len(a.len(), b.len())?;
    let n = a.len();
    let mut out = vec![0u32; n];
    for (i, &ai) in a.coeffs.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let ai = ai as u32;
        for (j, bj) in b.coeffs.iter().enumerate() {
            let p = ai.wrapping_mul(bj.0);
            let k = i + j;
            if k < n {
                out[k] = out[k].wrapping_add(p);
            } else {
                out[k - n] = out[k - n].wrapping_sub(p);
            }
        }
    }
    Ok(TorusPolynomial::from_raw(&out))
}

/// Product of `a` with the signed lift of `b`, kept over the integers.
pub fn schoolbook_negacyclic_exact(a: &IntPolynomial, b: &TorusPolynomial) -> Result<Vec<i128>> {
    check_len(a.len(), b.len())?;
    let n = a.len();
    let mut out = vec![0i128; n];
    for (i, &ai) in a.coeffs.iter().enumerate() {
        for (j, bj) in b.coeffs.iter().enumerate() {
            let p = ai as i128 * bj.signed() as i128;
            let k = i + j;
            if k < n {
                out[k] += p;
            } else {
                out[k - n] -= p;
            }
        }
    }
    Ok(out)
}
