//! Multiplication-less integer negacyclic transform.
//!
//! Layout, for ring degree `N` and `M = N/2`:
//!
//! 1. fold: `z_j = p_j + i·p_{j+M}`, shifted left by the input scale;
//! 2. twist: `z_j ← z_j · exp(iπj/N)` (table entry `j`);
//! 3. an `M`-point DFT with positive exponent, computed depth first by a
//!    conjugate-pair split radix recursion (radix-4 L-butterflies, with
//!    radix-2 and radix-1 leaves);
//! 4. reorder: DFT bin `k` is the evaluation at `exp(iπ(4k+1)/N)`, stored
//!    at Lagrange slot `2k` for `k < M/2` and conjugated at `N-2k-1`
//!    otherwise.
//!
//! Steps 1–2 happen at the leaves of the recursion. Every rotation is a
//! three-step lifting, so the inverse undoes the forward bit for bit. The
//! inverse halves once per level and therefore computes the normalized
//! inverse DFT.

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex;

use super::dyadic::{quarter_turn, LiftKernel, LiftTally, Rotation};
use super::hp;
use super::table::DyadicTwiddleTable;
use super::TransformCounters;

pub type C64 = Complex<i64>;

/// Bits of headroom below `i64::MAX` kept by the scale schedule.
pub const HEADROOM_BITS: u32 = 60;

/// Fractional bits of the fixed-point roots returned by [`IntegerTransform::root_fixed`].
pub const ROOT_SCALE_BITS: u32 = 61;

#[derive(Debug, Clone)]
pub struct IntegerTransform {
    table: Arc<DyadicTwiddleTable>,
    kernel: LiftKernel,
    log_half: u32,
    hot: Vec<HotRot>,
    roots: OnceLock<Vec<C64>>,
}

/// Rotation coefficients rescaled to the denominator `2^64`, for the
/// widening-multiply kernel.
#[derive(Debug, Clone, Copy)]
struct HotRot {
    p: u64,
    u: u64,
    p_neg: bool,
    u_neg: bool,
    quarter: u8,
    trivial: bool,
}

impl HotRot {
    fn new(r: &Rotation) -> HotRot {
        let up = |a: i128| -> u64 { u64::try_from(a.unsigned_abs() << (64 - r.p.beta)).expect("|coefficient| < 1") };
        HotRot {
            p: up(r.p.alpha),
            u: up(r.u.alpha),
            p_neg: r.p.alpha < 0,
            u_neg: r.u.alpha < 0,
            quarter: r.quarter,
            trivial: r.is_trivial(),
        }
    }
}

/// `⌊(±mag·x + 2^63) / 2^64⌋`.
#[inline(always)]
fn lift64(mag: u64, neg: bool, x: i64) -> i64 {
    let prod = mag as u128 * x.unsigned_abs() as u128;
    let negative = neg != (x < 0);
    let v = ((prod + (1u128 << 63) - negative as u128) >> 64) as i64;
    if negative { -v } else { v }
}

struct Walk<'a> {
    entries: &'a [Rotation],
    hot: &'a [HotRot],
    rotations: u64,
    half: usize,
    ring: usize,
    scale: u32,
    tally: LiftTally,
    butterflies: u64,
    radix4: u64,
    adds: u64,
    twiddle_reads: u64,
    twist_reads: u64,
}

impl<'a> Walk<'a> {
    fn new(entries: &'a [Rotation], hot: &'a [HotRot], scale: u32) -> Walk<'a> {
        let half = entries.len();
        Walk {
            entries,
            hot,
            rotations: 0,
            half,
            ring: 2 * half,
            scale,
            tally: LiftTally::default(),
            butterflies: 0,
            radix4: 0,
            adds: 0,
            twiddle_reads: 0,
            twist_reads: 0,
        }
    }

    fn flush(&self, c: &mut TransformCounters) {
        c.butterfly_count += self.butterflies;
        c.radix4_count += self.radix4;
        let lifts = 3 * self.rotations;
        c.add_count += self.adds + self.tally.adds + lifts;
        c.shift_count += self.tally.shifts + lifts;
        c.multiply_count += self.tally.multiplies + lifts;
        c.twiddle_reads += self.twiddle_reads;
        c.twist_reads += self.twist_reads;
    }

    /// Entry `j` applied to `v`, conjugated when `conj`.
    #[inline(always)]
    fn rot<const SA: bool>(&mut self, j: usize, v: C64, conj: bool) -> C64 {
        if SA {
            let (re, im) = self.entries[j].rotate(v.re, v.im, conj, LiftKernel::ShiftAdd, &mut self.tally);
            return C64::new(re, im);
        }
        let h = self.hot[j];
        let (mut re, mut im) = (v.re, v.im);
        if !h.trivial {
            self.rotations += 1;
            re += lift64(h.p, h.p_neg != conj, im);
            im += lift64(h.u, h.u_neg != conj, re);
            re += lift64(h.p, h.p_neg != conj, im);
        }
        let q = if conj { (4 - h.quarter) & 3 } else { h.quarter };
        let (re, im) = quarter_turn(re, im, q);
        C64::new(re, im)
    }

    #[inline(always)]
    fn unrot<const SA: bool>(&mut self, j: usize, v: C64, conj: bool) -> C64 {
        if SA {
            let (re, im) = self.entries[j].unrotate(v.re, v.im, conj, LiftKernel::ShiftAdd, &mut self.tally);
            return C64::new(re, im);
        }
        let h = self.hot[j];
        let q = if conj { h.quarter & 3 } else { (4 - h.quarter) & 3 };
        let (mut re, mut im) = quarter_turn(v.re, v.im, q);
        if !h.trivial {
            self.rotations += 1;
            re -= lift64(h.p, h.p_neg != conj, im);
            im -= lift64(h.u, h.u_neg != conj, re);
            re -= lift64(h.p, h.p_neg != conj, im);
        }
        C64::new(re, im)
    }

    #[inline(always)]
    fn load<const SA: bool>(&mut self, src: &[i64], j: usize) -> C64 {
        self.twist_reads += 1;
        let v = C64::new(src[j] << self.scale, src[j + self.half] << self.scale);
        self.rot::<SA>(j, v, false)
    }

    #[inline(always)]
    fn store<const SA: bool>(&mut self, dst: &mut [i64], j: usize, v: C64) {
        self.twist_reads += 1;
        let v = self.unrot::<SA>(j, v, false);
        dst[j] = v.re;
        dst[j + self.half] = v.im;
    }

    fn forward<const SA: bool>(&mut self, src: &[i64], out: &mut [C64], off: usize, stride: usize) {
        let s = out.len();
        let m = self.half;
        match s {
            1 => out[0] = self.load::<SA>(src, off),
            2 => {
                let a = self.load::<SA>(src, off);
                let b = self.load::<SA>(src, (off + stride) & (m - 1));
                out[0] = a + b;
                out[1] = a - b;
                self.butterflies += 1;
                self.adds += 4;
            }
            _ => {
                let (u, rest) = out.split_at_mut(s / 2);
                let (z, zc) = rest.split_at_mut(s / 4);
                self.forward::<SA>(src, u, off, 2 * stride);
                self.forward::<SA>(src, z, (off + stride) & (m - 1), 4 * stride);
                self.forward::<SA>(src, zc, (off + m - stride) & (m - 1), 4 * stride);
                let q = s / 4;
                let step = 2 * self.ring / s;
                for k in 0..q {
                    let (a, b) = if k == 0 {
                        (z[0], zc[0])
                    } else {
                        self.twiddle_reads += 1;
                        (self.rot::<SA>(k * step, z[k], false), self.rot::<SA>(k * step, zc[k], true))
                    };
                    let sum = a + b;
                    let diff = a - b;
                    let idiff = C64::new(-diff.im, diff.re);
                    let u0 = u[k];
                    let u1 = u[k + q];
                    u[k] = u0 + sum;
                    z[k] = u0 - sum;
                    u[k + q] = u1 + idiff;
                    zc[k] = u1 - idiff;
                }
                self.butterflies += q as u64;
                self.radix4 += q as u64;
                self.adds += 12 * q as u64;
            }
        }
    }

    fn inverse<const SA: bool>(&mut self, buf: &mut [C64], dst: &mut [i64], off: usize, stride: usize) {
        let s = buf.len();
        let m = self.half;
        match s {
            1 => self.store::<SA>(dst, off, buf[0]),
            2 => {
                let (x0, x1) = (buf[0], buf[1]);
                let a = C64::new((x0.re + x1.re) >> 1, (x0.im + x1.im) >> 1);
                let b = x0 - a;
                self.butterflies += 1;
                self.adds += 4;
                self.store::<SA>(dst, off, a);
                self.store::<SA>(dst, (off + stride) & (m - 1), b);
            }
            _ => {
                let q = s / 4;
                let step = 2 * self.ring / s;
                {
                    let (u, rest) = buf.split_at_mut(s / 2);
                    let (z, zc) = rest.split_at_mut(q);
                    for k in 0..q {
                        let (x0, x1, x2, x3) = (u[k], u[k + q], z[k], zc[k]);
                        let u0 = C64::new((x0.re + x2.re) >> 1, (x0.im + x2.im) >> 1);
                        let c = x0 - u0;
                        let u1 = C64::new((x1.re + x3.re) >> 1, (x1.im + x3.im) >> 1);
                        let t = x1 - u1;
                        let d = C64::new(t.im, -t.re);
                        let a = C64::new((c.re + d.re) >> 1, (c.im + d.im) >> 1);
                        let b = c - a;
                        let (za, zb) = if k == 0 {
                            (a, b)
                        } else {
                            self.twiddle_reads += 1;
                            (self.unrot::<SA>(k * step, a, false), self.unrot::<SA>(k * step, b, true))
                        };
                        u[k] = u0;
                        u[k + q] = u1;
                        z[k] = za;
                        zc[k] = zb;
                    }
                }
                self.butterflies += q as u64;
                self.radix4 += q as u64;
                self.adds += 14 * q as u64;
                let (u, rest) = buf.split_at_mut(s / 2);
                let (z, zc) = rest.split_at_mut(q);
                self.inverse::<SA>(u, dst, off, 2 * stride);
                self.inverse::<SA>(z, dst, (off + stride) & (m - 1), 4 * stride);
                self.inverse::<SA>(zc, dst, (off + m - stride) & (m - 1), 4 * stride);
            }
        }
    }
}

impl IntegerTransform {
    pub fn new(table: Arc<DyadicTwiddleTable>, kernel: LiftKernel) -> IntegerTransform {
        let log_half = table.half().trailing_zeros();
        let hot = table.entries.iter().map(HotRot::new).collect();
        IntegerTransform { table, kernel, log_half, hot, roots: OnceLock::new() }
    }

    /// `exp(iπr/N)·2^61`, rounded.
    pub fn root_fixed(&self, r: usize) -> C64 {
        let roots = self.roots_fixed();
        roots[r % roots.len()]
    }

    /// `exp(iπr/N)·2^61` for `r` in `[0, 2N)`.
    pub fn roots_fixed(&self) -> &[C64] {
        let n = self.table.ring_degree;
        self.roots.get_or_init(|| {
            let quarter = n / 2;
            let pi = hp::pi();
            let base: Vec<(i64, i64)> = (0..quarter)
                .map(|t| {
                    let (s, c) = hp::sin_cos(&(&pi * BigInt::from(t) / BigInt::from(n)));
                    (hp::quantize(&c, ROOT_SCALE_BITS) as i64, hp::quantize(&s, ROOT_SCALE_BITS) as i64)
                })
                .collect();
            (0..2 * n)
                .map(|r| {
                    let (c, s) = base[r % quarter];
                    let (re, im) = quarter_turn(c, s, (r / quarter) as u8);
                    C64::new(re, im)
                })
                .collect()
        })
    }

    pub fn table(&self) -> &DyadicTwiddleTable {
        &self.table
    }

    pub fn kernel(&self) -> LiftKernel {
        self.kernel
    }

    pub fn ring_degree(&self) -> usize {
        self.table.ring_degree
    }

    /// Input scale that keeps `|coeff| ≤ 2^bound_log` inside the headroom.
    pub fn input_scale(&self, bound_log: u32) -> u32 {
        HEADROOM_BITS
            .checked_sub(self.log_half + bound_log)
            .expect("input bound exceeds transform headroom")
    }

    /// Coefficients (shifted by `scale`) to Lagrange order.
    pub fn forward_coeffs(&self, coeffs: &[i64], scale: u32, counters: &mut TransformCounters) -> Vec<C64> {
        let n = self.ring_degree();
        assert_eq!(coeffs.len(), n, "coefficient count must equal ring degree");
        let m = n / 2;
        let mut walk = Walk::new(&self.table.entries, &self.hot, scale);
        let mut bins = vec![C64::new(0, 0); m];
        match self.kernel {
            LiftKernel::ShiftAdd => walk.forward::<true>(coeffs, &mut bins, 0, 1),
            LiftKernel::WideMul => walk.forward::<false>(coeffs, &mut bins, 0, 1),
        }
        walk.flush(counters);
        counters.forward_count += 1;
        let mut out = vec![C64::new(0, 0); m];
        for (k, v) in bins.into_iter().enumerate() {
            if k < m / 2 {
                out[2 * k] = v;
            } else {
                out[n - 2 * k - 1] = v.conj();
            }
        }
        out
    }

    /// Lagrange values back to coefficients at the same scale.
    pub fn inverse_coeffs(&self, lagrange: &[C64], counters: &mut TransformCounters) -> Vec<i64> {
        let n = self.ring_degree();
        let m = n / 2;
        assert_eq!(lagrange.len(), m, "Lagrange length must be N/2");
        let mut bins: Vec<C64> = (0..m)
            .map(|k| if k < m / 2 { lagrange[2 * k] } else { lagrange[n - 2 * k - 1].conj() })
            .collect();
        let mut out = vec![0i64; n];
        let mut walk = Walk::new(&self.table.entries, &self.hot, 0);
        match self.kernel {
            LiftKernel::ShiftAdd => walk.inverse::<true>(&mut bins, &mut out, 0, 1),
            LiftKernel::WideMul => walk.inverse::<false>(&mut bins, &mut out, 0, 1),
        }
        walk.flush(counters);
        counters.inverse_count += 1;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::table::build_twiddle_table;

    fn transform(n: usize, beta: u32, kernel: LiftKernel) -> IntegerTransform {
        IntegerTransform::new(Arc::new(build_twiddle_table(n, beta).unwrap()), kernel)
    }

    #[test]
    fn constant_maps_to_flat_spectrum() {
        let t = transform(16, 64, LiftKernel::WideMul);
        let mut p = vec![0i64; 16];
        p[0] = 3;
        let mut c = TransformCounters::default();
        let l = t.forward_coeffs(&p, 20, &mut c);
        for v in l {
            assert!((v.re - (3 << 20)).abs() <= 2 && v.im.abs() <= 2, "{v}");
        }
    }

    #[test]
    fn evaluations_at_odd_roots() {
        let n = 32;
        let t = transform(n, 64, LiftKernel::WideMul);
        let p: Vec<i64> = (0..n as i64).map(|j| (j * 37 % 11) - 5).collect();
        let mut c = TransformCounters::default();
        let l = t.forward_coeffs(&p, 30, &mut c);
        for (j, v) in l.iter().enumerate() {
            let root = std::f64::consts::PI * (2 * j + 1) as f64 / n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &pi) in p.iter().enumerate() {
                re += pi as f64 * (root * i as f64).cos();
                im += pi as f64 * (root * i as f64).sin();
            }
            let s = (1u64 << 30) as f64;
            assert!((v.re as f64 / s - re).abs() < 1e-6 && (v.im as f64 / s - im).abs() < 1e-6, "slot {j}");
        }
    }

    #[test]
    fn round_trip_is_exact_for_every_size() {
        for n in [4usize, 8, 16, 32, 64, 128] {
            for beta in [16, 38, 64] {
                let t = transform(n, beta, LiftKernel::ShiftAdd);
                let p: Vec<i64> = (0..n as i64).map(|j| (j * 7919 % 1013) - 500).collect();
                let mut c = TransformCounters::default();
                let l = t.forward_coeffs(&p, 8, &mut c);
                let back = t.inverse_coeffs(&l, &mut c);
                let expect: Vec<i64> = p.iter().map(|v| v << 8).collect();
                assert_eq!(back, expect, "n={n} beta={beta}");
            }
        }
    }

    #[test]
    fn kernels_agree() {
        let n = 64;
        let a = transform(n, 64, LiftKernel::ShiftAdd);
        let b = transform(n, 64, LiftKernel::WideMul);
        let p: Vec<i64> = (0..n as i64).map(|j| (j * 104729) % 65537 - 30000).collect();
        let (mut ca, mut cb) = (TransformCounters::default(), TransformCounters::default());
        assert_eq!(a.forward_coeffs(&p, 20, &mut ca), b.forward_coeffs(&p, 20, &mut cb));
        assert_eq!(ca.multiply_count, 0);
        assert!(cb.multiply_count > 0);
    }
}
