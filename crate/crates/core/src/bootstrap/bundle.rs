use num_complex::Complex64;

use super::keyset::BootstrapKeyBundleSet;
use crate::error::{check_len, Error, Result};
use crate::lattice::{gadget_value, TgswCiphertext, TgswLagrange};
use crate::transform::{integer::ROOT_SCALE_BITS, Backend, LagrangeRep, RENORM_BITS, TransformCounters, C64};

/// Exponent of `X^{-Σ_{j∈p} ā_j}` in `[0, 2N)` for every nonzero pattern `p`.
pub fn pattern_exponents(abar: &[usize], unroll_factor: usize, ring_degree: usize) -> Vec<usize> {
    let two_n = 2 * ring_degree;
    (1..1usize << unroll_factor)
        .map(|p| {
            let sum: usize = abar.iter().enumerate().filter(|(j, _)| p >> j & 1 == 1).map(|(_, &a)| a).sum();
            (two_n - sum % two_n) % two_n
        })
        .collect()
}

fn check_group<'a>(group_index: usize, abar: &[usize], set: &'a BootstrapKeyBundleSet, ring_degree: usize) -> Result<&'a [TgswCiphertext]> {
    let keys = set
        .groups
        .get(group_index)
        .ok_or_else(|| Error::OutOfRange(format!("group {group_index} of {}", set.group_count())))?;
    check_len(set.members(group_index).len(), abar.len())?;
    if let Some(a) = abar.iter().find(|&&a| a >= 2 * ring_degree) {
        return Err(Error::OutOfRange(format!("rounded mask {a} not below 2N = {}", 2 * ring_degree)));
    }
    Ok(keys)
}

/// `h + Σ_p (X^{-Σ_{j∈p} ā_j} - 1)·K_p` in the coefficient domain.
pub fn build_bundle(group_index: usize, abar: &[usize], set: &BootstrapKeyBundleSet) -> Result<TgswCiphertext> {
    let first = set.groups.first().and_then(|g| g.first()).ok_or(Error::InvalidParams("empty key set".into()))?;
    let n = first.ring_degree();
    let keys = check_group(group_index, abar, set, n)?;
    let mut out = TgswCiphertext::zero(first.mask_count(), n, first.gadget_base_log, first.gadget_length);
    out.add_gadget(1);
    for (key, e) in keys.iter().zip(pattern_exponents(abar, set.unroll_factor, n)) {
        out.add_assign(&key.mul_monomial_minus_one(e)?)?;
    }
    Ok(out)
}

/// The same bundle assembled from the keys' Lagrange caches: slot `j` of
/// every row is scaled by `ζ_j^e - 1` with `ζ_j = exp(iπ(2j+1)/N)`.
pub fn build_bundle_lagrange(
    group_index: usize,
    abar: &[usize],
    set: &BootstrapKeyBundleSet,
    backend: &Backend,
    counters: &mut TransformCounters,
) -> Result<TgswLagrange> {
    let n = backend.ring_degree();
    let keys = check_group(group_index, abar, set, n)?;
    let caches = keys
        .iter()
        .map(|k| k.lagrange_cache.as_ref().ok_or(Error::RepresentationMismatch("bootstrapping key has no Lagrange cache")))
        .collect::<Result<Vec<_>>>()?;
    let exps = pattern_exponents(abar, set.unroll_factor, n);
    let first = caches[0];
    if first.beta != backend.beta() {
        return Err(Error::RepresentationMismatch("bootstrapping keys were prepared by a different backend"));
    }
    let (l, bg) = (first.gadget_length, first.gadget_base_log);
    let comps = first.rows[0].len();
    let h = |r: usize, c: usize| if r / l == c { gadget_value(bg, r % l).signed() as i64 } else { 0 };
    let m = n / 2;
    let (rows, peak) = match backend {
        Backend::Reference(t) => {
            let w: Vec<Vec<Complex64>> = exps
                .iter()
                .map(|&e| (0..m).map(|j| t.root(e * (2 * j + 1)) - 1.0).collect())
                .collect();
            (0..first.rows.len())
                .map(|r| {
                    (0..comps)
                        .map(|c| {
                            let mut acc = vec![Complex64::new(h(r, c) as f64, 0.0); m];
                            for (wp, key) in w.iter().zip(&caches) {
                                let v = key.rows[r][c].as_float().ok_or(Error::RepresentationMismatch("expected float spectra"))?;
                                for ((a, x), y) in acc.iter_mut().zip(wp).zip(v) {
                                    *a += x * y;
                                }
                            }
                            Ok(LagrangeRep::Float(acc))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
                .map(|rows| (rows, 0))?
        }
        Backend::Approximate(t) => {
            let fixed_err = Error::RepresentationMismatch("expected fixed-point spectra");
            let (_, key_scale) = first.rows[0][0].as_fixed().ok_or(fixed_err.clone())?;
            // Products are taken as the high half of 128 bits, so a key term
            // lands at scale `key_scale + ROOT_SCALE_BITS - 64`, lowered by a
            // common shift that keeps the sum inside the inverse headroom.
            let product_scale = key_scale + ROOT_SCALE_BITS as i32 - 64;
            let h_peak = (0..first.rows.len())
                .flat_map(|r| (0..comps).map(move |c| (r, c)))
                .map(|(r, c)| h(r, c).unsigned_abs() as f64)
                .fold(0.0, f64::max);
            // Both parts of `ζ^e - 1` are at most 2 in magnitude.
            let w_peak = 2f64.powi(ROOT_SCALE_BITS as i32 + 1);
            let bound = h_peak * 2f64.powi(product_scale)
                + caches.iter().map(|k| 2.0 * w_peak * k.peak as f64 / 2f64.powi(64) + 2.0).sum::<f64>();
            let bits = bound.max(1.0).log2().floor() as i32 + 1;
            let down = (bits - RENORM_BITS as i32).max(0) as u32;
            let out_scale = product_scale - down as i32;
            let peak = (bound / 2f64.powi(down as i32)).ceil() as u64 + 2 * caches.len() as u64 + 1;
            let one = 1i64 << ROOT_SCALE_BITS;
            let roots = t.roots_fixed();
            let mask = roots.len() - 1;
            let w: Vec<Vec<C64>> = exps
                .iter()
                .map(|&e| {
                    (0..m)
                        .map(|j| {
                            let z = roots[(e * (2 * j + 1)) & mask];
                            C64::new((z.re - one) >> down, z.im >> down)
                        })
                        .collect()
                })
                .collect();
            let mut rows = Vec::with_capacity(first.rows.len());
            for r in 0..first.rows.len() {
                let mut row = Vec::with_capacity(comps);
                for c in 0..comps {
                    let h0 = scale_constant(h(r, c), out_scale);
                    let mut out = Vec::with_capacity(m);
                    for (i, (wp, key)) in w.iter().zip(&caches).enumerate() {
                        let (values, scale) = key.rows[r][c].as_fixed().ok_or(fixed_err.clone())?;
                        if scale != key_scale || values.len() != m {
                            return Err(Error::RepresentationMismatch("bootstrapping keys differ in shape or scale"));
                        }
                        if i == 0 {
                            out.extend(wp.iter().zip(values).map(|(x, y)| C64::new(h0, 0) + cmulhi(x, y)));
                        } else {
                            for ((o, x), y) in out.iter_mut().zip(wp).zip(values) {
                                *o += cmulhi(x, y);
                            }
                        }
                    }
                    row.push(LagrangeRep::Fixed { values: out, scale: out_scale });
                }
                rows.push(row);
            }
            (rows, peak)
        }
    };
    counters.bundle_scale_adds += exps.len() as u64;
    counters.bundle_h_adds += 1;
    Ok(TgswLagrange { gadget_base_log: bg, gadget_length: l, beta: backend.beta(), rows, peak })
}

/// `⌊a·b / 2^64⌋`.
#[inline(always)]
fn mulhi(a: i64, b: i64) -> i64 {
    ((a as i128 * b as i128) >> 64) as i64
}

#[inline(always)]
fn cmulhi(x: &C64, y: &C64) -> C64 {
    C64::new(mulhi(x.re, y.re) - mulhi(x.im, y.im), mulhi(x.re, y.im) + mulhi(x.im, y.re))
}

/// `round(c · 2^scale)`.
fn scale_constant(c: i64, scale: i32) -> i64 {
    if scale >= 0 {
        c << scale
    } else {
        let s = -scale as u32;
        (c + (1 << (s - 1))) >> s
    }
}
