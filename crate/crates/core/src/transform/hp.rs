//! Big-integer fixed-point trigonometry used to build twiddle tables.
//!
//! Values are `BigInt`s scaled by `2^FRAC`. Precision is far beyond the
//! widest supported twiddle (64 bits), so each quantization below is the
//! correctly rounded value of the true real coefficient.

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub(crate) const FRAC: u32 = 192;

fn one() -> BigInt {
    BigInt::one() << FRAC
}

fn mul(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> FRAC
}

fn div(a: &BigInt, b: &BigInt) -> BigInt {
    (a << FRAC) / b
}

/// `arctan(1/x)` by its alternating series.
fn arctan_inv(x: u32) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut term = one() / &x;
    let mut sum = BigInt::zero();
    let mut k = 0u32;
    while !term.is_zero() {
        let t = &term / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        term /= &x2;
        k += 1;
    }
    sum
}

/// π from Machin's formula.
pub(crate) fn pi() -> BigInt {
    (arctan_inv(5) * 16) - (arctan_inv(239) * 4)
}

/// `(sin θ, cos θ)` by Taylor series; intended for `|θ| ≤ π/4`.
pub(crate) fn sin_cos(theta: &BigInt) -> (BigInt, BigInt) {
    let t2 = mul(theta, theta);
    let mut sin = BigInt::zero();
    let mut cos = BigInt::zero();
    let mut term = one();
    let mut k: u32 = 0;
    loop {
        // term = θ^k / k!
        if term.is_zero() {
            break;
        }
        match k % 4 {
            0 => cos += &term,
            2 => cos -= &term,
            _ => {}
        }
        let odd = mul(&term, theta) / BigInt::from(k + 1);
        match k % 4 {
            0 => sin += &odd,
            2 => sin -= &odd,
            _ => {}
        }
        term = mul(&term, &t2) / BigInt::from((k + 1) * (k + 2));
        k += 2;
    }
    (sin, cos)
}

/// Lifting coefficients `(p, u) = (-tan(r/2), sin r)` for a rotation by `r`.
pub(crate) fn lifting_pair(r: &BigInt) -> (BigInt, BigInt) {
    let (s, c) = sin_cos(r);
    let p = -div(&s, &(one() + c));
    (p, s)
}

/// `round(x · 2^beta)` with ties toward `+∞`.
pub(crate) fn quantize(x: &BigInt, beta: u32) -> i128 {
    let drop = FRAC - beta;
    let q: BigInt = (x + (BigInt::one() << (drop - 1))) >> drop;
    i128::try_from(q).expect("quantized coefficient fits in i128")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

/// The angle `π·num/den`.
fn angle(num: i64, den: u64) -> BigInt {
    pi() * BigInt::from(num) / BigInt::from(den)
}

fn to_f64(x: &BigInt) -> f64 {
    let scaled: BigInt = x >> (FRAC - 60);
    let v = i128::try_from(scaled).expect("finite value");
    v as f64 / (1u64 << 60) as f64
}

    #[test]
    fn pi_digits() {
        assert!((to_f64(&pi()) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn negative_shift_rounds_down() {
        let x = BigInt::from(-3);
        assert_eq!(x >> 1u32, BigInt::from(-2));
    }

    #[test]
    fn sin_cos_identity() {
        let theta = angle(1, 5);
        let (s, c) = sin_cos(&theta);
        let unit = mul(&s, &s) + mul(&c, &c) - one();
        assert!(unit.abs() < (BigInt::one() << (FRAC - 180)));
        assert!((to_f64(&s) - (std::f64::consts::PI / 5.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn quantize_ties_up() {
        let half = BigInt::one() << (FRAC - 1);
        assert_eq!(quantize(&half, 0), 1);
        assert_eq!(quantize(&(-half), 0), 0);
    }
}
