//! Dyadic coefficients and the three-step lifting rotation.

use crate::error::{Error, Result};

/// One signed power of two, `sign · 2^-shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftTerm {
    pub shift: i32,
    pub negative: bool,
}

/// A coefficient `alpha / 2^beta` with its signed-digit shift recipe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicCoefficient {
    pub alpha: i128,
    pub beta: u32,
    pub recipe: Vec<ShiftTerm>,
}

/// Non-adjacent form of `alpha` as `(exponent, negative)` pairs, low to high.
fn csd_digits(alpha: i128) -> Vec<(u32, bool)> {
    let mut out = Vec::new();
    let mut v = alpha;
    let mut e = 0u32;
    while v != 0 {
        if v & 1 != 0 {
            let digit = 2 - (v & 3) as i8;
            out.push((e, digit < 0));
            v -= digit as i128;
        }
        v >>= 1;
        e += 1;
    }
    out
}

impl DyadicCoefficient {
    pub fn from_alpha(alpha: i128, beta: u32) -> DyadicCoefficient {
        let recipe = csd_digits(alpha)
            .into_iter()
            .map(|(e, negative)| ShiftTerm { shift: beta as i32 - e as i32, negative })
            .collect();
        DyadicCoefficient { alpha, beta, recipe }
    }

    pub fn value(&self) -> f64 {
        self.alpha as f64 / 2f64.powi(self.beta as i32)
    }

    /// Numerator rebuilt from the recipe; equals `alpha` by construction.
    pub fn recipe_numerator(&self) -> i128 {
        self.recipe
            .iter()
            .map(|t| {
                let v = 1i128 << (self.beta as i32 - t.shift);
                if t.negative { -v } else { v }
            })
            .sum()
    }

    pub fn negated(&self) -> DyadicCoefficient {
        DyadicCoefficient::from_alpha(-self.alpha, self.beta)
    }
}

/// Nearest `alpha / 2^beta` to `t`, ties up.
pub fn quantize_dyadic(t: f64, beta: u32) -> Result<DyadicCoefficient> {
    if !(4..=64).contains(&beta) {
        return Err(Error::OutOfRange(format!("beta {beta} not in [4, 64]")));
    }
    if !t.is_finite() || t.abs() >= 2.0 {
        return Err(Error::OutOfRange(format!("lifting coefficient {t} must satisfy |T| < 2")));
    }
    let x = t * 2f64.powi(beta as i32);
    let alpha = if x.fract() == 0.0 { x } else { (x + 0.5).floor() };
    Ok(DyadicCoefficient::from_alpha(alpha as i128, beta))
}

/// Operation tallies for one lifting evaluation path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LiftTally {
    pub adds: u64,
    pub shifts: u64,
    pub multiplies: u64,
}

/// How the rounded product `⌈alpha·x / 2^beta⌋` is evaluated.
///
/// Both kernels return identical integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LiftKernel {
    /// Signed sum of shifted copies of `x`, one per recipe term.
    ShiftAdd,
    /// One widening multiply by `alpha`.
    #[default]
    WideMul,
}

/// A dyadic coefficient prepared for the transform inner loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lift {
    mag: u64,
    neg: bool,
    beta: u32,
    terms: Vec<(u32, bool)>,
}

impl Lift {
    pub fn new(c: &DyadicCoefficient) -> Lift {
        let mag = u64::try_from(c.alpha.unsigned_abs()).expect("|alpha| < 2^64");
        Lift {
            mag,
            neg: c.alpha < 0,
            beta: c.beta,
            terms: csd_digits(c.alpha),
        }
    }

    pub fn negated(&self) -> Lift {
        Lift {
            mag: self.mag,
            neg: !self.neg && self.mag != 0,
            beta: self.beta,
            terms: self.terms.iter().map(|&(e, n)| (e, !n)).collect(),
        }
    }

    pub fn alpha(&self) -> i128 {
        if self.neg { -(self.mag as i128) } else { self.mag as i128 }
    }

    pub fn is_zero(&self) -> bool {
        self.mag == 0
    }

    pub fn recipe_len(&self) -> usize {
        self.terms.len()
    }

    /// `⌈alpha·x / 2^beta⌋` through a single widening multiply.
    #[inline(always)]
    pub fn apply_wide(&self, x: i64) -> i64 {
        let p = self.mag as u128 * x.unsigned_abs() as u128;
        let negative = self.neg != (x < 0);
        let half = 1u128 << (self.beta - 1);
        let m = negative as u128;
        let v = ((p + half - m) >> self.beta) as i64;
        if negative { -v } else { v }
    }

    /// `⌈alpha·x / 2^beta⌋` as a signed sum of shifts of `x`.
    #[inline]
    pub fn apply_shift_add(&self, x: i64) -> i64 {
        let wide = x as i128;
        let mut acc: i128 = 0;
        for &(e, negative) in &self.terms {
            let t = wide << e;
            if negative { acc -= t } else { acc += t }
        }
        ((acc + (1i128 << (self.beta - 1))) >> self.beta) as i64
    }

    #[inline(always)]
    pub fn apply(&self, x: i64, kernel: LiftKernel, tally: &mut LiftTally) -> i64 {
        match kernel {
            LiftKernel::WideMul => {
                tally.multiplies += 1;
                tally.adds += 1;
                tally.shifts += 1;
                self.apply_wide(x)
            }
            LiftKernel::ShiftAdd => {
                let k = self.terms.len() as u64;
                tally.shifts += k + 1;
                tally.adds += k + 1;
                self.apply_shift_add(x)
            }
        }
    }
}

/// Lifting realization of a rotation by `q·π/2 + r` with `|r| ≤ π/4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rotation {
    pub quarter: u8,
    pub p: DyadicCoefficient,
    pub u: DyadicCoefficient,
    lp: Lift,
    lu: Lift,
    lp_neg: Lift,
    lu_neg: Lift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Rotation {
    pub fn new(quarter: u8, p: DyadicCoefficient, u: DyadicCoefficient) -> Rotation {
        let lp = Lift::new(&p);
        let lu = Lift::new(&u);
        Rotation { quarter: quarter & 3, lp_neg: lp.negated(), lu_neg: lu.negated(), lp, lu, p, u }
    }

    pub fn identity(beta: u32) -> Rotation {
        let z = DyadicCoefficient::from_alpha(0, beta);
        Rotation::new(0, z.clone(), z)
    }

    pub fn is_trivial(&self) -> bool {
        self.lp.is_zero() && self.lu.is_zero()
    }

    /// `(cos, sin)` of the rotation the three lifts realize exactly.
    pub fn realized(&self) -> (f64, f64) {
        let (p, u) = (self.p.value(), self.u.value());
        let (c, s) = (1.0 + p * u, u);
        match self.quarter {
            0 => (c, s),
            1 => (-s, c),
            2 => (-c, -s),
            _ => (s, -c),
        }
    }

    /// Rotate by `+θ` (`conj = false`) or `-θ` (`conj = true`).
    #[inline(always)]
    pub fn rotate(&self, re: i64, im: i64, conj: bool, kernel: LiftKernel, t: &mut LiftTally) -> (i64, i64) {
        let (lp, lu) = if conj { (&self.lp_neg, &self.lu_neg) } else { (&self.lp, &self.lu) };
        let (mut re, mut im) = (re, im);
        if !lp.is_zero() || !lu.is_zero() {
            re += lp.apply(im, kernel, t);
            im += lu.apply(re, kernel, t);
            re += lp.apply(im, kernel, t);
        }
        let q = if conj { (4 - self.quarter) & 3 } else { self.quarter };
        quarter_turn(re, im, q)
    }

    /// Exact inverse of [`Rotation::rotate`] with the same `conj`.
    #[inline(always)]
    pub fn unrotate(&self, re: i64, im: i64, conj: bool, kernel: LiftKernel, t: &mut LiftTally) -> (i64, i64) {
        let (lp, lu) = if conj { (&self.lp_neg, &self.lu_neg) } else { (&self.lp, &self.lu) };
        let q = if conj { self.quarter & 3 } else { (4 - self.quarter) & 3 };
        let (mut re, mut im) = quarter_turn(re, im, q);
        if !lp.is_zero() || !lu.is_zero() {
            re -= lp.apply(im, kernel, t);
            im -= lu.apply(re, kernel, t);
            re -= lp.apply(im, kernel, t);
        }
        (re, im)
    }
}

#[inline(always)]
pub(crate) fn quarter_turn(re: i64, im: i64, q: u8) -> (i64, i64) {
    match q & 3 {
        0 => (re, im),
        1 => (-im, re),
        2 => (-re, -im),
        _ => (im, -re),
    }
}

/// Applies `rot` to the pair `x` in the given direction.
pub fn lifting_rotate(x: (i64, i64), rot: &Rotation, direction: Direction, kernel: LiftKernel) -> (i64, i64) {
    let mut t = LiftTally::default();
    match direction {
        Direction::Forward => rot.rotate(x.0, x.1, false, kernel, &mut t),
        Direction::Inverse => rot.unrotate(x.0, x.1, false, kernel, &mut t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_over_128() {
        let c = quantize_dyadic(9.0 / 128.0, 7).unwrap();
        assert_eq!(c.alpha, 9);
        let mut shifts: Vec<i32> = c.recipe.iter().map(|t| t.shift).collect();
        shifts.sort();
        assert_eq!(shifts, vec![4, 7]);
        assert!(c.recipe.iter().all(|t| !t.negative));
    }

    #[test]
    fn zero_has_empty_recipe() {
        let c = quantize_dyadic(0.0, 16).unwrap();
        assert_eq!(c.alpha, 0);
        assert!(c.recipe.is_empty());
    }

    #[test]
    fn cos_quarter_pi_at_eight_bits() {
        let c = quantize_dyadic(std::f64::consts::FRAC_1_SQRT_2, 8).unwrap();
        assert_eq!(c.alpha, 181);
        assert_eq!(c.recipe_numerator(), 181);
    }

    #[test]
    fn beta_range_checked() {
        assert!(quantize_dyadic(0.5, 3).is_err());
        assert!(quantize_dyadic(0.5, 65).is_err());
        assert!(quantize_dyadic(2.5, 16).is_err());
    }

    #[test]
    fn kernels_agree_on_edges() {
        for alpha in [0i128, 1, -1, 181, -181, (1i128 << 63) + 12345, -(1i128 << 63) - 999, (1i128 << 64) - 1] {
            let lift = Lift::new(&DyadicCoefficient::from_alpha(alpha, 64));
            for x in [0i64, 1, -1, 7, -7, 1 << 61, -(1 << 61), (1 << 62) - 1] {
                let exact = (alpha * x as i128 + (1i128 << 63)) >> 64;
                assert_eq!(lift.apply_wide(x) as i128, exact, "alpha {alpha} x {x}");
                assert_eq!(lift.apply_shift_add(x) as i128, exact);
            }
        }
    }

    #[test]
    fn identity_rotation() {
        let r = Rotation::identity(32);
        assert_eq!(lifting_rotate((5, -9), &r, Direction::Forward, LiftKernel::ShiftAdd), (5, -9));
    }
}
