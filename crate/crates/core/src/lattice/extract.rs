use super::lwe::LweCiphertext;
use super::trlwe::TrlweCiphertext;
use crate::error::{Error, Result};

/// LWE encryption of coefficient `position` of the message, under the extracted key.
pub fn sample_extract(c: &TrlweCiphertext, position: usize) -> Result<LweCiphertext> {
    if position != 0 {
        return Err(Error::OutOfRange(format!("only position 0 is extracted, got {position}")));
    }
    let n = c.ring_degree();
    let mut mask = Vec::with_capacity(n * c.mask_count());
    for a in &c.mask {
        mask.push(a.coeffs[0]);
        mask.extend(a.coeffs[1..].iter().rev().map(|&x| -x));
    }
    Ok(LweCiphertext { mask, body: c.body.coeffs[0] })
}
