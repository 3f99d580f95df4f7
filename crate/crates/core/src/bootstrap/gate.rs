use serde::{Deserialize, Serialize};

use super::blind_rotate::{blind_rotate_with, RotationMode};
use super::keyset::CloudKeySet;
use crate::error::{Error, Result};
use crate::lattice::{decode_sign, key_switch, lwe_encrypt_torus, lwe_phase, sample_extract, LweCiphertext, TrlweCiphertext};
use crate::params::ParameterSet;
use crate::rng::DetRng;
use crate::torus::{round_to_2n, Torus, TorusPolynomial};
use crate::transform::{Backend, TransformCounters};

/// Torus `1/8`, the magnitude of the gate encoding.
pub const GATE_MU: Torus = Torus(1 << 29);
/// Torus `1/4`, the literal `µ′ = µ/2` of the `{0, 1/2}` codec.
pub const HALF_MU_PRIME: Torus = Torus(1 << 30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Nand,
    And,
    Or,
    Xor,
    Xnor,
    Not,
}

impl GateKind {
    pub const ALL: [GateKind; 6] = [GateKind::Nand, GateKind::And, GateKind::Or, GateKind::Xor, GateKind::Xnor, GateKind::Not];

    pub fn arity(self) -> usize {
        if self == GateKind::Not { 1 } else { 2 }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Nand => "NAND",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
        }
    }

    /// Plaintext truth function.
    pub fn eval_plain(self, a: u8, b: u8) -> u8 {
        let (a, b) = (a & 1, b & 1);
        match self {
            GateKind::Nand => 1 - (a & b),
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Xor => a ^ b,
            GateKind::Xnor => 1 - (a ^ b),
            GateKind::Not => 1 - a,
        }
    }
}

impl std::str::FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown gate kind {s:?}")))
    }
}

impl std::fmt::Display for GateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub fn encode_bit(bit: u8) -> Torus {
    if bit & 1 == 1 { GATE_MU } else { -GATE_MU }
}

/// Encrypts `bit` as `±1/8` under the LWE key.
pub fn encrypt_bit(bit: u8, s: &[u8], params: &ParameterSet, rng: &mut DetRng) -> LweCiphertext {
    lwe_encrypt_torus(encode_bit(bit), s, params.lwe_noise_stddev, rng)
}

pub fn decrypt_bit(c: &LweCiphertext, s: &[u8]) -> Result<u8> {
    Ok(decode_sign(lwe_phase(c, s)?))
}

/// Function evaluated by the blind rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Program {
    /// `+1/8` for a phase in `(0, 1/2)`, `-1/8` for `(-1/2, 0)`.
    Sign,
    /// `1/2` for `|phase| > 1/4`, else `0`: test vector `µ′·X^{N/2}·Σ X^j` and offset `(0, µ′)`.
    Half,
}

impl Program {
    pub fn test_vector(self, ring_degree: usize) -> TorusPolynomial {
        match self {
            Program::Sign => TorusPolynomial::constant_all(ring_degree, -GATE_MU),
            Program::Half => TorusPolynomial::constant_all(ring_degree, HALF_MU_PRIME).mul_monomial(ring_degree / 2),
        }
    }

    pub fn offset(self) -> Torus {
        match self {
            Program::Sign => Torus::ZERO,
            Program::Half => HALF_MU_PRIME,
        }
    }
}

/// Round, blind rotate, extract and key switch.
pub fn bootstrap_program(
    c: &LweCiphertext,
    program: Program,
    cloud: &CloudKeySet,
    backend: &Backend,
    mode: RotationMode,
    counters: &mut TransformCounters,
) -> Result<LweCiphertext> {
    key_switch(&rotate_and_extract(c, program, cloud, backend, mode, counters)?, &cloud.ks)
}

/// The bootstrap up to key switching; the result is under the extracted key.
pub fn rotate_and_extract(
    c: &LweCiphertext,
    program: Program,
    cloud: &CloudKeySet,
    backend: &Backend,
    mode: RotationMode,
    counters: &mut TransformCounters,
) -> Result<LweCiphertext> {
    let n = cloud.params.ring_degree;
    let bbar = round_to_2n(c.body, n);
    let abar: Vec<usize> = c.mask.iter().map(|&a| round_to_2n(a, n)).collect();
    let acc = TrlweCiphertext::trivial(cloud.params.trlwe_dimension, program.test_vector(n));
    let acc = blind_rotate_with(&acc, &abar, bbar, cloud, backend, mode, counters)?;
    let mut extracted = sample_extract(&acc, 0)?;
    extracted.add_constant(program.offset());
    counters.bootstraps += 1;
    Ok(extracted)
}

/// Fresh encryption of the sign of `c`'s phase at `±1/8`.
pub fn gate_bootstrap(c: &LweCiphertext, cloud: &CloudKeySet, backend: &Backend, counters: &mut TransformCounters) -> Result<LweCiphertext> {
    bootstrap_program(c, Program::Sign, cloud, backend, RotationMode::Sequential, counters)
}

/// Refresh of the `{0, 1/2}` codec.
pub fn half_bootstrap(c: &LweCiphertext, cloud: &CloudKeySet, backend: &Backend, counters: &mut TransformCounters) -> Result<LweCiphertext> {
    bootstrap_program(c, Program::Half, cloud, backend, RotationMode::Sequential, counters)
}

/// The gate's linear combination before bootstrapping.
pub fn gate_linear(kind: GateKind, c0: &LweCiphertext, c1: Option<&LweCiphertext>) -> Result<LweCiphertext> {
    let arity_err = || Error::Arity(format!("{kind} takes {} input(s)", kind.arity()));
    if kind == GateKind::Not {
        return match c1 {
            None => Ok(c0.negate()),
            Some(_) => Err(arity_err()),
        };
    }
    let c1 = c1.ok_or_else(arity_err)?;
    let mut sum = c0.clone();
    sum.add_assign(c1)?;
    let quarter = Torus(1 << 30);
    let mut out = match kind {
        GateKind::Nand => sum.negate(),
        GateKind::And | GateKind::Or => sum,
        GateKind::Xor => sum.scaled(2),
        GateKind::Xnor => sum.scaled(-2),
        GateKind::Not => unreachable!(),
    };
    out.add_constant(match kind {
        GateKind::Nand | GateKind::Or => GATE_MU,
        GateKind::And => -GATE_MU,
        GateKind::Xor => quarter,
        _ => -quarter,
    });
    Ok(out)
}

pub fn eval_gate(
    kind: GateKind,
    c0: &LweCiphertext,
    c1: Option<&LweCiphertext>,
    cloud: &CloudKeySet,
    backend: &Backend,
    counters: &mut TransformCounters,
) -> Result<LweCiphertext> {
    eval_gate_with(kind, c0, c1, cloud, backend, RotationMode::Sequential, counters)
}

pub fn eval_gate_with(
    kind: GateKind,
    c0: &LweCiphertext,
    c1: Option<&LweCiphertext>,
    cloud: &CloudKeySet,
    backend: &Backend,
    mode: RotationMode,
    counters: &mut TransformCounters,
) -> Result<LweCiphertext> {
    let lin = gate_linear(kind, c0, c1)?;
    if kind == GateKind::Not {
        return Ok(lin);
    }
    bootstrap_program(&lin, Program::Sign, cloud, backend, mode, counters)
}
