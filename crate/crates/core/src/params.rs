//! Parameter sets and their `key = value` text form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PRESET_VERSION: u32 = 1;
pub const MAX_UNROLL: usize = 5;

/// Embedded default preset.
pub const DEFAULT_PRESET: &str = include_str!("../presets/default.params");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub security_lambda: u32,
    pub lwe_dimension: usize,
    pub ring_degree: usize,
    pub trlwe_dimension: usize,
    pub gadget_base_log: u32,
    pub gadget_length: usize,
    pub ks_base_log: u32,
    pub ks_length: usize,
    pub lwe_noise_stddev: f64,
    pub trlwe_noise_stddev: f64,
    pub unroll_factor: usize,
    pub twiddle_bitwidth: u32,
}

impl Default for ParameterSet {
    fn default() -> Self {
        ParameterSet::parse(DEFAULT_PRESET).expect("embedded preset is valid")
    }
}

const KEYS: [&str; 12] = [
    "security_lambda",
    "lwe_dimension",
    "ring_degree",
    "trlwe_dimension",
    "gadget_base",
    "gadget_length",
    "ks_base_log",
    "ks_length",
    "lwe_noise_stddev",
    "trlwe_noise_stddev",
    "unroll_factor",
    "twiddle_bitwidth",
];

impl ParameterSet {
    pub fn gadget_base(&self) -> u32 {
        1 << self.gadget_base_log
    }

    pub fn group_count(&self) -> usize {
        self.lwe_dimension.div_ceil(self.unroll_factor)
    }

    pub fn keys_per_group(&self) -> usize {
        (1 << self.unroll_factor) - 1
    }

    pub fn tgsw_rows(&self) -> usize {
        (self.trlwe_dimension + 1) * self.gadget_length
    }

    pub fn extracted_dimension(&self) -> usize {
        self.ring_degree * self.trlwe_dimension
    }

    pub fn with_unroll(&self, m: usize) -> Result<ParameterSet> {
        let mut p = self.clone();
        p.unroll_factor = m;
        p.validate()?;
        Ok(p)
    }

    pub fn with_beta(&self, beta: u32) -> Result<ParameterSet> {
        let mut p = self.clone();
        p.twiddle_bitwidth = beta;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.lwe_dimension == 0 {
            return bad("lwe_dimension must be positive".into());
        }
        if !self.ring_degree.is_power_of_two() || self.ring_degree < 4 || self.ring_degree > 1 << 16 {
            return bad(format!("ring_degree {} must be a power of two in [4, 65536]", self.ring_degree));
        }
        if self.trlwe_dimension == 0 || self.trlwe_dimension > 8 {
            return bad("trlwe_dimension must be in [1, 8]".into());
        }
        if self.gadget_base_log == 0 || self.gadget_length == 0 {
            return bad("gadget base and length must be positive".into());
        }
        if self.gadget_base_log as usize * self.gadget_length > 32 {
            return bad("gadget base^length exceeds torus precision".into());
        }
        if self.gadget_base_log > 16 {
            return bad("gadget_base above 2^16 is unsupported".into());
        }
        if self.ks_length == 0 {
            return bad("ks_length must be at least 1".into());
        }
        if self.ks_base_log == 0 || self.ks_base_log as usize * self.ks_length > 32 {
            return bad("ks_base_log * ks_length must be in [1, 32]".into());
        }
        for (name, s) in [("lwe_noise_stddev", self.lwe_noise_stddev), ("trlwe_noise_stddev", self.trlwe_noise_stddev)] {
            if !s.is_finite() || !(0.0..0.5).contains(&s) {
                return bad(format!("{name} must be finite and in [0, 0.5)"));
            }
        }
        if self.unroll_factor == 0 || self.unroll_factor > MAX_UNROLL {
            return bad(format!("unroll_factor must be in [1, {MAX_UNROLL}]"));
        }
        if self.unroll_factor > self.lwe_dimension {
            return bad("unroll_factor exceeds lwe_dimension".into());
        }
        if !(4..=64).contains(&self.twiddle_bitwidth) {
            return bad("twiddle_bitwidth must be in [4, 64]".into());
        }
        if self.unroll_factor >= 4 && self.twiddle_bitwidth < 64 {
            return bad("unroll_factor >= 4 requires twiddle_bitwidth = 64".into());
        }
        Ok(())
    }

    /// Parses the versioned `key = value` form; `#` starts a comment.
    pub fn parse(text: &str) -> Result<ParameterSet> {
        let mut values: [Option<(usize, String)>; 12] = Default::default();
        let mut version = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: line_no, msg: "expected key = value".into() })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "version" {
                let v: u32 = value.parse().map_err(|_| Error::Parse { line: line_no, msg: "bad version".into() })?;
                if v != PRESET_VERSION {
                    return Err(Error::Parse { line: line_no, msg: format!("unsupported version {v}") });
                }
                version = Some(v);
                continue;
            }
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Parse { line: line_no, msg: format!("unknown key '{key}'") })?;
            if values[slot].is_some() {
                return Err(Error::Parse { line: line_no, msg: format!("duplicate key '{key}'") });
            }
            values[slot] = Some((line_no, value.to_string()));
        }
        if version.is_none() {
            return Err(Error::Parse { line: 0, msg: "missing version".into() });
        }
        let get = |i: usize| -> Result<&(usize, String)> {
            values[i].as_ref().ok_or_else(|| Error::Parse { line: 0, msg: format!("missing key '{}'", KEYS[i]) })
        };
        fn int<T: std::str::FromStr>(v: &(usize, String)) -> Result<T> {
            v.1.parse().map_err(|_| Error::Parse { line: v.0, msg: format!("invalid integer '{}'", v.1) })
        }
        fn real(v: &(usize, String)) -> Result<f64> {
            v.1.parse().map_err(|_| Error::Parse { line: v.0, msg: format!("invalid number '{}'", v.1) })
        }
        let base: u64 = int(get(4)?)?;
        if !base.is_power_of_two() || base < 2 {
            return Err(Error::Parse { line: get(4)?.0, msg: "gadget_base must be a power of two".into() });
        }
        let p = ParameterSet {
            security_lambda: int(get(0)?)?,
            lwe_dimension: int(get(1)?)?,
            ring_degree: int(get(2)?)?,
            trlwe_dimension: int(get(3)?)?,
            gadget_base_log: base.trailing_zeros(),
            gadget_length: int(get(5)?)?,
            ks_base_log: int(get(6)?)?,
            ks_length: int(get(7)?)?,
            lwe_noise_stddev: real(get(8)?)?,
            trlwe_noise_stddev: real(get(9)?)?,
            unroll_factor: int(get(10)?)?,
            twiddle_bitwidth: int(get(11)?)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        format!(
            "version = {PRESET_VERSION}\n\
             security_lambda = {}\n\
             lwe_dimension = {}\n\
             ring_degree = {}\n\
             trlwe_dimension = {}\n\
             gadget_base = {}\n\
             gadget_length = {}\n\
             ks_base_log = {}\n\
             ks_length = {}\n\
             lwe_noise_stddev = {:e}\n\
             trlwe_noise_stddev = {:e}\n\
             unroll_factor = {}\n\
             twiddle_bitwidth = {}\n",
            self.security_lambda,
            self.lwe_dimension,
            self.ring_degree,
            self.trlwe_dimension,
            self.gadget_base(),
            self.gadget_length,
            self.ks_base_log,
            self.ks_length,
            self.lwe_noise_stddev,
            self.trlwe_noise_stddev,
            self.unroll_factor,
            self.twiddle_bitwidth
        )
    }

    /// One-line `key=value;...` form for CSV cells.
    pub fn compact(&self) -> String {
        self.to_text().lines().collect::<Vec<_>>().join(";").replace(" = ", "=")
    }

    /// Small ring used by the exhaustive and toy tests.
    pub fn toy(n: usize, ring_degree: usize) -> ParameterSet {
        ParameterSet {
            security_lambda: 0,
            lwe_dimension: n,
            ring_degree,
            trlwe_dimension: 1,
            gadget_base_log: 10,
            gadget_length: 3,
            ks_base_log: 2,
            ks_length: 8,
            lwe_noise_stddev: 0.0,
            trlwe_noise_stddev: 0.0,
            unroll_factor: 1,
            twiddle_bitwidth: 64,
        }
    }
}
