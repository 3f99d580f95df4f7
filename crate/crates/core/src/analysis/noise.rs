//! Output noise against the unroll factor, split by ablation.
//!
//! The sign test vector extracts to `±1/8` whatever the rotation, so the
//! pre-key-switch phase error holds only external-product, transform and
//! key noise:
//! - noiseless keys on the reference backend leave the gadget rounding of
//!   every external product (`ep_noise_var`);
//! - the same keys on the approximate backend add the fixed-point
//!   transform rounding, measured as the paired difference (`rounding_noise_var`);
//! - real keys on the reference backend add key noise (`bk_noise_var`).

use serde::Serialize;

use super::report::{fmt_f64, ReportRow};
use crate::bootstrap::{encode_bit, encrypt_bit, generate_cloud_keys, rotate_and_extract, CloudKeySet, Program, RotationMode};
use crate::error::{Error, Result};
use crate::keys::{sample_secret_keys, SecretKeys};
use crate::lattice::{key_switch, lwe_phase, LweCiphertext};
use crate::params::{ParameterSet, MAX_UNROLL};
use crate::rng::{streams, DetRng};
use crate::transform::{measure_error_db, Backend, TransformCounters};

/// Trials used for the transform error column.
const ERROR_DB_TRIALS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseReport {
    pub unroll_factor: usize,
    pub trials: usize,
    /// Gadget rounding accumulated over the external products, torus².
    pub ep_noise_var: f64,
    /// Fixed-point transform rounding, torus².
    pub rounding_noise_var: f64,
    /// Contribution of bootstrapping-key noise, torus².
    pub bk_noise_var: f64,
    /// Stored keys per group, `2^m - 1`.
    pub bk_key_count: usize,
    pub bk_total_keys: usize,
    pub external_products_per_bootstrap: u64,
    /// Phase error of the extracted sample with real keys, approximate backend.
    pub measured_output_phase_stddev: f64,
    /// Phase error after key switching.
    pub keyswitched_phase_stddev: f64,
    pub transform_error_db: f64,
}

impl ReportRow for NoiseReport {
    const KIND: &'static str = "noise_scan";
    fn columns() -> &'static [&'static str] {
        &[
            "unroll_factor",
            "trials",
            "ep_noise_var",
            "rounding_noise_var",
            "bk_noise_var",
            "key_count",
            "total_keys",
            "external_products",
            "output_phase_stddev",
            "keyswitched_phase_stddev",
            "transform_error_db",
        ]
    }
    fn values(&self) -> Vec<String> {
        vec![
            self.unroll_factor.to_string(),
            self.trials.to_string(),
            fmt_f64(self.ep_noise_var),
            fmt_f64(self.rounding_noise_var),
            fmt_f64(self.bk_noise_var),
            self.bk_key_count.to_string(),
            self.bk_total_keys.to_string(),
            self.external_products_per_bootstrap.to_string(),
            fmt_f64(self.measured_output_phase_stddev),
            fmt_f64(self.keyswitched_phase_stddev),
            fmt_f64(self.transform_error_db),
        ]
    }
}

fn mean_square(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64
}

struct Run {
    extracted: Vec<f64>,
    switched: Vec<f64>,
    external_products: u64,
}

fn run(inputs: &[(u8, LweCiphertext)], sk: &SecretKeys, cloud: &CloudKeySet, backend: &Backend, switch: bool) -> Result<Run> {
    let mut out = Run { extracted: Vec::new(), switched: Vec::new(), external_products: 0 };
    for (bit, c) in inputs {
        let mut counters = TransformCounters::default();
        let e = rotate_and_extract(c, Program::Sign, cloud, backend, RotationMode::Sequential, &mut counters)?;
        out.external_products = counters.external_products;
        out.extracted.push((lwe_phase(&e, &sk.extracted)? - encode_bit(*bit)).to_f64());
        if switch {
            let s = key_switch(&e, &cloud.ks)?;
            out.switched.push((lwe_phase(&s, &sk.lwe)? - encode_bit(*bit)).to_f64());
        }
    }
    Ok(out)
}

/// One report per unroll factor, all sharing the secret key and inputs.
pub fn noise_scan(m_values: &[usize], trials: usize, params: &ParameterSet, seed: u64) -> Result<Vec<NoiseReport>> {
    if trials == 0 {
        return Err(Error::OutOfRange("at least one trial is required".into()));
    }
    if let Some(m) = m_values.iter().find(|&&m| m == 0 || m > MAX_UNROLL) {
        return Err(Error::OutOfRange(format!("unroll factor {m} not in [1, {MAX_UNROLL}]")));
    }
    params.validate()?;
    let n = params.ring_degree;
    let sk = sample_secret_keys(params, seed)?;
    let mut rng = DetRng::stream(seed, streams::ENCRYPTION);
    let inputs: Vec<(u8, LweCiphertext)> = (0..trials)
        .map(|_| {
            let bit = rng.bit();
            (bit, encrypt_bit(bit, &sk.lwe, params, &mut rng))
        })
        .collect();
    let reference = Backend::reference(n);
    let approximate = Backend::approximate(n, params.twiddle_bitwidth)?;
    let transform_error_db = measure_error_db(params.twiddle_bitwidth, ERROR_DB_TRIALS, n)?;
    m_values
        .iter()
        .map(|&m| {
            let p = params.with_unroll(m)?;
            let mut quiet_p = p.clone();
            quiet_p.trlwe_noise_stddev = 0.0;
            let keys = |p: &ParameterSet| generate_cloud_keys(&sk, p, &mut DetRng::stream(seed, streams::CLOUD_KEYS));
            let noisy = keys(&p)?;
            let quiet = keys(&quiet_p)?;
            let quiet_ref = run(&inputs, &sk, &quiet.clone().prepared(&reference)?, &reference, false)?;
            let quiet_apx = run(&inputs, &sk, &quiet.prepared(&approximate)?, &approximate, false)?;
            let noisy_ref = run(&inputs, &sk, &noisy.clone().prepared(&reference)?, &reference, false)?;
            let noisy_apx = run(&inputs, &sk, &noisy.prepared(&approximate)?, &approximate, true)?;
            let ep = mean_square(&quiet_ref.extracted);
            let paired: Vec<f64> = quiet_apx.extracted.iter().zip(&quiet_ref.extracted).map(|(a, b)| a - b).collect();
            Ok(NoiseReport {
                unroll_factor: m,
                trials,
                ep_noise_var: ep,
                rounding_noise_var: mean_square(&paired),
                bk_noise_var: (mean_square(&noisy_ref.extracted) - ep).max(0.0),
                bk_key_count: p.keys_per_group(),
                bk_total_keys: p.keys_per_group() * p.group_count(),
                external_products_per_bootstrap: noisy_apx.external_products,
                measured_output_phase_stddev: mean_square(&noisy_apx.extracted).sqrt(),
                keyswitched_phase_stddev: mean_square(&noisy_apx.switched).sqrt(),
                transform_error_db,
            })
        })
        .collect()
}
