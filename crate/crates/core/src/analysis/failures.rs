//! Decryption-failure trials over random NAND gates.
//!
//! One key set per run, derived from the seed; trial `i` draws its input
//! bits and encryptions from `DetRng::trial(seed, i)`.

use rayon::prelude::*;
use serde::Serialize;

use super::report::{fmt_f64, ReportRow};
use crate::bootstrap::{decrypt_bit, encode_bit, encrypt_bit, eval_gate, generate_cloud_keys, CloudKeySet, GateKind};
use crate::error::{Error, Result};
use crate::keys::{sample_secret_keys, SecretKeys};
use crate::lattice::lwe_phase;
use crate::params::ParameterSet;
use crate::rng::{streams, DetRng};
use crate::transform::{Backend, TransformCounters};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRateReport {
    pub trials: u64,
    pub failures: u64,
    pub beta: u32,
    pub unroll_factor: usize,
    pub seed: u64,
    /// Largest `|phase - expected|` over all trials, in torus units.
    pub max_phase_error: f64,
    pub params: ParameterSet,
}

impl FailureRateReport {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    fn merge(mut self, o: FailureRateReport) -> FailureRateReport {
        self.trials += o.trials;
        self.failures += o.failures;
        self.max_phase_error = self.max_phase_error.max(o.max_phase_error);
        self
    }
}

impl ReportRow for FailureRateReport {
    const KIND: &'static str = "failures";
    fn columns() -> &'static [&'static str] {
        &["trials", "failures", "beta", "unroll_factor", "max_phase_error"]
    }
    fn values(&self) -> Vec<String> {
        vec![
            self.trials.to_string(),
            self.failures.to_string(),
            self.beta.to_string(),
            self.unroll_factor.to_string(),
            fmt_f64(self.max_phase_error),
        ]
    }
}

/// Keys for `params` derived from `seed`, prepared for the approximate backend.
pub fn trial_keys(params: &ParameterSet, seed: u64) -> Result<(SecretKeys, Backend, CloudKeySet)> {
    let sk = sample_secret_keys(params, seed)?;
    let backend = Backend::approximate(params.ring_degree, params.twiddle_bitwidth)?;
    let cloud = generate_cloud_keys(&sk, params, &mut DetRng::stream(seed, streams::CLOUD_KEYS))?.prepared(&backend)?;
    Ok((sk, backend, cloud))
}

/// Evaluates `trials` random NAND gates and counts wrong decryptions.
pub fn run_failure_trials(trials: u64, beta: u32, m: usize, params: &ParameterSet, seed: u64) -> Result<FailureRateReport> {
    if trials == 0 {
        return Err(Error::OutOfRange("at least one trial is required".into()));
    }
    let params = params.with_beta(beta)?.with_unroll(m)?;
    let (sk, backend, cloud) = trial_keys(&params, seed)?;
    let empty = FailureRateReport {
        trials: 0,
        failures: 0,
        beta,
        unroll_factor: m,
        seed,
        max_phase_error: 0.0,
        params: params.clone(),
    };
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = DetRng::trial(seed, i);
            let (a, b) = (rng.bit(), rng.bit());
            let ca = encrypt_bit(a, &sk.lwe, &params, &mut rng);
            let cb = encrypt_bit(b, &sk.lwe, &params, &mut rng);
            let out = eval_gate(GateKind::Nand, &ca, Some(&cb), &cloud, &backend, &mut TransformCounters::default())?;
            let want = GateKind::Nand.eval_plain(a, b);
            let err = (lwe_phase(&out, &sk.lwe)? - encode_bit(want)).to_f64().abs();
            Ok(FailureRateReport {
                trials: 1,
                failures: (decrypt_bit(&out, &sk.lwe)? != want) as u64,
                max_phase_error: err,
                ..empty.clone()
            })
        })
        .try_reduce(|| empty.clone(), |a, b| Ok(a.merge(b)))
}
