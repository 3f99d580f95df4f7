//! Transform error against twiddle bitwidth.

use serde::Serialize;

use super::report::{fmt_f64, ReportRow};
use crate::error::Result;
use crate::transform::{measure_error_db, measure_reference_error_db};

pub const DEFAULT_BETAS: [u32; 6] = [16, 24, 32, 38, 48, 64];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub beta: u32,
    pub ring_degree: usize,
    pub trials: usize,
    pub error_db: f64,
    /// Double-precision baseline at the same degree.
    pub reference_db: f64,
}

impl ReportRow for ErrorRow {
    const KIND: &'static str = "error_sweep";
    fn columns() -> &'static [&'static str] {
        &["beta", "ring_degree", "trials", "error_db", "reference_db"]
    }
    fn values(&self) -> Vec<String> {
        vec![
            self.beta.to_string(),
            self.ring_degree.to_string(),
            self.trials.to_string(),
            fmt_f64(self.error_db),
            fmt_f64(self.reference_db),
        ]
    }
}

/// Relative RMS product error in dB for every `β`, one row each.
pub fn error_sweep(beta_values: &[u32], ring_degree: usize, trials: usize) -> Result<Vec<ErrorRow>> {
    let reference_db = measure_reference_error_db(trials, ring_degree)?;
    beta_values
        .iter()
        .map(|&beta| {
            Ok(ErrorRow { beta, ring_degree, trials, error_db: measure_error_db(beta, trials, ring_degree)?, reference_db })
        })
        .collect()
}

/// True when the error falls strictly as `β` grows.
pub fn strictly_decreasing(rows: &[ErrorRow]) -> bool {
    let mut sorted: Vec<&ErrorRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.beta);
    sorted.windows(2).all(|w| w[1].error_db < w[0].error_db)
}
