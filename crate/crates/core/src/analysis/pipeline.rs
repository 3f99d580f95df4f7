//! Two-stage pipeline model of the blind rotation.
//!
//! Stage B builds the bundle of a group, stage E runs its external product.
//! Pipelined, bundle `i+1` overlaps external product `i`: the first bundle
//! and the last external product are exposed, every step between costs
//! the slower stage.

use std::time::Instant;

use serde::Serialize;

use super::report::{fmt_f64, ReportRow};
use crate::bootstrap::{build_bundle_lagrange, generate_cloud_keys, RotationMode};
use crate::error::{Error, Result};
use crate::keys::sample_secret_keys;
use crate::lattice::{decompose_trlwe, external_product_lagrange, trlwe_encrypt};
use crate::params::{ParameterSet, MAX_UNROLL};
use crate::rng::{streams, DetRng};
use crate::torus::TorusPolynomial;
use crate::transform::{Backend, TransformCounters, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineModel {
    pub group_count: usize,
    pub stage_time_bundle: f64,
    pub stage_time_ep: f64,
    pub mode: RotationMode,
}

impl PipelineModel {
    pub fn new(group_count: usize, stage_time_bundle: f64, stage_time_ep: f64, mode: RotationMode) -> Result<PipelineModel> {
        let model = PipelineModel { group_count, stage_time_bundle, stage_time_ep, mode };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.group_count == 0 {
            return Err(Error::InvalidParams("pipeline needs at least one group".into()));
        }
        for t in [self.stage_time_bundle, self.stage_time_ep] {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParams(format!("stage time {t} must be positive and finite")));
            }
        }
        Ok(())
    }
}

/// Sequential `G·(t_B + t_E)`; pipelined `t_B + (G-1)·max(t_B, t_E) + t_E`.
pub fn pipeline_makespan(model: &PipelineModel) -> f64 {
    let (g, tb, te) = (model.group_count as f64, model.stage_time_bundle, model.stage_time_ep);
    match model.mode {
        RotationMode::Sequential => g * (tb + te),
        RotationMode::Pipelined => tb + (g - 1.0) * tb.max(te) + te,
    }
}

/// Unit costs in nanoseconds, plus the ring shape that sets the counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpCostTable {
    /// One key's `(X^e - 1)` scale-and-add into a bundle.
    pub scale_add: f64,
    /// Seeding a bundle with the gadget matrix.
    pub h_add: f64,
    pub forward: f64,
    pub inverse: f64,
    /// One Lagrange-domain multiply-accumulate of a full polynomial.
    pub pointwise_mac: f64,
    pub decompose: f64,
    pub trlwe_dimension: usize,
    pub gadget_length: usize,
}

impl OpCostTable {
    pub fn validate(&self) -> Result<()> {
        let costs = [self.scale_add, self.h_add, self.forward, self.inverse, self.pointwise_mac, self.decompose];
        if costs.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::InvalidParams("operation costs must be positive".into()));
        }
        if self.trlwe_dimension == 0 || self.gadget_length == 0 {
            return Err(Error::InvalidParams("ring shape must be positive".into()));
        }
        Ok(())
    }

    /// Forward transforms, inverse transforms and polynomial MACs per external product.
    pub fn ep_counts(&self) -> (u64, u64, u64) {
        let k1 = (self.trlwe_dimension + 1) as u64;
        let l = self.gadget_length as u64;
        (k1 * l, k1, k1 * k1 * l)
    }
}

/// `(t_B, t_E)` for unroll factor `m`: `2^m - 1` scale-adds plus one `h`,
/// and `(k+1)·l` forward plus `k+1` inverse transforms per external product.
pub fn stage_time_estimate(m: usize, table: &OpCostTable) -> Result<(f64, f64)> {
    table.validate()?;
    if m == 0 || m > MAX_UNROLL {
        return Err(Error::OutOfRange(format!("unroll factor {m} not in [1, {MAX_UNROLL}]")));
    }
    let tb = ((1u64 << m) - 1) as f64 * table.scale_add + table.h_add;
    let (fwd, inv, macs) = table.ep_counts();
    let te = fwd as f64 * table.forward + inv as f64 * table.inverse + macs as f64 * table.pointwise_mac + table.decompose;
    Ok((tb, te))
}

fn median_ns(reps: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        f()?;
        samples.push(t.elapsed().as_nanos() as f64);
    }
    samples.sort_by(f64::total_cmp);
    Ok(samples[samples.len() / 2].max(1.0))
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let len = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
    let my = points.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Times each operation `reps` times on keys for `params` and keeps the median.
pub fn calibrate_op_costs(params: &ParameterSet, backend: &Backend, seed: u64, reps: usize) -> Result<OpCostTable> {
    if reps == 0 {
        return Err(Error::OutOfRange("at least one repetition is required".into()));
    }
    let n = params.ring_degree;
    let mut base = params.clone();
    base.lwe_dimension = 4;
    base.twiddle_bitwidth = 64;
    let mut rng = DetRng::stream(seed, streams::ENCRYPTION);
    let mut points = Vec::new();
    for m in 1..=4usize {
        let p = base.with_unroll(m)?;
        let sk = sample_secret_keys(&p, seed)?;
        let cloud = generate_cloud_keys(&sk, &p, &mut DetRng::stream(seed, streams::CLOUD_KEYS))?.prepared(backend)?;
        let abar: Vec<usize> = (0..m).map(|_| rng.below(2 * n as u64) as usize).collect();
        let mut c = TransformCounters::default();
        let t = median_ns(reps, || build_bundle_lagrange(0, &abar, &cloud.bundle_set, backend, &mut c).map(|_| ()))?;
        points.push((p.keys_per_group() as f64, t));
    }
    let scale_add = least_squares_slope(&points).max(1.0);
    let rows = params.tgsw_rows();
    let comps = params.trlwe_dimension + 1;
    let h_add = median_ns(reps, || {
        let seeded: Vec<Vec<Vec<C64>>> = (0..rows)
            .map(|r| (0..comps).map(|c| vec![C64::new((r * comps + c) as i64, 0); n / 2]).collect())
            .collect();
        std::hint::black_box(seeded);
        Ok(())
    })?;

    let p = base.with_unroll(1)?;
    let sk = sample_secret_keys(&p, seed)?;
    let cloud = generate_cloud_keys(&sk, &p, &mut DetRng::stream(seed, streams::CLOUD_KEYS))?.prepared(backend)?;
    let mut c = TransformCounters::default();
    let bundle = build_bundle_lagrange(0, &[1], &cloud.bundle_set, backend, &mut c)?;
    let mut mu = TorusPolynomial::zero(n);
    rng.fill_uniform(&mut mu.coeffs);
    let acc = trlwe_encrypt(&mu, &sk.trlwe, 0.0, &mut rng)?;
    let (bg, l) = (params.gadget_base_log, params.gadget_length);
    let digits = decompose_trlwe(&acc, bg, l);
    let decompose = median_ns(reps, || {
        std::hint::black_box(decompose_trlwe(&acc, bg, l));
        Ok(())
    })?;
    let forward = median_ns(reps, || backend.forward_int(&digits[0], bg - 1, &mut c).map(|_| ()))?;
    let spectrum = backend.forward_int(&digits[0], bg - 1, &mut c)?;
    let row = &bundle.rows[0][0];
    let macs = 16;
    let pointwise_mac = median_ns(reps, || {
        let mut a = backend.accumulator();
        for _ in 0..macs {
            a.mac(&spectrum, row, &mut c)?;
        }
        std::hint::black_box(a);
        Ok(())
    })? / macs as f64;
    let product = {
        let mut a = backend.accumulator();
        a.mac(&spectrum, row, &mut c)?;
        a.finish()
    };
    let inverse = median_ns(reps, || backend.inverse_torus(&product, &mut c).map(|_| ()))?;
    let table = OpCostTable {
        scale_add,
        h_add,
        forward,
        inverse,
        pointwise_mac,
        decompose,
        trlwe_dimension: params.trlwe_dimension,
        gadget_length: l,
    };
    // Unattributed external-product overhead is charged to decomposition.
    let ep = median_ns(reps, || external_product_lagrange(&bundle, &acc, backend, &mut c).map(|_| ()))?;
    let (_, te) = stage_time_estimate(1, &table)?;
    Ok(OpCostTable { decompose: decompose + (ep - te).max(0.0), ..table })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputRow {
    pub unroll_factor: usize,
    pub group_count: usize,
    pub stage_time_bundle: f64,
    pub stage_time_ep: f64,
    pub sequential: f64,
    pub pipelined: f64,
    /// Bootstraps per second of the pipelined model, with times in nanoseconds.
    pub throughput: f64,
}

impl ReportRow for ThroughputRow {
    const KIND: &'static str = "pipeline_model";
    fn columns() -> &'static [&'static str] {
        &["unroll_factor", "group_count", "stage_time_bundle", "stage_time_ep", "sequential", "pipelined", "throughput"]
    }
    fn values(&self) -> Vec<String> {
        vec![
            self.unroll_factor.to_string(),
            self.group_count.to_string(),
            fmt_f64(self.stage_time_bundle),
            fmt_f64(self.stage_time_ep),
            fmt_f64(self.sequential),
            fmt_f64(self.pipelined),
            fmt_f64(self.throughput),
        ]
    }
}

/// Both makespans for every `m`, with `G = ⌈n/m⌉`.
pub fn throughput_curve(lwe_dimension: usize, m_values: &[usize], table: &OpCostTable) -> Result<Vec<ThroughputRow>> {
    m_values
        .iter()
        .map(|&m| {
            let (tb, te) = stage_time_estimate(m, table)?;
            let g = lwe_dimension.div_ceil(m);
            let seq = pipeline_makespan(&PipelineModel::new(g, tb, te, RotationMode::Sequential)?);
            let pipe = pipeline_makespan(&PipelineModel::new(g, tb, te, RotationMode::Pipelined)?);
            Ok(ThroughputRow {
                unroll_factor: m,
                group_count: g,
                stage_time_bundle: tb,
                stage_time_ep: te,
                sequential: seq,
                pipelined: pipe,
                throughput: 1e9 / pipe,
            })
        })
        .collect()
}

/// Unroll factor with the highest pipelined throughput.
pub fn throughput_optimum(rows: &[ThroughputRow]) -> Option<usize> {
    rows.iter().max_by(|a, b| a.throughput.total_cmp(&b.throughput)).map(|r| r.unroll_factor)
}
