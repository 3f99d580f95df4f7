use std::sync::mpsc::sync_channel;

use serde::{Deserialize, Serialize};

use super::bundle::build_bundle_lagrange;
use super::keyset::CloudKeySet;
use crate::error::{check_len, Error, Result};
use crate::lattice::{external_product_lagrange, TrlweCiphertext};
use crate::transform::{Backend, TransformCounters};

/// Scheduling of bundle construction against external products.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationMode {
    #[default]
    Sequential,
    /// Bundle `i+1` is built on a second thread while the external product of group `i` runs.
    Pipelined,
}

impl std::str::FromStr for RotationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(RotationMode::Sequential),
            "pipelined" => Ok(RotationMode::Pipelined),
            _ => Err(Error::InvalidParams(format!("unknown rotation mode {s:?}"))),
        }
    }
}

/// `X^{b̄ - Σ ā_j s_j} · acc` through one external product per key group.
pub fn blind_rotate(
    acc: &TrlweCiphertext,
    abar: &[usize],
    bbar: usize,
    cloud: &CloudKeySet,
    backend: &Backend,
    counters: &mut TransformCounters,
) -> Result<TrlweCiphertext> {
    blind_rotate_with(acc, abar, bbar, cloud, backend, RotationMode::Sequential, counters)
}

pub fn blind_rotate_with(
    acc: &TrlweCiphertext,
    abar: &[usize],
    bbar: usize,
    cloud: &CloudKeySet,
    backend: &Backend,
    mode: RotationMode,
    counters: &mut TransformCounters,
) -> Result<TrlweCiphertext> {
    let set = &cloud.bundle_set;
    check_len(set.lwe_dimension, abar.len())?;
    check_len(cloud.params.ring_degree, acc.ring_degree())?;
    let mut acc = acc.mul_monomial(bbar % (2 * acc.ring_degree()));
    let groups = set.group_count();
    match mode {
        RotationMode::Sequential => {
            for g in 0..groups {
                let bundle = build_bundle_lagrange(g, &abar[set.members(g)], set, backend, counters)?;
                acc = external_product_lagrange(&bundle, &acc, backend, counters)?;
            }
            Ok(acc)
        }
        RotationMode::Pipelined => std::thread::scope(|scope| {
            let (tx, rx) = sync_channel(0);
            let producer = scope.spawn(move || {
                let mut local = TransformCounters::default();
                for g in 0..groups {
                    let bundle = build_bundle_lagrange(g, &abar[set.members(g)], set, backend, &mut local);
                    let failed = bundle.is_err();
                    if tx.send(bundle).is_err() || failed {
                        break;
                    }
                }
                local
            });
            let mut result = Ok(());
            for _ in 0..groups {
                let step = rx
                    .recv()
                    .map_err(|_| Error::InvalidParams("bundle producer stopped early".into()))
                    .and_then(|b| b)
                    .and_then(|bundle| external_product_lagrange(&bundle, &acc, backend, counters));
                match step {
                    Ok(next) => acc = next,
                    Err(e) => {
                        result = Err(e);
                        break;
                    }
                }
            }
            drop(rx);
            let local = producer.join().expect("bundle producer panicked");
            counters.merge(&local);
            result.map(|_| acc)
        }),
    }
}
