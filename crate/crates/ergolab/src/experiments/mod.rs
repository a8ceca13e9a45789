//! The experiment driver: each family is a set of independent cells keyed by
//! their full parameterization. Cells are loaded from the store when present
//! and computed (in parallel) otherwise; the output table is assembled only
//! after every cell is in hand, in a canonical order, so the bytes of the CSV
//! do not depend on scheduling or on how many runs it took to get there.

mod distance;
mod graph;
mod prediction;
mod schemes;

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use ergolab_core::transfer::OperatorDiscretization;
use ergolab_core::{MapParams, PiecewiseDensity};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentId, HarnessError, RunSpec};
use crate::csvout::{self, Row};
use crate::hash::fnv64;
use crate::store::{CellData, Store};

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub spec: RunSpec,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    /// Abort with [`HarnessError::Interrupted`] after this many newly
    /// computed cells (reused cells don't count). A testing hook; `None`
    /// means run to completion.
    pub max_new_cells: Option<usize>,
}

impl RunRequest {
    pub fn new(spec: RunSpec, out_dir: impl Into<PathBuf>) -> Self {
        let out_dir = out_dir.into();
        let cache_dir = out_dir.join("cache");
        RunRequest { spec, out_dir, cache_dir, max_new_cells: None }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub csv_path: PathBuf,
    pub meta_path: PathBuf,
    pub computed: usize,
    pub reused: usize,
    pub rows: usize,
}

/// Everything an experiment assembles: table rows, human notes for the
/// sidecar, and derived machine-readable summary values.
pub(crate) type Assembly = (Vec<Row>, Vec<String>, serde_json::Map<String, serde_json::Value>);

pub fn run(req: &RunRequest) -> Result<RunSummary, HarnessError> {
    let store = Store::open(&req.cache_dir)?;
    let exec = Executor::new(&store, req.spec.experiment_id.name(), req.max_new_cells);
    let spec = &req.spec;
    let (mut rows, notes, derived) = match spec.experiment_id {
        ExperimentId::SrbDistance => distance::srb_distance(spec, &exec)?,
        ExperimentId::IterateDistance => distance::iterate_distance(spec, &exec)?,
        ExperimentId::MinDistanceTime => distance::min_distance_time(spec, &exec)?,
        ExperimentId::ShortTermVsPrediction => prediction::short_term(spec, &exec)?,
        ExperimentId::Injectivity => prediction::injectivity(spec, &exec)?,
        ExperimentId::LocalPreimageDensity => prediction::local_preimage(spec, &exec)?,
        ExperimentId::SchemeComparison => schemes::comparison(spec, &exec)?,
        ExperimentId::AsymptoticMu => graph::asymptotic_mu(spec, &exec)?,
        ExperimentId::TimeToCycle => graph::time_to_cycle(spec, &exec)?,
    };
    let (csv_path, meta_path) =
        csvout::write_outputs(&req.out_dir, spec, &mut rows, &notes, &derived)?;
    Ok(RunSummary {
        csv_path,
        meta_path,
        computed: exec.computed(),
        reused: exec.reused(),
        rows: rows.len(),
    })
}

/// Loads-or-computes cells with a shared compute budget.
pub(crate) struct Executor<'a> {
    store: &'a Store,
    experiment: &'a str,
    budget: Option<usize>,
    computed: AtomicUsize,
    reused: AtomicUsize,
    interrupted: AtomicBool,
}

impl<'a> Executor<'a> {
    fn new(store: &'a Store, experiment: &'a str, budget: Option<usize>) -> Self {
        Executor {
            store,
            experiment,
            budget,
            computed: AtomicUsize::new(0),
            reused: AtomicUsize::new(0),
            interrupted: AtomicBool::new(false),
        }
    }

    pub(crate) fn computed(&self) -> usize {
        self.computed.load(Ordering::Relaxed)
    }

    pub(crate) fn reused(&self) -> usize {
        self.reused.load(Ordering::Relaxed)
    }

    /// Runs all cells, in parallel, returning their payloads in key order.
    /// Random cells must derive their RNG from the key ([`cell_rng`]), which
    /// makes the result independent of scheduling.
    pub(crate) fn run_cells<F>(
        &self,
        keys: &[String],
        compute: F,
    ) -> Result<Vec<CellData>, HarnessError>
    where
        F: Fn(usize, &str) -> Result<CellData, HarnessError> + Sync,
    {
        let results: Vec<Result<Option<CellData>, HarnessError>> = keys
            .par_iter()
            .enumerate()
            .map(|(i, key)| {
                if let Some(data) = self.store.load(self.experiment, key) {
                    self.reused.fetch_add(1, Ordering::Relaxed);
                    return Ok(Some(data));
                }
                if self.interrupted.load(Ordering::Relaxed) {
                    return Ok(None);
                }
                let ticket = self.computed.fetch_add(1, Ordering::Relaxed);
                if self.budget.is_some_and(|b| ticket >= b) {
                    self.computed.fetch_sub(1, Ordering::Relaxed);
                    self.interrupted.store(true, Ordering::Relaxed);
                    return Ok(None);
                }
                let data = compute(i, key)?;
                self.store.save(self.experiment, key, &data)?;
                Ok(Some(data))
            })
            .collect();
        let mut out = Vec::with_capacity(keys.len());
        for r in results {
            match r? {
                Some(d) => out.push(d),
                None => {
                    return Err(HarnessError::Interrupted { computed: self.computed() });
                }
            }
        }
        Ok(out)
    }
}

/// The per-cell RNG: seeded from the cell key alone, so a cell's randomness
/// is a pure function of its parameterization.
pub(crate) fn cell_rng(key: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(fnv64(key.as_bytes()))
}

/// Canonical parameter fragment for cache keys; 17 significant digits so the
/// key pins the exact float values.
pub(crate) fn map_fragment(p: &MapParams) -> String {
    format!("map=c1:{:.16e},c2:{:.16e},shift:{:.16e}", p.c1(), p.c2(), p.shift())
}

pub(crate) fn operator(
    params: &MapParams,
    resolution: usize,
) -> Result<OperatorDiscretization, HarnessError> {
    Ok(OperatorDiscretization::new(params, resolution)?)
}

pub(crate) fn srb(op: &OperatorDiscretization) -> Result<PiecewiseDensity, HarnessError> {
    Ok(op.srb_density(1e-12, 5000)?)
}

/// Hashable fingerprint of an integer weight vector (for recurrence
/// detection on pushforward states).
pub(crate) fn fingerprint(counts: &[u64]) -> u64 {
    let mut h = 0xcbf29ce484222325_u64;
    for &c in counts {
        for b in c.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

/// The members this run iterates over: the 25-map perturbation grid when an
/// ensemble step is configured, otherwise just the base map.
pub(crate) fn members_of(spec: &RunSpec) -> Result<Vec<MapParams>, HarnessError> {
    match spec.ensemble_step {
        Some(step) => crate::ensemble::ensemble(&spec.params(), step),
        None => Ok(vec![spec.params()]),
    }
}

/// Mean and one-standard-deviation band of a bundle of series, emitted as
/// `{statistic}-mean` / `-minus-sd` / `-plus-sd` rows.
pub(crate) fn band_rows(
    rows: &mut Vec<Row>,
    n: u64,
    scheme: Option<&'static str>,
    statistic: &str,
    bundle: &[&[f64]],
    k_max: usize,
) {
    for k in 0..=k_max {
        let at_k: Vec<f64> = bundle.iter().map(|s| s[k]).collect();
        let m = crate::stats::mean(&at_k);
        let sd = crate::stats::std_dev(&at_k);
        for (suffix, value) in [("mean", m), ("minus-sd", m - sd), ("plus-sd", m + sd)] {
            rows.push(Row {
                scheme,
                k: Some(k as u64),
                statistic: format!("{statistic}-{suffix}"),
                value,
                ..Row::scalar(Some(n), "", 0.0)
            });
        }
    }
}
