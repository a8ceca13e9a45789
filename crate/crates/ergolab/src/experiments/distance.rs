//! Distance-vs-time families for the canonical grid discretization: distance
//! to the stationary density, distance to the true iterate, and the time at
//! which the stationary distance bottoms out.

use ergolab_core::measure::cramer;
use ergolab_core::{DiscretizedMap, GridMeasure};
use serde_json::json;

use super::{fingerprint, map_fragment, operator, srb, Assembly, Executor};
use crate::config::{HarnessError, RunSpec};
use crate::csvout::Row;
use crate::ensemble::detect_recurrence;
use crate::stats;
use crate::store::CellData;

/// Distance from the k-th pushforward of the uniform grid measure to the
/// stationary density, for k = 0..=k_max, plus state fingerprints for
/// recurrence reporting.
fn distance_to_srb_series(
    map: &DiscretizedMap,
    k_max: usize,
    srb: &ergolab_core::PiecewiseDensity,
) -> (Vec<f64>, Vec<u64>) {
    let n = map.n();
    let mut counts = vec![1u64; n];
    let mut distances = Vec::with_capacity(k_max + 1);
    let mut prints = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        prints.push(fingerprint(&counts));
        distances.push(cramer(&GridMeasure::from_counts(&counts), srb));
        if k < k_max {
            counts = map.pushforward_counts(&counts);
        }
    }
    (distances, prints)
}

fn srb_cells(spec: &RunSpec, exec: &Executor) -> Result<Vec<CellData>, HarnessError> {
    let params = spec.params();
    let op = operator(&params, spec.resolution)?;
    let stationary = srb(&op)?;
    let keys: Vec<String> = spec
        .grid_orders
        .iter()
        .map(|&n| {
            format!(
                "v1|{}|n={n}|kmax={}|res={}",
                map_fragment(&params),
                spec.k_max,
                spec.resolution
            )
        })
        .collect();
    exec.run_cells(&keys, |i, _key| {
        let n = spec.grid_orders[i] as usize;
        let map = DiscretizedMap::discretize(&params, n);
        let (distances, prints) = distance_to_srb_series(&map, spec.k_max, &stationary);
        let mut cell = CellData::with_series("distance-to-srb", distances);
        if let Some((t, period)) = detect_recurrence(&prints) {
            cell.scalars.insert("recurrence-time".into(), t as f64);
            cell.scalars.insert("recurrence-period".into(), period as f64);
        }
        Ok(cell)
    })
}

pub(crate) fn srb_distance(spec: &RunSpec, exec: &Executor) -> Result<Assembly, HarnessError> {
    let cells = srb_cells(spec, exec)?;
    let mut rows = Vec::new();
    let mut derived = serde_json::Map::new();
    let mut recurrences = serde_json::Map::new();
    for (&n, cell) in spec.grid_orders.iter().zip(&cells) {
        rows.extend(Row::series(Some(n), "distance-to-srb", cell.series("distance-to-srb")));
        if let (Some(&t), Some(&p)) =
            (cell.scalars.get("recurrence-time"), cell.scalars.get("recurrence-period"))
        {
            rows.push(Row::scalar(Some(n), "recurrence-time", t));
            rows.push(Row::scalar(Some(n), "recurrence-period", p));
            recurrences.insert(n.to_string(), json!({ "time": t, "period": p }));
        }
    }
    if !recurrences.is_empty() {
        derived.insert("recurrences".into(), recurrences.into());
    }
    let notes = vec![
        "distance-to-srb: quadratic distance between the k-th pushforward of the uniform \
         grid measure under the rounded map and the stationary density of the smooth map."
            .into(),
        "recurrence-time/period: first exact repeat of the pushforward state within the \
         horizon, when one exists (reporting heuristic, not a fitted period)."
            .into(),
    ];
    Ok((rows, notes, derived))
}

pub(crate) fn iterate_distance(spec: &RunSpec, exec: &Executor) -> Result<Assembly, HarnessError> {
    let params = spec.params();
    let op = operator(&params, spec.resolution)?;
    let iterates = op.density_iterates(spec.k_max);
    let keys: Vec<String> = spec
        .grid_orders
        .iter()
        .map(|&n| {
            format!(
                "v1|{}|n={n}|kmax={}|res={}",
                map_fragment(&params),
                spec.k_max,
                spec.resolution
            )
        })
        .collect();
    let cells = exec.run_cells(&keys, |i, _key| {
        let n = spec.grid_orders[i] as usize;
        let map = DiscretizedMap::discretize(&params, n);
        let mut counts = vec![1u64; n];
        let mut distance = Vec::with_capacity(spec.k_max + 1);
        let mut scaled = Vec::with_capacity(spec.k_max + 1);
        for (k, iterate) in iterates.iter().enumerate() {
            let d = cramer(&GridMeasure::from_counts(&counts), iterate);
            distance.push(d);
            scaled.push((n as f64 * d) * (n as f64 * d));
            if k < spec.k_max {
                counts = map.pushforward_counts(&counts);
            }
        }
        let mut cell = CellData::with_series("distance", distance);
        cell.series.insert("scaled-sq".into(), scaled);
        Ok(cell)
    })?;
    let mut rows = Vec::new();
    for (&n, cell) in spec.grid_orders.iter().zip(&cells) {
        rows.extend(Row::series(Some(n), "distance", cell.series("distance")));
        rows.extend(Row::series(Some(n), "scaled-sq", cell.series("scaled-sq")));
    }
    let notes = vec![
        "distance: quadratic distance between the k-th pushforward of the uniform grid \
         measure under the rounded map and the k-th transfer-operator iterate of the \
         uniform density."
            .into(),
        "scaled-sq: the same distance squared and multiplied by N^2 (the scale on which \
         the short-term prediction lives)."
            .into(),
    ];
    Ok((rows, notes, serde_json::Map::new()))
}

pub(crate) fn min_distance_time(spec: &RunSpec, exec: &Executor) -> Result<Assembly, HarnessError> {
    let cells = srb_cells(spec, exec)?;
    let mut rows = Vec::new();
    let mut ts = Vec::new();
    for (&n, cell) in spec.grid_orders.iter().zip(&cells) {
        let series = cell.series("distance-to-srb");
        let t = stats::min_distance_time(series);
        rows.extend(Row::series(Some(n), "distance-to-srb", series));
        rows.push(Row::scalar(Some(n), "min-distance-time", t as f64));
        rows.push(Row::scalar(Some(n), "min-distance", series[t]));
        ts.push(t as f64);
    }
    let mut derived = serde_json::Map::new();
    if spec.grid_orders.len() >= 2 {
        let logs: Vec<f64> = spec.grid_orders.iter().map(|&n| (n as f64).log10()).collect();
        let (slope, intercept, r) = stats::linear_fit(&logs, &ts);
        derived.insert(
            "minTimeVsLog10N".into(),
            json!({ "slope": slope, "intercept": intercept, "correlation": r }),
        );
    }
    let notes = vec![
        "min-distance-time: the first k minimizing the distance-to-srb series (ties to \
         the smallest k)."
            .into(),
        "minTimeVsLog10N in the sidecar: least-squares fit of that time against log10(N)."
            .into(),
    ];
    Ok((rows, notes, derived))
}
