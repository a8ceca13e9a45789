//! Families that pit measured grid behavior against its analytic predictors:
//! the short-term discrepancy prediction (over the perturbation ensemble),
//! the rate of injectivity, and the local preimage-count distributions.

use ergolab_core::measure::cramer;
use ergolab_core::predictions::{
    injectivity_limits, preimage_poly_step, rates_of_injectivity, PolynomialField,
};
use ergolab_core::{DiscretizedMap, GridMeasure};
use serde_json::json;

use super::{map_fragment, members_of, operator, Assembly, Executor};
use crate::config::{HarnessError, RunSpec};
use crate::csvout::Row;
use crate::ensemble::local_preimage_histogram;
use crate::stats;
use crate::store::CellData;

const THRESHOLD_BAND: f64 = 0.05;

fn aggregate_rows(
    rows: &mut Vec<Row>,
    n: u64,
    statistic: &str,
    per_member: &[&[f64]],
    k_max: usize,
) {
    super::band_rows(rows, n, None, statistic, per_member, k_max);
}

fn mean_series(per_member: &[&[f64]], k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .map(|k| {
            let at_k: Vec<f64> = per_member.iter().map(|s| s[k]).collect();
            stats::mean(&at_k)
        })
        .collect()
}

pub(crate) fn short_term(spec: &RunSpec, exec: &Executor) -> Result<Assembly, HarnessError> {
    let members = members_of(spec)?;
    let mut keys = Vec::new();
    for &n in &spec.grid_orders {
        for (idx, member) in members.iter().enumerate() {
            keys.push(format!(
                "v1|member={idx}|{}|n={n}|kmax={}|res={}",
                map_fragment(member),
                spec.k_max,
                spec.resolution
            ));
        }
    }
    let cells = exec.run_cells(&keys, |i, _key| {
        let n = spec.grid_orders[i / members.len()] as usize;
        let member = &members[i % members.len()];
        let op = operator(member, spec.resolution)?;
        let prediction = op.short_term_predictions(spec.k_max)?;
        let iterates = op.density_iterates(spec.k_max);
        let map = DiscretizedMap::discretize(member, n);
        let mut counts = vec![1u64; n];
        let mut empirical = Vec::with_capacity(spec.k_max + 1);
        for (k, iterate) in iterates.iter().enumerate() {
            let d = cramer(&GridMeasure::from_counts(&counts), iterate);
            empirical.push((n as f64 * d) * (n as f64 * d));
            if k < spec.k_max {
                counts = map.pushforward_counts(&counts);
            }
        }
        let mut cell = CellData::with_series("empirical", empirical);
        cell.series.insert("prediction".into(), prediction);
        Ok(cell)
    })?;

    let mut rows = Vec::new();
    let mut thresholds = serde_json::Map::new();
    for (ni, &n) in spec.grid_orders.iter().enumerate() {
        let group = &cells[ni * members.len()..(ni + 1) * members.len()];
        for (idx, cell) in group.iter().enumerate() {
            for stat in ["empirical", "prediction"] {
                for (k, &value) in cell.series(stat).iter().enumerate() {
                    rows.push(Row {
                        member: Some(idx as u64),
                        k: Some(k as u64),
                        statistic: stat.to_string(),
                        value,
                        ..Row::scalar(Some(n), "", 0.0)
                    });
                }
            }
        }
        let emp: Vec<&[f64]> = group.iter().map(|c| c.series("empirical")).collect();
        let pred: Vec<&[f64]> = group.iter().map(|c| c.series("prediction")).collect();
        aggregate_rows(&mut rows, n, "empirical", &emp, spec.k_max);
        aggregate_rows(&mut rows, n, "prediction", &pred, spec.k_max);
        let t = stats::threshold_time(
            &mean_series(&emp, spec.k_max),
            &mean_series(&pred, spec.k_max),
            THRESHOLD_BAND,
        );
        thresholds.insert(n.to_string(), json!(t));
    }
    let mut derived = serde_json::Map::new();
    derived.insert("thresholdBand".into(), json!(THRESHOLD_BAND));
    derived.insert("thresholdTimes".into(), thresholds.into());
    let notes = vec![
        "empirical: N^2 times the squared quadratic distance between the k-th rounded-map \
         pushforward of the uniform grid measure and the k-th operator iterate, one series \
         per ensemble member."
            .into(),
        "prediction: the closed-form limit of the same quantity.".into(),
        format!(
            "thresholdTimes: first k where |empirical - prediction| / prediction (of the \
             ensemble means) exceeds {THRESHOLD_BAND}; the series length ({}) is the \
             never-exceeded sentinel.",
            spec.k_max + 1
        ),
    ];
    Ok((rows, notes, derived))
}

pub(crate) fn injectivity(spec: &RunSpec, exec: &Executor) -> Result<Assembly, HarnessError> {
    let params = spec.params();
    let op = operator(&params, spec.resolution)?;
    let predicted = injectivity_limits(&op, spec.k_max)?;
    let keys: Vec<String> = spec
        .grid_orders
        .iter()
        .map(|&n| format!("v1|{}|n={n}|kmax={}", map_fragment(&params), spec.k_max))
        .collect();
    let cells = exec.run_cells(&keys, |i, _key| {
        let n = spec.grid_orders[i] as usize;
        let map = DiscretizedMap::discretize(&params, n);
        Ok(CellData::with_series("empirical", rates_of_injectivity(&map, spec.k_max)))
    })?;

    let mut rows = Row::series(None, "predicted-limit", &predicted);
    let mut deviations = serde_json::Map::new();
    for (&n, cell) in spec.grid_orders.iter().zip(&cells) {
        let emp = cell.series("empirical");
        rows.extend(Row::series(Some(n), "empirical", emp));
        let worst = emp
            .iter()
            .zip(&predicted)
            .map(|(e, p)| ((e - p) / p).abs())
            .fold(0.0, f64::max);
        deviations.insert(n.to_string(), json!(worst));
    }
    let mut derived = serde_json::Map::new();
    derived.insert("worstRelativeDeviation".into(), deviations.into());
    let notes = vec![
        "empirical: fraction of grid points in the image of the k-th iterate of the \
         rounded map (exact set iteration)."
            .into(),
        "predicted-limit: the large-N limit of that fraction, from the mean-density \
         recursion on the operator grid (independent of N, so its rows carry no N)."
            .into(),
    ];
    Ok((rows, notes, derived))
}

/// Which k values the local histograms are taken at.
fn histogram_times(k_max: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = [0usize, 1, 2, 4, 10].into_iter().filter(|&k| k <= k_max).collect();
    if !ks.contains(&k_max) {
        ks.push(k_max);
    }
    ks
}

/// Largest preimage multiplicity emitted per center (the tail above this is
/// negligible at the depths studied and would bloat the table).
const EMITTED_M_CAP: usize = 10;
/// Centers per grid order (evenly spaced cells).
const CENTER_COUNT: usize = 1024;

pub(crate) fn local_preimage(spec: &RunSpec, exec: &Executor) -> Result<Assembly, HarnessError> {
    let params = spec.params();
    let ks = histogram_times(spec.k_max);
    let ks_frag: String =
        ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
    let keys: Vec<String> = spec
        .grid_orders
        .iter()
        .map(|&n| {
            format!(
                "v1|{}|n={n}|ks={ks_frag}|r={}|centers={CENTER_COUNT}",
                map_fragment(&params),
                spec.window
            )
        })
        .collect();
    let cells = exec.run_cells(&keys, |i, _key| {
        let n = spec.grid_orders[i] as usize;
        let map = DiscretizedMap::discretize(&params, n);
        let count = CENTER_COUNT.min(n);
        let centers: Vec<usize> = (0..count).map(|c| c * n / count).collect();
        let mut cell = CellData::with_series(
            "center-x",
            centers.iter().map(|&c| c as f64 / n as f64).collect(),
        );
        for &k in &ks {
            let hists = local_preimage_histogram(&map, k, spec.window, &centers);
            let max_m = hists.first().map_or(0, |h| h.len() - 1).min(EMITTED_M_CAP);
            for m in 0..=max_m {
                let series: Vec<f64> = hists.iter().map(|h| h[m]).collect();
                cell.series.insert(format!("empirical|k={k}|m={m}"), series);
            }
        }
        Ok(cell)
    })?;

    let mut rows = Vec::new();
    for (&n, cell) in spec.grid_orders.iter().zip(&cells) {
        let xs = cell.series("center-x");
        for &k in &ks {
            for m in 0..=EMITTED_M_CAP {
                let Some(series) = cell.series.get(&format!("empirical|k={k}|m={m}")) else {
                    continue;
                };
                for (i, &value) in series.iter().enumerate() {
                    rows.push(Row {
                        k: Some(k as u64),
                        x: Some(xs[i]),
                        m: Some(m as u64),
                        statistic: "local-frequency".to_string(),
                        value,
                        ..Row::scalar(Some(n), "", 0.0)
                    });
                }
            }
        }
    }

    // The analytic counterpart: coefficient fields of the preimage-count
    // polynomials, sampled on the operator grid (N-independent).
    let op = operator(&params, spec.resolution)?;
    let mut field = PolynomialField::initial(op.m(), spec.m_max);
    let stride = (op.m() / CENTER_COUNT).max(1);
    let emit_field = |rows: &mut Vec<Row>, field: &PolynomialField, k: usize| {
        for m in 0..=field.degree().min(EMITTED_M_CAP) {
            let column = field.column(m);
            for j in (0..op.m()).step_by(stride) {
                rows.push(Row {
                    k: Some(k as u64),
                    x: Some(op.node(j)),
                    m: Some(m as u64),
                    statistic: "predicted-coefficient".to_string(),
                    value: column[j],
                    ..Row::scalar(None, "", 0.0)
                });
            }
        }
    };
    let last = *ks.last().expect("nonempty times");
    for k in 0..=last {
        if ks.contains(&k) {
            emit_field(&mut rows, &field, k);
        }
        if k < last {
            field = preimage_poly_step(&op, &field)?;
        }
    }

    let notes = vec![
        format!(
            "local-frequency: over the window of 2R = {} cells centered at x, the \
             fraction whose k-step preimage count equals m.",
            2 * spec.window
        ),
        "predicted-coefficient: the matching coefficient of the preimage-count \
         generating polynomial on the operator grid (no N column)."
            .into(),
        format!(
            "multiplicities above m = {EMITTED_M_CAP} and all-but-{CENTER_COUNT} centers \
             are omitted from the table; raw cells keep everything that was computed."
        ),
    ];
    Ok((rows, notes, serde_json::Map::new()))
}
