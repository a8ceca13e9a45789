//! Deterministic CSV emission. One file per experiment family, a fixed
//! superset header, 17 significant digits for every value, and a sidecar
//! JSON file carrying enough provenance to regenerate the table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{HarnessError, RunSpec};

/// One output row. Columns that do not apply to a row stay empty in the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: Option<u64>,
    pub scheme: Option<&'static str>,
    pub seed: Option<u64>,
    pub member: Option<u64>,
    pub k: Option<u64>,
    /// Circle position, for the positional (per-center) families.
    pub x: Option<f64>,
    /// Preimage multiplicity, for the per-count families.
    pub m: Option<u64>,
    pub statistic: String,
    pub value: f64,
}

impl Row {
    pub fn series(n: Option<u64>, statistic: &str, values: &[f64]) -> Vec<Row> {
        values
            .iter()
            .enumerate()
            .map(|(k, &value)| Row {
                n,
                scheme: None,
                seed: None,
                member: None,
                k: Some(k as u64),
                x: None,
                m: None,
                statistic: statistic.to_string(),
                value,
            })
            .collect()
    }

    pub fn scalar(n: Option<u64>, statistic: &str, value: f64) -> Row {
        Row {
            n,
            scheme: None,
            seed: None,
            member: None,
            k: None,
            x: None,
            m: None,
            statistic: statistic.to_string(),
            value,
        }
    }
}

/// 17 significant digits: enough to reproduce any f64 bit pattern.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn sort_key(r: &Row) -> impl Ord {
    (
        r.n,
        r.scheme,
        r.member,
        r.seed,
        r.statistic.clone(),
        r.k,
        r.x.map(|x| x.to_bits()),
        r.m,
    )
}

/// Renders rows in a canonical order. Positions are nonnegative, so the
/// bit-pattern sort on `x` is the numeric order.
pub fn render(experiment: &str, rows: &mut Vec<Row>) -> String {
    rows.sort_by_key(sort_key);
    let mut out = String::new();
    out.push_str("experiment,n,scheme,seed,member,k,x,statistic,m,value\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            experiment,
            fmt_opt(&r.n),
            r.scheme.unwrap_or(""),
            fmt_opt(&r.seed),
            fmt_opt(&r.member),
            fmt_opt(&r.k),
            r.x.map(fmt_value).unwrap_or_default(),
            r.statistic,
            fmt_opt(&r.m),
            fmt_value(r.value),
        );
    }
    out
}

/// Sidecar provenance: the resolved spec, plus per-experiment notes and
/// derived summary numbers. Deliberately free of timestamps so repeated runs
/// emit identical bytes.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Sidecar<'a> {
    pub generator: String,
    pub spec: &'a RunSpec,
    pub notes: &'a [String],
    pub derived: &'a serde_json::Map<String, serde_json::Value>,
}

pub fn write_outputs(
    out_dir: &Path,
    spec: &RunSpec,
    rows: &mut Vec<Row>,
    notes: &[String],
    derived: &serde_json::Map<String, serde_json::Value>,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    std::fs::create_dir_all(out_dir)?;
    let name = spec.experiment_id.name();
    let csv_path = out_dir.join(format!("{name}.csv"));
    let meta_path = out_dir.join(format!("{name}.meta.json"));
    let csv = render(name, rows);
    let sidecar = Sidecar {
        generator: format!("ergolab {}", env!("CARGO_PKG_VERSION")),
        spec,
        notes,
        derived,
    };
    let meta = serde_json::to_string_pretty(&sidecar)?;
    crate::store::atomic_write(&csv_path, csv.as_bytes())?;
    crate::store::atomic_write(&meta_path, meta.as_bytes())?;
    Ok((csv_path, meta_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_render_with_17_significant_digits() {
        assert_eq!(fmt_value(1.0 / 12.0), "8.3333333333333329e-2");
        assert_eq!(fmt_value(0.0), "0.0000000000000000e0");
        // Round-trips exactly.
        let v = 0.12345678901234568_f64;
        assert_eq!(fmt_value(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn rendering_is_order_independent() {
        let mk = |k: u64, stat: &str| Row {
            n: Some(16),
            scheme: None,
            seed: None,
            member: None,
            k: Some(k),
            x: None,
            m: None,
            statistic: stat.to_string(),
            value: k as f64,
        };
        let mut a = vec![mk(1, "d"), mk(0, "d"), mk(0, "a")];
        let mut b = vec![mk(0, "a"), mk(0, "d"), mk(1, "d")];
        assert_eq!(render("t", &mut a), render("t", &mut b));
        assert!(render("t", &mut a).starts_with("experiment,n,scheme,seed,member,k,x,statistic,m,value\n"));
    }
}
