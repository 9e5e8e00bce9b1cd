//! Result files: `results.csv`, `results.json`, `curves.csv` and a
//! plain-text summary table. Contents depend only on the table, so identical
//! runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::metrics::MetricId;
use crate::harness::sensitivity::ResultTable;
use crate::perturb::PerturbKind;

pub const RESULTS_CSV: &str = "results.csv";
pub const RESULTS_JSON: &str = "results.json";
pub const CURVES_CSV: &str = "curves.csv";
pub const TABLE_TXT: &str = "table.txt";

const RESULTS_HEADER: [&str; 8] = [
    "dataset",
    "metric",
    "perturbation",
    "median",
    "iqr",
    "responded",
    "no_response",
    "per_seed",
];
const CURVES_HEADER: [&str; 6] = ["dataset", "metric", "perturbation", "seed", "p", "score"];

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| format!("{v:?}"))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner()
        .map_err(|e| Error::io("<memory>", std::io::Error::other(e.to_string())))
}

/// The per-row summary as CSV. Per-seed values are `;`-separated, with `NA`
/// for seeds that did not respond.
pub fn results_csv(table: &ResultTable) -> Result<Vec<u8>> {
    csv_bytes(
        &RESULTS_HEADER,
        table.rows.iter().map(|r| {
            vec![
                r.dataset.clone(),
                r.metric.to_string(),
                r.perturbation.to_string(),
                opt(r.median),
                opt(r.iqr),
                r.per_seed.iter().flatten().count().to_string(),
                r.no_response.to_string(),
                r.per_seed.iter().map(|&x| opt(x)).collect::<Vec<_>>().join(";"),
            ]
        }),
    )
}

pub fn curves_csv(table: &ResultTable) -> Result<Vec<u8>> {
    csv_bytes(
        &CURVES_HEADER,
        table.curves.iter().map(|c| {
            vec![
                c.dataset.clone(),
                c.metric.to_string(),
                c.perturbation.to_string(),
                c.seed.to_string(),
                format!("{:?}", c.p),
                format!("{:?}", c.score),
            ]
        }),
    )
}

/// Metric rows by perturbation columns, one block per dataset. Cells read
/// `median ± iqr`, or `---` when the metric did not respond.
pub fn render_table(table: &ResultTable) -> String {
    let mut datasets: Vec<&str> = Vec::new();
    let mut metrics: Vec<MetricId> = Vec::new();
    let mut kinds: Vec<PerturbKind> = Vec::new();
    for r in &table.rows {
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
        if !metrics.contains(&r.metric) {
            metrics.push(r.metric);
        }
        if !kinds.contains(&r.perturbation) {
            kinds.push(r.perturbation);
        }
    }

    let width = metrics.iter().map(|m| m.to_string().len()).max().unwrap_or(6).max(6);
    let col = kinds.iter().map(|k| k.name().len()).max().unwrap_or(0).max(15);
    let mut out = String::new();
    for ds in datasets {
        let _ = writeln!(out, "dataset: {ds}");
        let _ = write!(out, "{:<width$}", "metric");
        for k in &kinds {
            let _ = write!(out, "  {:>col$}", k.name());
        }
        out.push('\n');
        for &m in &metrics {
            let _ = write!(out, "{:<width$}", m.to_string());
            for &k in &kinds {
                let cell = match table.rows.iter().find(|r| r.dataset == ds && r.metric == m && r.perturbation == k) {
                    None => String::new(),
                    Some(r) if r.no_response => "---".to_string(),
                    Some(r) => match (r.median, r.iqr) {
                        (Some(med), Some(iqr)) => format!("{med:.3} ± {iqr:.3}"),
                        _ => "---".to_string(),
                    },
                };
                let _ = write!(out, "  {cell:>col$}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Writes all result files into `dir` (created if missing) and returns
/// their paths.
pub fn emit_results(table: &ResultTable, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        (RESULTS_CSV, results_csv(table)?),
        (RESULTS_JSON, {
            let mut json = serde_json::to_vec_pretty(table)?;
            json.push(b'\n');
            json
        }),
        (CURVES_CSV, curves_csv(table)?),
        (TABLE_TXT, render_table(table).into_bytes()),
    ];
    let mut paths = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sensitivity::ResultRow;

    fn one_row() -> ResultTable {
        ResultTable {
            rows: vec![ResultRow {
                dataset: "grid".into(),
                metric: MetricId::Jl,
                perturbation: PerturbKind::EdgeRewiring,
                median: Some(0.9875),
                iqr: Some(0.0125),
                per_seed: vec![Some(1.0), None, Some(0.975)],
                no_response: false,
            }],
            curves: vec![],
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        emit_results(&ResultTable::default(), dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join(RESULTS_CSV)).unwrap();
        assert_eq!(csv, RESULTS_HEADER.join(",") + "\n");
        let curves = fs::read_to_string(dir.path().join(CURVES_CSV)).unwrap();
        assert_eq!(curves, CURVES_HEADER.join(",") + "\n");
    }

    #[test]
    fn one_row_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let t = one_row();
        emit_results(&t, dir.path()).unwrap();
        let mut rdr = csv::Reader::from_path(dir.path().join(RESULTS_CSV)).unwrap();
        let recs: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r[1].parse::<MetricId>().unwrap(), MetricId::Jl);
        assert_eq!(r[2].parse::<PerturbKind>().unwrap(), PerturbKind::EdgeRewiring);
        assert_eq!(r[3].parse::<f64>().unwrap(), 0.9875);
        assert_eq!(r[5].parse::<usize>().unwrap(), 2);
        assert_eq!(&r[7], "1.0;NA;0.975");

        let json = fs::read_to_string(dir.path().join(RESULTS_JSON)).unwrap();
        let back: ResultTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn table_marks_no_response() {
        let mut t = one_row();
        t.rows[0].no_response = true;
        assert!(render_table(&t).contains("---"));
        t.rows[0].no_response = false;
        assert!(render_table(&t).contains("0.988 ± 0.013") || render_table(&t).contains("0.987 ± 0.013"));
    }
}
