use super::run::method_energy;
use super::{Method, PipelineError, ScanRow, Stage, StatsOutput};
use crate::cc::{EnergyReport, TraceRow};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

fn io_err(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::new(Stage::Output, "io", format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

/// Writes `report.json` and, when traces are given, `cc_trace.csv` with one
/// block per CC solve. Returns the written paths.
pub fn write_report(
    out: &Path,
    report: &EnergyReport,
    traces: &[(&str, &[TraceRow])],
) -> Result<Vec<PathBuf>, PipelineError> {
    let report_path = out.join("report.json");
    write_json(&report_path, report)?;
    let mut written = vec![report_path];
    if !traces.is_empty() {
        let path = out.join("cc_trace.csv");
        let mut w = csv_writer(&path)?;
        w.write_record(["solve", "iteration", "energy", "amplitude_rms"])
            .map_err(|e| io_err(&path, e))?;
        for (solve, rows) in traces {
            for row in rows.iter() {
                w.write_record([
                    solve.to_string(),
                    row.iteration.to_string(),
                    row.energy.to_string(),
                    row.amplitude_rms.to_string(),
                ])
                .map_err(|e| io_err(&path, e))?;
            }
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_report(path: &Path) -> Result<EnergyReport, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| PipelineError::new(Stage::Output, "parse", format!("{}: {e}", path.display())))
}

/// Machine-readable record of a fatal failure, written as `error.json`.
pub fn write_error(out: &Path, err: &PipelineError) -> Result<PathBuf, PipelineError> {
    let path = out.join("error.json");
    write_json(&path, err)?;
    Ok(path)
}

fn row_status(row: &ScanRow) -> String {
    match (&row.report, &row.error) {
        (_, Some(e)) => e.kind.clone(),
        (Some(r), None) if r.converged == Some(false) => "not_converged".into(),
        _ => "ok".into(),
    }
}

/// Writes `scan.csv` (point, status and one column per requested method)
/// and `scan.json` with the full rows.
pub fn write_scan(out: &Path, rows: &[ScanRow], methods: &BTreeSet<Method>) -> Result<Vec<PathBuf>, PipelineError> {
    let csv_path = out.join("scan.csv");
    let mut w = csv_writer(&csv_path)?;
    let mut header = vec!["point".to_string(), "status".to_string()];
    header.extend(methods.iter().map(|m| m.name().to_string()));
    w.write_record(&header).map_err(|e| io_err(&csv_path, e))?;
    for row in rows {
        let mut rec = vec![row.point.clone(), row_status(row)];
        rec.extend(methods.iter().map(|&m| {
            row.report
                .as_ref()
                .and_then(|r| method_energy(r, m))
                .map(|e| e.to_string())
                .unwrap_or_default()
        }));
        w.write_record(&rec).map_err(|e| io_err(&csv_path, e))?;
    }
    w.flush().map_err(|e| io_err(&csv_path, e))?;
    let json_path = out.join("scan.json");
    write_json(&json_path, &rows)?;
    Ok(vec![csv_path, json_path])
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    e_active_qc: f64,
    summaries: &'a [super::StatSummary],
}

/// Writes `stats_raw.csv` (one row per repetition) and `stats_summary.json`.
pub fn write_stats(out: &Path, stats: &StatsOutput) -> Result<Vec<PathBuf>, PipelineError> {
    let raw_path = out.join("stats_raw.csv");
    let mut w = csv_writer(&raw_path)?;
    for r in &stats.raw {
        w.serialize(r).map_err(|e| io_err(&raw_path, e))?;
    }
    w.flush().map_err(|e| io_err(&raw_path, e))?;
    let summary_path = out.join("stats_summary.json");
    write_json(
        &summary_path,
        &SummaryFile {
            e_active_qc: stats.e_active_qc,
            summaries: &stats.summaries,
        },
    )?;
    Ok(vec![raw_path, summary_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let report = EnergyReport {
            e_hf: Some(-1.1167593073964253),
            e_tcc: Some(-1.137),
            converged: Some(true),
            ..Default::default()
        };
        let trace = [TraceRow {
            iteration: 1,
            energy: -1.1,
            amplitude_rms: 0.01,
        }];
        let paths = write_report(dir.path(), &report, &[("tcc", &trace)]).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(read_report(&paths[0]).unwrap(), report);
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert!(!text.contains("e_ccsd"));
        let csv = fs::read_to_string(&paths[1]).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "solve,iteration,energy,amplitude_rms");
    }

    #[test]
    fn scan_csv_has_only_requested_columns() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            ScanRow {
                point: "a".into(),
                path: "a.fcidump".into(),
                report: Some(EnergyReport {
                    e_hf: Some(-1.0),
                    e_ccsd: Some(-1.5),
                    ..Default::default()
                }),
                error: None,
            },
            ScanRow {
                point: "b".into(),
                path: "b.fcidump".into(),
                report: None,
                error: Some(PipelineError::new(
                    Stage::Tailor,
                    "tailoring_undefined",
                    "c0 small".into(),
                )),
            },
        ];
        let methods = [Method::Hf, Method::Ccsd].into();
        let paths = write_scan(dir.path(), &rows, &methods).unwrap();
        let csv = fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(csv, "point,status,hf,ccsd\na,ok,-1,-1.5\nb,tailoring_undefined,,\n");
    }
}
