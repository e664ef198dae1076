//! Evaluation reports.
//!
//! Two artifacts per evaluation: a flat CSV (`run,utility,unfairness,mode,
//! group_def`) for plotting, and a JSON report carrying the per-group
//! exposure shares, relevance shares, and deviations behind each summary
//! line. A run whose unfairness is undefined (no group mass) keeps its
//! utility; the CSV says `undefined` and the JSON carries the reason.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::EvalOutcome;
use crate::model::Amortization;

/// One evaluated run, ready for reporting.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub run: String,
    pub outcome: EvalOutcome,
    pub mode: Amortization,
    pub group_def: String,
}

/// Writes the summary CSV (atomic).
pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    crate::io::atomic_write(path, |w| {
        let mut writer = csv::Writer::from_writer(w);
        writer
            .write_record(["run", "utility", "unfairness", "mode", "group_def"])
            .map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        for row in rows {
            let unfairness = match &row.outcome {
                EvalOutcome::Defined(result) => result.unfairness.to_string(),
                EvalOutcome::Undefined { .. } => "undefined".to_string(),
            };
            writer
                .write_record([
                    row.run.as_str(),
                    &row.outcome.mean_utility().to_string(),
                    &unfairness,
                    &row.mode.to_string(),
                    row.group_def.as_str(),
                ])
                .map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    })
}

#[derive(Serialize)]
struct GroupStats {
    exposure_share: f64,
    relevance_share: f64,
    deviation: f64,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    run: &'a str,
    mode: String,
    group_def: &'a str,
    rankings_evaluated: usize,
    mean_utility: f64,
    unfairness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    undefined_reason: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    groups: Option<BTreeMap<&'a str, GroupStats>>,
}

/// Writes the detailed JSON report (atomic, pretty-printed, key order fixed).
pub fn write_report_json(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let json_rows: Vec<JsonRow> = rows
        .iter()
        .map(|row| match &row.outcome {
            EvalOutcome::Defined(result) => JsonRow {
                run: &row.run,
                mode: row.mode.to_string(),
                group_def: &row.group_def,
                rankings_evaluated: result.rankings_evaluated,
                mean_utility: result.mean_utility,
                unfairness: Some(result.unfairness),
                undefined_reason: None,
                groups: Some(
                    result
                        .exposure_share
                        .iter()
                        .map(|(g, exposure)| {
                            (
                                g.as_str(),
                                GroupStats {
                                    exposure_share: *exposure,
                                    relevance_share: result.relevance_share[g],
                                    deviation: result.deviation[g],
                                },
                            )
                        })
                        .collect(),
                ),
            },
            EvalOutcome::Undefined {
                mean_utility,
                rankings_evaluated,
                reason,
            } => JsonRow {
                run: &row.run,
                mode: row.mode.to_string(),
                group_def: &row.group_def,
                rankings_evaluated: *rankings_evaluated,
                mean_utility: *mean_utility,
                unfairness: None,
                undefined_reason: Some(reason),
                groups: None,
            },
        })
        .collect();

    crate::io::atomic_write(path, |w| {
        serde_json::to_writer_pretty(&mut *w, &json_rows)
            .map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        writeln!(w).map_err(|e| Error::io(path, e))?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EvalResult, GroupId};

    fn defined_row() -> ReportRow {
        let g1 = GroupId::new("g1").unwrap();
        let g2 = GroupId::new("g2").unwrap();
        ReportRow {
            run: "baseline".into(),
            outcome: EvalOutcome::Defined(EvalResult {
                exposure_share: BTreeMap::from([(g1.clone(), 0.75), (g2.clone(), 0.25)]),
                relevance_share: BTreeMap::from([(g1.clone(), 0.5), (g2.clone(), 0.5)]),
                deviation: BTreeMap::from([(g1, 0.25), (g2, -0.25)]),
                unfairness: 0.3535533905932738,
                mean_utility: 0.805,
                rankings_evaluated: 10,
            }),
            mode: Amortization::Micro,
            group_def: "hindex".into(),
        }
    }

    #[test]
    fn csv_layout_is_fixed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        let undefined = ReportRow {
            run: "degenerate".into(),
            outcome: EvalOutcome::Undefined {
                mean_utility: 0.5,
                rankings_evaluated: 3,
                reason: "no relevance mass".into(),
            },
            mode: Amortization::Macro,
            group_def: "hindex".into(),
        };
        write_report_csv(&path, &[defined_row(), undefined]).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = content.lines().collect();
        assert_eq!(lines[0], "run,utility,unfairness,mode,group_def");
        assert_eq!(lines[1], "baseline,0.805,0.3535533905932738,micro,hindex");
        assert_eq!(lines[2], "degenerate,0.5,undefined,macro,hindex");
    }

    #[test]
    fn json_report_carries_group_detail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_report_json(&path, &[defined_row()]).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&content).unwrap();
        let row = &parsed[0];
        assert_eq!(row["run"], "baseline");
        assert_eq!(row["groups"]["g1"]["exposure_share"], 0.75);
        assert_eq!(row["groups"]["g2"]["deviation"], -0.25);
        assert_eq!(row["unfairness"], 0.3535533905932738);
        assert!(row.get("undefined_reason").is_none());
        assert!(content.ends_with('\n'));
    }

    #[test]
    fn undefined_json_row_has_reason_and_null_unfairness() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let row = ReportRow {
            run: "x".into(),
            outcome: EvalOutcome::Undefined {
                mean_utility: 0.1,
                rankings_evaluated: 1,
                reason: "no exposure mass".into(),
            },
            mode: Amortization::Micro,
            group_def: "g".into(),
        };
        write_report_json(&path, &[row]).unwrap();
        let parsed: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(parsed[0]["unfairness"].is_null());
        assert_eq!(parsed[0]["undefined_reason"], "no exposure mass");
        assert!(parsed[0].get("groups").is_none());
    }
}
