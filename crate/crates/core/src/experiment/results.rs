//! Result tables: ranking, CSV output, and the scatter format.
//!
//! All writers emit rows in a fixed sort order and print floats with the
//! shortest round-trip representation, so files are byte-identical across
//! runs with the same seed. Wall-clock timings are the one exception and
//! live only in the per-fold file's `seconds` column.

use std::io::{BufRead, Write};

use crate::metrics::EvalMetrics;

use super::{ExperimentError, ExperimentResult};

/// Which metric a ranking is sorted by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMetric {
    R2,
    Rmse,
    MaeStandard,
    MaePaperLiteral,
}

impl RankMetric {
    pub fn parse(name: &str) -> Option<RankMetric> {
        match name.to_ascii_lowercase().as_str() {
            "r2" => Some(RankMetric::R2),
            "rmse" => Some(RankMetric::Rmse),
            "mae" | "mae_standard" => Some(RankMetric::MaeStandard),
            "mae_paper_literal" => Some(RankMetric::MaePaperLiteral),
            _ => None,
        }
    }

    fn value(self, m: &EvalMetrics) -> f64 {
        match self {
            RankMetric::R2 => m.r2,
            RankMetric::Rmse => m.rmse,
            RankMetric::MaeStandard => m.mae_standard,
            RankMetric::MaePaperLiteral => m.mae_paper_literal,
        }
    }

    /// R² ranks descending; the error metrics rank ascending.
    fn descending(self) -> bool {
        matches!(self, RankMetric::R2)
    }
}

/// One aggregated line: a model evaluated at a station.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub entry_id: String,
    pub model_name: String,
    pub station: String,
    pub metrics: EvalMetrics,
}

/// One line of a ranking table.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRow {
    pub order: usize,
    pub model_name: String,
    pub station: String,
    pub r2: f64,
    pub rmse: f64,
    pub mae: f64,
}

/// Sorts rows by the chosen metric (ties broken by ascending RMSE, then
/// entry id) and keeps the first `top_n`.
pub fn rank_results(rows: &[ResultRow], by: RankMetric, top_n: usize) -> Vec<RankedRow> {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        let va = by.value(&a.metrics);
        let vb = by.value(&b.metrics);
        let primary = if by.descending() {
            vb.partial_cmp(&va)
        } else {
            va.partial_cmp(&vb)
        }
        .unwrap_or(std::cmp::Ordering::Equal);
        primary
            .then_with(|| {
                a.metrics.rmse.partial_cmp(&b.metrics.rmse).unwrap_or(std::cmp::Ordering::Equal)
            })
            .then_with(|| a.entry_id.cmp(&b.entry_id))
            .then_with(|| a.station.cmp(&b.station))
    });
    sorted
        .into_iter()
        .take(top_n)
        .enumerate()
        .map(|(i, row)| RankedRow {
            order: i + 1,
            model_name: row.model_name.clone(),
            station: row.station.clone(),
            r2: row.metrics.r2,
            rmse: row.metrics.rmse,
            mae: row.metrics.mae_standard,
        })
        .collect()
}

fn sorted_results(results: &[ExperimentResult]) -> Vec<&ExperimentResult> {
    let mut sorted: Vec<&ExperimentResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.entry_id.cmp(&b.entry_id).then_with(|| a.station.cmp(&b.station)));
    sorted
}

/// Per-fold results: `entry_id,station,fold,r2,rmse,mae_standard,mae_paper_literal,seconds`.
pub fn write_per_fold_csv<W: Write>(
    mut w: W,
    results: &[ExperimentResult],
) -> Result<(), ExperimentError> {
    writeln!(w, "entry_id,station,fold,r2,rmse,mae_standard,mae_paper_literal,seconds")?;
    for result in sorted_results(results) {
        for fold in &result.folds {
            match &fold.metrics {
                Some(m) => writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    result.entry_id,
                    result.station,
                    fold.fold,
                    m.r2,
                    m.rmse,
                    m.mae_standard,
                    m.mae_paper_literal,
                    fold.seconds
                )?,
                None => writeln!(
                    w,
                    "{},{},{},,,,,{}",
                    result.entry_id, result.station, fold.fold, fold.seconds
                )?,
            }
        }
    }
    Ok(())
}

/// Aggregated means: `entry_id,model,station,r2,rmse,mae_standard,mae_paper_literal`.
/// Timing is deliberately left out so the file is deterministic.
pub fn write_aggregate_csv<W: Write>(
    mut w: W,
    results: &[ExperimentResult],
) -> Result<(), ExperimentError> {
    writeln!(w, "entry_id,model,station,r2,rmse,mae_standard,mae_paper_literal")?;
    for result in sorted_results(results) {
        if let Some(m) = &result.mean {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                result.entry_id,
                result.model_name,
                result.station,
                m.r2,
                m.rmse,
                m.mae_standard,
                m.mae_paper_literal
            )?;
        }
    }
    Ok(())
}

/// Fold-level failures, one row each: `entry_id,station,fold,error`.
pub fn write_errors_csv<W: Write>(
    mut w: W,
    results: &[ExperimentResult],
) -> Result<(), ExperimentError> {
    writeln!(w, "entry_id,station,fold,error")?;
    for result in sorted_results(results) {
        for fold in &result.folds {
            if let Some(err) = &fold.error {
                writeln!(
                    w,
                    "{},{},{},{}",
                    result.entry_id,
                    result.station,
                    fold.fold,
                    err.replace(',', ";").replace('\n', " ")
                )?;
            }
        }
    }
    Ok(())
}

/// Held-out predictions: `station,model,fold,observed_et0,predicted_et0`.
pub fn write_predictions_csv<W: Write>(
    mut w: W,
    results: &[ExperimentResult],
) -> Result<(), ExperimentError> {
    writeln!(w, "station,model,fold,observed_et0,predicted_et0")?;
    for result in sorted_results(results) {
        for p in &result.predictions {
            writeln!(
                w,
                "{},{},{},{},{}",
                result.station, result.entry_id, p.fold, p.observed, p.predicted
            )?;
        }
    }
    Ok(())
}

/// Reads an aggregate CSV back into rows (for the report command).
pub fn read_aggregate_csv<R: BufRead>(reader: R) -> Result<Vec<ResultRow>, ExperimentError> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "entry_id,model,station,r2,rmse,mae_standard,mae_paper_literal" {
                return Err(ExperimentError::BadResultsFile(format!(
                    "unexpected header: {line}"
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 7 {
            return Err(ExperimentError::BadResultsFile(format!(
                "line {}: expected 7 fields, got {}",
                i + 1,
                parts.len()
            )));
        }
        let num = |s: &str| -> Result<f64, ExperimentError> {
            s.parse::<f64>()
                .map_err(|_| ExperimentError::BadResultsFile(format!("line {}: bad number {s}", i + 1)))
        };
        rows.push(ResultRow {
            entry_id: parts[0].to_string(),
            model_name: parts[1].to_string(),
            station: parts[2].to_string(),
            metrics: EvalMetrics {
                r2: num(parts[3])?,
                rmse: num(parts[4])?,
                mae_standard: num(parts[5])?,
                mae_paper_literal: num(parts[6])?,
            },
        });
    }
    Ok(rows)
}

/// Writes the ranking table: `order,model_name,station_name,r2,rmse,mae`.
pub fn write_report_csv<W: Write>(mut w: W, rows: &[RankedRow]) -> Result<(), ExperimentError> {
    writeln!(w, "order,model_name,station_name,r2,rmse,mae")?;
    for row in rows {
        writeln!(
            w,
            "{:02},{},{},{},{},{}",
            row.order, row.model_name, row.station, row.r2, row.rmse, row.mae
        )?;
    }
    Ok(())
}

/// Scatter rows for plotting predicted vs observed with a 1:1 line:
/// tab-separated `station model observed_et0 predicted_et0`.
pub fn write_scatter_tsv<W: Write>(
    mut w: W,
    predictions: &[(String, String, f64, f64)],
) -> Result<(), ExperimentError> {
    writeln!(w, "station\tmodel\tobserved_et0\tpredicted_et0")?;
    for (station, model, observed, predicted) in predictions {
        writeln!(w, "{station}\t{model}\t{observed}\t{predicted}")?;
    }
    Ok(())
}

/// Reads a predictions CSV into scatter tuples, optionally filtered.
pub fn read_predictions_csv<R: BufRead>(
    reader: R,
    station_filter: Option<&str>,
    model_filter: Option<&str>,
) -> Result<Vec<(String, String, f64, f64)>, ExperimentError> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "station,model,fold,observed_et0,predicted_et0" {
                return Err(ExperimentError::BadResultsFile(format!(
                    "unexpected predictions header: {line}"
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(ExperimentError::BadResultsFile(format!(
                "line {}: expected 5 fields, got {}",
                i + 1,
                parts.len()
            )));
        }
        if let Some(filter) = station_filter {
            if parts[0] != filter {
                continue;
            }
        }
        if let Some(filter) = model_filter {
            if parts[1] != filter {
                continue;
            }
        }
        let observed = parts[3].parse::<f64>().map_err(|_| {
            ExperimentError::BadResultsFile(format!("line {}: bad observed value", i + 1))
        })?;
        let predicted = parts[4].parse::<f64>().map_err(|_| {
            ExperimentError::BadResultsFile(format!("line {}: bad predicted value", i + 1))
        })?;
        rows.push((parts[0].to_string(), parts[1].to_string(), observed, predicted));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, station: &str, r2: f64, rmse: f64) -> ResultRow {
        ResultRow {
            entry_id: id.to_string(),
            model_name: id.to_string(),
            station: station.to_string(),
            metrics: EvalMetrics { rmse, mae_standard: rmse * 0.8, mae_paper_literal: 0.01, r2 },
        }
    }

    #[test]
    fn ranking_descends_by_r2() {
        let rows = vec![row("a", "s", 0.98, 0.3), row("b", "s", 0.99, 0.3)];
        let ranked = rank_results(&rows, RankMetric::R2, 10);
        assert_eq!(ranked[0].model_name, "b");
        assert_eq!(ranked[0].order, 1);
        assert_eq!(ranked[1].model_name, "a");
    }

    #[test]
    fn ranking_tie_break_by_rmse_then_id() {
        let rows = vec![
            row("b", "s", 0.99, 0.22),
            row("a", "s", 0.99, 0.20),
            row("c", "s", 0.99, 0.20),
        ];
        let ranked = rank_results(&rows, RankMetric::R2, 10);
        assert_eq!(ranked[0].model_name, "a"); // rmse 0.20, id a < c
        assert_eq!(ranked[1].model_name, "c");
        assert_eq!(ranked[2].model_name, "b");
    }

    #[test]
    fn ranking_by_rmse_ascends_and_truncates() {
        let rows = vec![row("a", "s", 0.9, 0.5), row("b", "s", 0.8, 0.1), row("c", "s", 0.7, 0.3)];
        let ranked = rank_results(&rows, RankMetric::Rmse, 2);
        assert_eq!(ranked.len(), 2);
        assert_eq!(ranked[0].model_name, "b");
        assert_eq!(ranked[1].model_name, "c");
    }

    #[test]
    fn report_csv_shape() {
        let rows = vec![row("P-DNN-SeLU-d0-0-0", "Aksaray", 0.9934, 0.2073)];
        let ranked = rank_results(&rows, RankMetric::R2, 20);
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &ranked).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "order,model_name,station_name,r2,rmse,mae");
        let first = lines.next().unwrap();
        assert!(first.starts_with("01,P-DNN-SeLU-d0-0-0,Aksaray,0.9934,0.2073,"));
    }

    #[test]
    fn perfect_oracle_scatter_sits_on_identity_line() {
        // Predictions equal to observations produce identical columns.
        let rows: Vec<(String, String, f64, f64)> = (0..20)
            .map(|i| {
                let v = 0.3 + 0.5 * i as f64;
                ("Aksaray".to_string(), "oracle".to_string(), v, v)
            })
            .collect();
        let mut buf = Vec::new();
        write_scatter_tsv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines().skip(1) {
            let parts: Vec<&str> = line.split('\t').collect();
            assert_eq!(parts[2], parts[3], "row off the 1:1 line: {line}");
        }
        assert_eq!(text.lines().count(), 21);
    }

    #[test]
    fn predictions_csv_filters() {
        let results = vec![ExperimentResult {
            entry_id: "m1".into(),
            model_name: "m1".into(),
            station: "Adana".into(),
            folds: vec![],
            mean: None,
            seconds: 0.0,
            predictions: vec![
                crate::experiment::PredictionRow { fold: 0, observed: 1.0, predicted: 1.5 },
                crate::experiment::PredictionRow { fold: 1, observed: 2.0, predicted: 2.5 },
            ],
        }];
        let mut buf = Vec::new();
        write_predictions_csv(&mut buf, &results).unwrap();
        let all = read_predictions_csv(std::io::BufReader::new(buf.as_slice()), None, None).unwrap();
        assert_eq!(all.len(), 2);
        let filtered =
            read_predictions_csv(std::io::BufReader::new(buf.as_slice()), Some("Nigde"), None)
                .unwrap();
        assert!(filtered.is_empty());
        let by_model =
            read_predictions_csv(std::io::BufReader::new(buf.as_slice()), None, Some("m1"))
                .unwrap();
        assert_eq!(by_model.len(), 2);
        assert_eq!(by_model[0].2, 1.0);
        assert_eq!(by_model[0].3, 1.5);
    }

    #[test]
    fn aggregate_round_trip() {
        let rows = vec![row("m1", "Adana", 0.99, 0.2), row("m2", "Nigde", 0.98, 0.25)];
        let results: Vec<ExperimentResult> = rows
            .iter()
            .map(|r| ExperimentResult {
                entry_id: r.entry_id.clone(),
                model_name: r.model_name.clone(),
                station: r.station.clone(),
                folds: vec![],
                mean: Some(r.metrics),
                seconds: 1.0,
                predictions: vec![],
            })
            .collect();
        let mut buf = Vec::new();
        write_aggregate_csv(&mut buf, &results).unwrap();
        let back = read_aggregate_csv(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(back, rows);
    }
}
