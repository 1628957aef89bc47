use std::io::Write;

use super::{Result, RocCurve, RoundMetrics};

pub const METRICS_HEADER: [&str; 7] = [
    "round",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "loss",
    "participating_client_ids",
];

/// One evaluation in the round-history layout.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub round: usize,
    pub metrics: RoundMetrics,
    pub participating_clients: Vec<i64>,
}

pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        let ids: Vec<String> = r.participating_clients.iter().map(i64::to_string).collect();
        let m = &r.metrics;
        w.write_record([
            r.round.to_string(),
            m.accuracy.to_string(),
            m.precision.to_string(),
            m.recall.to_string(),
            m.f1.to_string(),
            m.loss.to_string(),
            ids.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `threshold,fpr,tpr` rows followed by a trailing `auc,<value>,` record.
pub fn write_roc_csv<W: Write>(curve: &RocCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "fpr", "tpr"])?;
    for p in &curve.points {
        w.write_record([p.threshold.to_string(), p.fpr.to_string(), p.tpr.to_string()])?;
    }
    w.write_record(["auc".to_string(), curve.auc.to_string(), String::new()])?;
    w.flush()?;
    Ok(())
}
