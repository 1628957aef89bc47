use std::io::Write;

use super::{Result, RoundRecord};
use crate::metrics::{write_metrics_csv, MetricsRow};

pub fn history_rows(history: &[RoundRecord]) -> Vec<MetricsRow> {
    history
        .iter()
        .map(|r| MetricsRow {
            round: r.round,
            metrics: r.metrics,
            participating_clients: r.participating_clients.clone(),
        })
        .collect()
}

/// `round,accuracy,precision,recall,f1,loss,participating_client_ids`.
pub fn write_history_csv<W: Write>(history: &[RoundRecord], out: W) -> Result<()> {
    Ok(write_metrics_csv(&history_rows(history), out)?)
}
