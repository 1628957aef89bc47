use std::fmt::Write as _;
use std::io::Write;
use std::time::Duration;

use crate::metrics::RoundMetrics;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub load: Duration,
    pub centralized: Duration,
    pub federated: Duration,
}

/// Both arms evaluated on one shared test set.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub test_rows: usize,
    /// Share of the majority class in the test set.
    pub majority_rate: f64,
    pub centralized: RoundMetrics,
    pub centralized_auc: f64,
    pub federated_final: RoundMetrics,
    pub federated_final_auc: f64,
    pub rounds: usize,
    pub peak_round: usize,
    pub peak_accuracy: f64,
    /// `100 * (centralized accuracy - federated peak accuracy)`.
    pub gap_pp: f64,
    pub runtime: PhaseTimings,
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

impl ComparisonReport {
    /// Full-precision `metric,value` table; carries no timing.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "value"])?;
        let mut row = |k: &str, v: String| w.write_record([k, v.as_str()]);
        row("test_rows", self.test_rows.to_string())?;
        row("majority_rate", self.majority_rate.to_string())?;
        for (arm, m) in [
            ("centralized", &self.centralized),
            ("federated_final", &self.federated_final),
        ] {
            row(&format!("{arm}_accuracy"), m.accuracy.to_string())?;
            row(&format!("{arm}_precision"), m.precision.to_string())?;
            row(&format!("{arm}_recall"), m.recall.to_string())?;
            row(&format!("{arm}_f1"), m.f1.to_string())?;
            row(&format!("{arm}_loss"), m.loss.to_string())?;
        }
        row("centralized_auc", self.centralized_auc.to_string())?;
        row("federated_final_auc", self.federated_final_auc.to_string())?;
        row("federated_rounds", self.rounds.to_string())?;
        row("federated_peak_round", self.peak_round.to_string())?;
        row("federated_peak_accuracy", self.peak_accuracy.to_string())?;
        row("gap_pp", self.gap_pp.to_string())?;
        w.flush()?;
        Ok(())
    }

    /// Human-readable summary. The runtime block is the only part that
    /// differs between otherwise identical runs.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let c = &self.centralized;
        let f = &self.federated_final;
        let _ = writeln!(s, "Centralized vs federated comparison ({} test rows)", self.test_rows);
        let _ = writeln!(s, "majority-class rate: {}", pct(self.majority_rate));
        let _ = writeln!(s);
        let _ = writeln!(s, "RQ1  centralized boosted trees");
        let _ = writeln!(
            s,
            "     accuracy {}  precision {}  recall {}  f1 {}  auc {:.4}",
            pct(c.accuracy),
            pct(c.precision),
            pct(c.recall),
            pct(c.f1),
            self.centralized_auc
        );
        let _ = writeln!(s, "RQ2  federated network ({} rounds)", self.rounds);
        let _ = writeln!(
            s,
            "     final accuracy {}  precision {}  recall {}  f1 {}  auc {:.4}",
            pct(f.accuracy),
            pct(f.precision),
            pct(f.recall),
            pct(f.f1),
            self.federated_final_auc
        );
        let _ = writeln!(
            s,
            "     peak accuracy {} in round {}",
            pct(self.peak_accuracy),
            self.peak_round
        );
        let _ = writeln!(s, "RQ3  trade-off");
        let _ = writeln!(
            s,
            "     gap {:.2} percentage points (centralized minus federated peak)",
            self.gap_pp
        );
        let _ = writeln!(s);
        let t = &self.runtime;
        let _ = writeln!(s, "[timing, varies between runs]");
        let _ = writeln!(
            s,
            "     load {:.3}s  centralized {:.3}s  federated {:.3}s",
            t.load.as_secs_f64(),
            t.centralized.as_secs_f64(),
            t.federated.as_secs_f64()
        );
        s
    }
}
