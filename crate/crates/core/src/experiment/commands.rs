use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{DataFormat, ExperimentConfig};
use super::report::{ComparisonReport, PhaseTimings};
use super::{ExperimentError, Result};
use crate::data::{
    generate_synthetic, partition_by_school, preprocess, preprocess_file, stratified_split, Dataset, SplitDataset,
};
use crate::federated::{best_round, predict_dataset, run_federation, write_history_csv, RoundRecord};
use crate::gbdt::{self, BoostConfig, BoostedEnsemble};
use crate::metrics::{evaluate_scores, roc_auc, write_metrics_csv, write_roc_csv, MetricsRow, RocCurve, RoundMetrics};
use crate::nn::store_checkpoint;

const TOP_FEATURES: usize = 15;

/// Processed rows plus the median threshold when the pipeline computed one.
pub fn load_dataset(config: &ExperimentConfig) -> Result<(Dataset, Option<f64>)> {
    let data = &config.data;
    match (&data.path, &data.synthetic) {
        (Some(path), _) => match data.format {
            DataFormat::Raw => {
                let p = preprocess_file(path, data.delimiter_byte()?, &config.pipeline, data.chunk_size)?;
                Ok((p.dataset, Some(p.threshold)))
            }
            DataFormat::Processed => {
                let file = File::open(path).map_err(crate::data::DataError::from)?;
                Ok((Dataset::read_csv(std::io::BufReader::new(file))?, None))
            }
        },
        (None, Some(spec)) => {
            let p = preprocess(&generate_synthetic(spec)?, &config.pipeline)?;
            Ok((p.dataset, Some(p.threshold)))
        }
        (None, None) => Err(ExperimentError::Config("no data source configured".into())),
    }
}

fn out_dir(config: &ExperimentConfig) -> Result<&Path> {
    let dir = config.output.dir.as_path();
    fs::create_dir_all(dir).map_err(ExperimentError::io(dir))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(ExperimentError::io(path))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(ExperimentError::io(path))
}

fn split(config: &ExperimentConfig, data: &Dataset) -> Result<SplitDataset> {
    Ok(stratified_split(data, config.split.test_fraction, config.split.seed)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessSummary {
    pub rows: usize,
    pub width: usize,
    /// `[class 0, class 1]`.
    pub class_counts: [usize; 2],
    pub threshold: Option<f64>,
    pub output: PathBuf,
}

impl fmt::Display for PreprocessSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [neg, pos] = self.class_counts;
        let share = |n: usize| 100.0 * n as f64 / self.rows.max(1) as f64;
        writeln!(f, "rows: {}", self.rows)?;
        writeln!(f, "encoded width: {}", self.width)?;
        writeln!(
            f,
            "class balance: {:.2}% / {:.2}% ({neg} / {pos})",
            share(neg),
            share(pos)
        )?;
        if let Some(t) = self.threshold {
            writeln!(f, "median threshold: {t}")?;
        }
        write!(f, "written: {}", self.output.display())
    }
}

pub fn cmd_preprocess(config: &ExperimentConfig) -> Result<PreprocessSummary> {
    config.validate()?;
    let (data, threshold) = load_dataset(config)?;
    let output = out_dir(config)?.join("processed.csv");
    data.write_csv(create(&output)?)?;
    Ok(PreprocessSummary {
        rows: data.len(),
        width: data.width(),
        class_counts: data.class_counts(),
        threshold,
        output,
    })
}

/// Writes the generated raw table and returns its path.
pub fn cmd_synthesize(config: &ExperimentConfig) -> Result<PathBuf> {
    let spec = config
        .data
        .synthetic
        .as_ref()
        .ok_or_else(|| ExperimentError::Config("synthesize needs a [data.synthetic] section".into()))?;
    let table = generate_synthetic(spec)?;
    let path = out_dir(config)?.join("synthetic.csv");
    table.write_csv(create(&path)?, config.data.delimiter_byte()?)?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct CentralizedOutcome {
    pub model: BoostedEnsemble,
    pub metrics: RoundMetrics,
    pub roc: RocCurve,
    pub importance: Vec<(String, f64)>,
}

pub fn run_centralized(split: &SplitDataset, boost: &BoostConfig) -> Result<CentralizedOutcome> {
    let model = gbdt::fit(&split.train, boost)?;
    let (probs, _) = gbdt::predict(&model, &split.test.features)?;
    let metrics = evaluate_scores(&probs, &split.test.labels)?;
    let roc = roc_auc(&probs, &split.test.labels)?;
    let importance = gbdt::feature_importance(&model);
    Ok(CentralizedOutcome {
        model,
        metrics,
        roc,
        importance,
    })
}

impl CentralizedOutcome {
    fn write(&self, dir: &Path) -> Result<()> {
        let row = MetricsRow {
            round: 0,
            metrics: self.metrics,
            participating_clients: Vec::new(),
        };
        write_metrics_csv(&[row], create(&dir.join("centralized_metrics.csv"))?)?;
        write_roc_csv(&self.roc, create(&dir.join("centralized_roc.csv"))?)?;
        let path = dir.join("feature_importance.csv");
        let mut w = csv::Writer::from_writer(create(&path)?);
        let csv_err = |e: csv::Error| ExperimentError::Metrics(e.into());
        w.write_record(["rank", "feature", "total_gain"]).map_err(csv_err)?;
        for (i, (name, gain)) in self.importance.iter().take(TOP_FEATURES).enumerate() {
            w.write_record([(i + 1).to_string(), name.clone(), gain.to_string()])
                .map_err(csv_err)?;
        }
        w.flush().map_err(ExperimentError::io(&path))?;
        write_text(&dir.join("gbdt_model.txt"), &gbdt::dump_model(&self.model))
    }

    pub fn summary(&self) -> String {
        let m = &self.metrics;
        let mut s = format!(
            "accuracy {:.2}%  precision {:.2}%  recall {:.2}%  f1 {:.2}%  auc {:.4}\n",
            100.0 * m.accuracy,
            100.0 * m.precision,
            100.0 * m.recall,
            100.0 * m.f1,
            self.roc.auc
        );
        s.push_str(&format!("top {TOP_FEATURES} features by total gain:\n"));
        for (i, (name, gain)) in self.importance.iter().take(TOP_FEATURES).enumerate() {
            s.push_str(&format!("{:>3}. {name:<24} {gain:.4}\n", i + 1));
        }
        s
    }
}

pub fn cmd_centralized(config: &ExperimentConfig) -> Result<CentralizedOutcome> {
    config.validate()?;
    let (data, _) = load_dataset(config)?;
    let outcome = run_centralized(&split(config, &data)?, &config.boost)?;
    outcome.write(out_dir(config)?)?;
    Ok(outcome)
}

#[derive(Debug, Clone)]
pub struct FederatedOutcome {
    pub history: Vec<RoundRecord>,
    /// `(school id, n_k)` of every sampled client.
    pub clients: Vec<(i64, usize)>,
    pub peak_round: usize,
    pub peak_accuracy: f64,
    pub final_roc: RocCurve,
}

impl FederatedOutcome {
    pub fn final_metrics(&self) -> &RoundMetrics {
        &self.history.last().expect("non-empty history").metrics
    }

    fn write(&self, dir: &Path, checkpoints: bool) -> Result<()> {
        write_history_csv(&self.history, create(&dir.join("federated_history.csv"))?)?;
        write_roc_csv(&self.final_roc, create(&dir.join("federated_roc.csv"))?)?;

        let path = dir.join("federated_summary.csv");
        let peak = &self.history[self.peak_round - 1];
        let last = self.history.last().expect("non-empty history");
        let rows = [peak, last].map(|r| MetricsRow {
            round: r.round,
            metrics: r.metrics,
            participating_clients: r.participating_clients.clone(),
        });
        write_metrics_csv(&rows, create(&path)?)?;

        let path = dir.join("clients.csv");
        let mut text = String::from("client_id,n_k\n");
        for (id, n) in &self.clients {
            text.push_str(&format!("{id},{n}\n"));
        }
        write_text(&path, &text)?;

        if checkpoints {
            let cdir = dir.join("checkpoints");
            fs::create_dir_all(&cdir).map_err(ExperimentError::io(&cdir))?;
            for r in &self.history {
                let path = cdir.join(format!("round_{:03}.txt", r.round));
                store_checkpoint(&r.global_model, create(&path)?)?;
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let m = self.final_metrics();
        format!(
            "clients: {}  rounds: {}\nfinal accuracy {:.2}%  precision {:.2}%  recall {:.2}%  f1 {:.2}%  auc {:.4}\npeak accuracy {:.2}% in round {}\n",
            self.clients.len(),
            self.history.len(),
            100.0 * m.accuracy,
            100.0 * m.precision,
            100.0 * m.recall,
            100.0 * m.f1,
            self.final_roc.auc,
            100.0 * self.peak_accuracy,
            self.peak_round
        )
    }
}

/// Partitions the training rows by school and runs the federation against
/// the held-out test rows.
pub fn run_federated(split: &SplitDataset, config: &ExperimentConfig) -> Result<FederatedOutcome> {
    let p = &config.partition;
    let clients = partition_by_school(&split.train, p.min_rows, p.sample_size, p.seed)?;
    let history = run_federation(&clients, &split.test, &config.federation)?;
    let (peak_round, peak_accuracy) = best_round(&history)?;
    let last = history.last().expect("num_rounds > 0");
    let scores = predict_dataset(&last.global_model, &split.test.features)?;
    let final_roc = roc_auc(&scores, &split.test.labels)?;
    Ok(FederatedOutcome {
        clients: clients.iter().map(|c| (c.client_id(), c.n_k())).collect(),
        history,
        peak_round,
        peak_accuracy,
        final_roc,
    })
}

pub fn cmd_federated(config: &ExperimentConfig) -> Result<FederatedOutcome> {
    config.validate()?;
    let (data, _) = load_dataset(config)?;
    let outcome = run_federated(&split(config, &data)?, config)?;
    outcome.write(out_dir(config)?, config.output.checkpoints)?;
    Ok(outcome)
}

pub fn cmd_compare(config: &ExperimentConfig) -> Result<ComparisonReport> {
    config.validate()?;
    let t0 = Instant::now();
    let (data, _) = load_dataset(config)?;
    let split = split(config, &data)?;
    let load = t0.elapsed();

    let t1 = Instant::now();
    let central = run_centralized(&split, &config.boost)?;
    let centralized = t1.elapsed();

    let t2 = Instant::now();
    let fed = run_federated(&split, config)?;
    let federated = t2.elapsed();

    let dir = out_dir(config)?;
    central.write(dir)?;
    fed.write(dir, config.output.checkpoints)?;

    let [neg, pos] = split.test.class_counts();
    let report = ComparisonReport {
        test_rows: split.test.len(),
        majority_rate: neg.max(pos) as f64 / split.test.len() as f64,
        centralized: central.metrics,
        centralized_auc: central.roc.auc,
        federated_final: *fed.final_metrics(),
        federated_final_auc: fed.final_roc.auc,
        rounds: fed.history.len(),
        peak_round: fed.peak_round,
        peak_accuracy: fed.peak_accuracy,
        gap_pp: 100.0 * (central.metrics.accuracy - fed.peak_accuracy),
        runtime: PhaseTimings {
            load,
            centralized,
            federated,
        },
    };
    let path = dir.join("comparison.csv");
    report
        .write_csv(create(&path)?)
        .map_err(|e| ExperimentError::Metrics(e.into()))?;
    write_text(&dir.join("report.txt"), &report.render())?;
    Ok(report)
}
