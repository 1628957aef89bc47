use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edufl_core::experiment::{
    cmd_centralized, cmd_compare, cmd_federated, cmd_preprocess, cmd_synthesize, ExperimentConfig, Overrides,
};
use edufl_core::ExperimentError;

/// Centralized vs federated student-performance experiments.
#[derive(Parser, Debug)]
#[command(name = "edufl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clean, binarize and one-hot encode the input into processed.csv.
    Preprocess(Common),
    /// Train and evaluate the boosted-tree benchmark.
    Centralized(Common),
    /// Run the federated simulation and write the round history.
    Federated(Common),
    /// Run both arms on one split and write the comparison report.
    Compare(Common),
    /// Write a synthetic raw table in the external schema.
    Synthesize(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML experiment config; defaults describe the desk-scale synthetic run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Federated rounds.
    #[arg(long)]
    rounds: Option<usize>,
    /// Proximal coefficient.
    #[arg(long)]
    mu: Option<f64>,
    /// Number of schools sampled as clients.
    #[arg(long)]
    clients: Option<usize>,
    /// Minimum rows for a school to be eligible.
    #[arg(long)]
    min_rows: Option<usize>,
    /// Plain federated averaging without the proximal term.
    #[arg(long)]
    fedavg: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, ExperimentError> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => ExperimentConfig::default(),
        };
        config.apply(&Overrides {
            out: self.out.clone(),
            seed: self.seed,
            rounds: self.rounds,
            mu: self.mu,
            clients: self.clients,
            min_rows: self.min_rows,
            fedavg: self.fedavg,
        });
        config.validate()?;
        Ok(config)
    }
}

fn run(command: &Command) -> Result<(), ExperimentError> {
    match command {
        Command::Preprocess(c) => println!("{}", cmd_preprocess(&c.load()?)?),
        Command::Centralized(c) => print!("{}", cmd_centralized(&c.load()?)?.summary()),
        Command::Federated(c) => print!("{}", cmd_federated(&c.load()?)?.summary()),
        Command::Compare(c) => print!("{}", cmd_compare(&c.load()?)?.render()),
        Command::Synthesize(c) => println!("written: {}", cmd_synthesize(&c.load()?)?.display()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
