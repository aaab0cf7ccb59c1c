use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ris_qlearn::exec::Execution;
use ris_qlearn::expcli::{self, ExperimentConfig};
use ris_qlearn::Result;

#[derive(Parser)]
#[command(
    name = "risq",
    version,
    about = "CSI-free adaptive RIS beam training experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Confidence threshold (train: restricts the sweep to this value).
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated: exhaustive,hierarchical,random,qlearning
    #[arg(long, global = true)]
    methods: Option<String>,
    /// Largest pilot budget evaluated.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Dataset size, for sensitivity sweeps.
    #[arg(long, global = true)]
    n_dataset: Option<usize>,
    /// Override any config key, e.g. `--set max_epoch=50`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the training dataset.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Learn Q-tables from a dataset, one per tau.
    Train {
        dataset: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare acquisition methods on fresh channels.
    Eval {
        dataset: PathBuf,
        qtable: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Render eval or training-curve CSVs as SVG.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// SVG path (default: first CSV with .svg extension).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("snr_db", self.snr_db.map(|v| v.to_string())),
            ("tau", self.tau.map(|v| v.to_string())),
            ("methods", self.methods.clone()),
            ("budget", self.budget.map(|v| v.to_string())),
            ("n_dataset", self.n_dataset.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                ris_qlearn::Error::InvalidParameter(format!("`--set {kv}`: expected KEY=VALUE"))
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { common } => {
            let cfg = common.config()?;
            let r = expcli::cmd_generate(&cfg, common.exec())?;
            println!("wrote {} and {}", r.dataset.display(), r.codebook.display());
            for (c, n) in r.class_counts.iter().enumerate() {
                println!("class {:>2}: {n}", c + 1);
            }
        }
        Command::Train { dataset, common } => {
            let mut cfg = common.config()?;
            if let Some(tau) = common.tau {
                cfg.tau_sweep = vec![tau];
            }
            for r in expcli::cmd_train(&cfg, &dataset, common.exec())? {
                let smooth = r.curve.smoothed_length(10);
                println!(
                    "tau {}: mean length {:.3} -> {:.3} (10-epoch mean), wrote {}",
                    expcli::tau_tag(r.tau),
                    r.curve.mean_length.first().copied().unwrap_or(f64::NAN),
                    smooth.last().copied().unwrap_or(f64::NAN),
                    r.qtable.display()
                );
            }
        }
        Command::Eval {
            dataset,
            qtable,
            common,
        } => {
            let cfg = common.config()?;
            let r = expcli::cmd_eval(&cfg, &dataset, qtable.as_deref(), common.exec())?;
            print!("{:>13}", "k");
            for k in 1..=cfg.budget() {
                print!(" {k:>6}");
            }
            println!();
            for m in &cfg.methods {
                print!("{:>13}", m.name());
                for k in 1..=cfg.budget() {
                    print!(
                        " {:>6.3}",
                        r.table.get(*m, k).map_or(f64::NAN, |row| row.mean_rho)
                    );
                }
                println!();
            }
            println!("wrote {} and {}", r.csv.display(), r.svg.display());
        }
        Command::Plot { csv, svg } => {
            let path = expcli::cmd_plot(&csv, svg.as_deref().map(Path::new))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(expcli::exit_code(&e))
        }
    }
}
