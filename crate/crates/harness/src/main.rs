use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qocsvm_harness::commands::{self, Manifest};
use qocsvm_harness::config::{keys_help, ModelKind};
use qocsvm_harness::{ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "qocsvm", version, about = "Quantum-kernel one-class SVM experiments")]
#[command(after_help = keys_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tomography shots per sample.
    #[arg(long, global = true)]
    shots: Option<usize>,
    /// exact | estimated
    #[arg(long, global = true)]
    rdm_mode: Option<String>,
    /// cx | ecr | rxx | rbf | all (repeatable).
    #[arg(long, global = true)]
    variant: Vec<String>,
    /// Fit fraud rates on every record instead of training records only.
    #[arg(long, global = true)]
    rates_on_full: bool,
}

#[derive(Subcommand)]
enum Command {
    /// F1 per variant over the anomaly-ratio grid.
    Benchmark,
    /// k-fold F1 statistics and outperformance probabilities.
    Crossval,
    /// Mean k-fold F1 over the (gamma, nu) grid.
    Gridsearch,
    /// Tomography precision sweep.
    Tomography,
    /// Engineered features of the configured data.
    Engineer,
    /// Writes the synthetic data set as raw transactions.
    Synth,
}

fn resolve(common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = commands::load_config(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(shots) = common.shots {
        cfg.set("shots", &shots.to_string())?;
    }
    if let Some(mode) = &common.rdm_mode {
        cfg.set("rdm_mode", mode)?;
    }
    if !common.variant.is_empty() {
        cfg.set("variants", &common.variant.join(","))?;
    }
    if common.rates_on_full {
        cfg.rates_on_full = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(m: &Manifest) -> usize {
    for c in m.cells.iter().filter(|c| !c.ok) {
        log::error!(
            "{} r={:?} fold={:?}: {}",
            c.variant,
            c.r,
            c.fold,
            c.error.as_deref().unwrap_or("")
        );
    }
    for o in &m.outputs {
        println!("wrote {}", o.file);
    }
    m.failures()
}

fn run(cli: &Cli) -> Result<usize, HarnessError> {
    let cfg = resolve(&cli.common)?;
    log::info!("config hash {}", cfg.hash());
    let failures = match cli.command {
        Command::Benchmark => report(&commands::benchmark(&cfg)?),
        Command::Crossval => {
            let (m, rows) = commands::crossval(&cfg)?;
            for r in rows {
                let pr = r.pr_over_rbf.map_or("none".into(), |p| format!("{p:.3}"));
                println!("{:<10} mu={:.3} sigma={:.3} pr={pr}", r.variant, r.mu, r.sigma);
            }
            report(&m)
        }
        Command::Gridsearch => {
            let (m, best) = commands::gridsearch(&cfg)?;
            for b in best {
                println!("{:<10} gamma={:?} nu={:?} f1={:.3}", b.variant, b.gamma, b.nu, b.mean_f1);
            }
            report(&m)
        }
        Command::Tomography => {
            let (m, sweeps) = commands::tomography(&cfg)?;
            for s in sweeps {
                println!("{:<5} {:<9} slope={:.3}", s.state, s.mode, s.slope);
            }
            report(&m)
        }
        Command::Engineer => report(&commands::engineer(&cfg)?),
        Command::Synth => report(&commands::synth(&cfg)?),
    };
    Ok(failures)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    // Unused variants are accepted by the parser; reject typos early.
    for v in &cli.common.variant {
        if v != "all" && v.parse::<ModelKind>().is_err() {
            eprintln!("error: unknown variant `{v}`");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            log::error!("{n} cell(s) failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::FAILURE
        }
    }
}
