use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ferro_sim::{cmd_inspect, cmd_simulate, cmd_sweep, cmd_verify, load_config, CliError, ExperimentConfig, Outcome};

/// Spectral stochastic-Galerkin ferrofluid simulator.
#[derive(Parser)]
#[command(name = "ferro", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for ensembles (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (default: `output.dir` of the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the ensemble and write trajectories and ledgers.
    Simulate,
    /// Check artifacts against the config and run every enabled audit.
    Verify,
    /// Tabulate brackets and energy-audit pass rates across a lambda grid.
    Sweep,
    /// Print a trajectory file (default: member 0 under `--out`).
    Inspect {
        file: Option<PathBuf>,
    },
}

const EXIT_AUDIT: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| {
        CliError::Config(ferro_sim::ConfigError { violations: vec!["--config PATH is required".into()] })
    })?;
    let mut cfg = load_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
        let v = cfg.violations();
        if !v.is_empty() {
            return Err(CliError::Config(ferro_sim::ConfigError { violations: v }));
        }
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn report(outcome: &Outcome) -> ExitCode {
    if let Some(first) = outcome.artifacts.first() {
        let dir = first.parent().map_or_else(|| ".".into(), |d| d.display().to_string());
        eprintln!("wrote {} file(s) to {dir}", outcome.artifacts.len());
    }
    let failures = outcome.failures();
    println!("audits: {} passed, {} failed", outcome.audits.len() - failures.len(), failures.len());
    for f in &failures {
        println!("FAIL\t{}\t{}", f.name, f.detail);
    }
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_AUDIT)
    }
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Simulate => {
            let cfg = load(cli)?;
            Ok(report(&cmd_simulate(&cfg, &cfg.output.dir, cli.threads)?))
        }
        Command::Verify => {
            let cfg = load(cli)?;
            let outcome = cmd_verify(&cfg, &cfg.output.dir, cli.threads)?;
            for a in &outcome.audits {
                println!("{}\t{}\t{}", if a.pass { "PASS" } else { "FAIL" }, a.name, a.detail);
            }
            Ok(report(&outcome))
        }
        Command::Sweep => {
            let cfg = load(cli)?;
            let (outcome, rows) = cmd_sweep(&cfg, &cfg.output.dir, cli.threads)?;
            println!("lambda\tb_curl_m\tb_div_m\tadmissible\tpass_rate");
            for r in &rows {
                let rate = r.pass_rate.map_or_else(|| "-".to_string(), |p| format!("{p:.3}"));
                println!("{:.6}\t{:+.6e}\t{:+.6e}\t{}\t{}", r.lambda, r.brackets[2], r.brackets[4], r.admissible, rate);
            }
            Ok(report(&outcome))
        }
        Command::Inspect { file } => {
            let cfg = cli.config.as_ref().map(|_| load(cli)).transpose()?;
            let path = match (file, &cfg) {
                (Some(f), _) => f.clone(),
                (None, Some(c)) => c.output.dir.join(format!("{}_0000.bin", c.output.trajectory_prefix)),
                (None, None) => cli.out.clone().unwrap_or_else(|| PathBuf::from("out")).join("trajectory_0000.bin"),
            };
            print!("{}", cmd_inspect(&path, cfg.as_ref())?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
