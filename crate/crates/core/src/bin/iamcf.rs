use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use iamcf::acceptance::{self, Runs};
use iamcf::config::ExperimentConfig;
use iamcf::{report, run, Error};

#[derive(Parser)]
#[command(name = "iamcf", version, about = "Weak inverse anisotropic mean curvature flow via p-capacitary potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `rng_seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Identity checks, C1 estimate and the Wulff shape of the configured norm.
    NormInfo,
    /// Single-p capacitary solve with a field checkpoint.
    Solve,
    /// p-continuation, level-set diagnostics and the asymptotic constant.
    Flow,
    /// Interior gradient estimate sweeps on Wulff balls.
    Estimates,
    /// Runs the acceptance suite.
    Verify,
}

enum Failure {
    Error(Error),
    Acceptance(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config is required for this command".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> Result<PathBuf, Error> {
    let dir = cli.out.clone().or_else(|| cfg.and_then(|c| c.output_dir.clone())).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn say(cli: &Cli, text: impl AsRef<str>) {
    if !cli.quiet {
        println!("{}", text.as_ref());
    }
}

fn list(cli: &Cli, files: &[PathBuf]) {
    for f in files {
        say(cli, format!("wrote {}", f.display()));
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    match cli.command {
        Command::NormInfo => {
            let cfg = load(cli)?;
            let dir = out_dir(cli, Some(&cfg))?;
            let info = run::norm_info(&cfg)?;
            say(cli, format!("{}: identities max violation {:.3e}, C1 {:.6}, |dW|_F {:.6}", info.norm, info.identities.max_violation, info.c1, info.wulff_perimeter));
            list(cli, &report::write_norm_info(&dir, &cfg, &info)?);
        }
        Command::Solve => {
            let cfg = load(cli)?;
            let dir = out_dir(cli, Some(&cfg))?;
            let o = run::solve(&cfg)?;
            say(cli, format!("p = {}: {} iterations, energy {:.9e}", o.summary.p, o.summary.iterations, o.summary.energy));
            list(cli, &report::write_solve(&dir, &cfg, &o)?);
        }
        Command::Flow => {
            let cfg = load(cli)?;
            let dir = out_dir(cli, Some(&cfg))?;
            let o = run::flow(&cfg)?;
            let a = &o.summary.asymptotics;
            say(cli, format!("gamma {:.5} (theory {:.5}, error {:.2e}), perimeter slope {:.4}", a.gamma_estimate, a.gamma_theory, a.gamma_error, a.perimeter_fit.slope));
            list(cli, &report::write_flow(&dir, &cfg, &o)?);
        }
        Command::Estimates => {
            let cfg = load(cli)?;
            let dir = out_dir(cli, Some(&cfg))?;
            let tables = run::estimates(&cfg)?;
            for t in &tables {
                say(cli, format!("{} {}: ratio {:.4}", t.norm, serde_json::to_string(&t.profile).unwrap_or_default(), t.ratio));
            }
            list(cli, &report::write_estimates(&dir, &cfg, &tables)?);
        }
        Command::Verify => {
            let dir = out_dir(cli, None)?;
            let runs = Runs::new();
            let results = acceptance::run_all(&runs);
            for c in &results {
                say(cli, c.line());
            }
            // Timings vary between runs and stay out of the file.
            let stable: Vec<_> = results
                .iter()
                .map(|c| {
                    let metrics: std::collections::BTreeMap<_, _> = c.metrics.iter().filter(|(k, _)| k.as_str() != "seconds").collect();
                    json!({ "id": c.id, "name": c.name, "passed": c.passed, "metrics": metrics })
                })
                .collect();
            let path = dir.join("report.json");
            report::write_json(&path, &json!({ "command": "verify", "criteria": stable }))?;
            list(cli, &[path]);
            let failed = results.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(Failure::Acceptance(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "Usage", "message": e.to_string().trim_end(), "exit_code": 2 }));
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Acceptance(n)) => {
            eprintln!("{}", json!({ "error": "AcceptanceFailure", "message": format!("{n} criteria failed"), "exit_code": 4 }));
            ExitCode::from(4)
        }
        Err(Failure::Error(e)) => {
            let code = match e {
                Error::Config(_) => 2,
                _ => 3,
            };
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code }));
            ExitCode::from(code)
        }
    }
}
