use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaptive_guidance::harness::{self, HarnessError, PolicyKind, RunConfig, RunFile};
use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "guidance", version, about = "Train, evaluate and compare descent guidance policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a policy with PPO, writing checkpoints and the learning curve.
    Train(Flags),
    /// Run Monte Carlo evaluation of a trained policy or DR/DV.
    Evaluate(Flags),
    /// Tabulate stored evaluations of several policies on one scenario.
    Compare(Flags),
    /// Range-error statistics of the radar altimeter over terrain.
    CharacterizeAltimeter(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// TOML run file; flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "KEY")]
    scenario: Option<String>,
    /// drdv, mlp, rnn (with --unroll) or rnnT; `compare` takes a comma list.
    #[arg(long, value_name = "KEY")]
    policy: Option<String>,
    #[arg(long, value_name = "T")]
    unroll: Option<usize>,
    /// Evaluation episodes (samples per elevation for the altimeter).
    #[arg(long, value_name = "N")]
    episodes: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl Flags {
    fn run_file(&self) -> Result<RunFile, HarnessError> {
        let mut f = match &self.config {
            Some(p) => RunFile::load(p)?,
            None => RunFile::default(),
        };
        if self.seed.is_some() {
            f.seed = self.seed;
        }
        if self.scenario.is_some() {
            f.scenario = self.scenario.clone();
        }
        if self.policy.is_some() {
            f.policy = self.policy.clone();
        }
        if self.unroll.is_some() {
            f.unroll = self.unroll;
        }
        if self.episodes.is_some() {
            f.episodes = self.episodes;
        }
        if self.out.is_some() {
            f.out = self.out.clone();
        }
        Ok(f)
    }

    fn run_config(&self) -> Result<RunConfig, HarnessError> {
        RunConfig::from_file(self.run_file()?)
    }
}

fn train(flags: &Flags) -> anyhow::Result<()> {
    let cfg = flags.run_config()?;
    let report = harness::train(&cfg)?;
    let last = report.curve.last();
    println!(
        "{}",
        json!({
            "verb": "train",
            "scenario": cfg.scenario,
            "policy": cfg.policy.key(),
            "updates": report.curve.len(),
            "checkpoint": harness::run_dir(&cfg).join(harness::CHECKPOINT_FILE),
            "final_success_rate": last.map(|s| s.success_rate),
            "final_position_mean": last.map(|s| s.terminal_position.mean),
            "final_velocity_mean": last.map(|s| s.terminal_velocity.mean),
        })
    );
    Ok(())
}

fn evaluate(flags: &Flags) -> anyhow::Result<()> {
    let cfg = flags.run_config()?;
    let report = harness::evaluate(&cfg)?;
    let t = &report.table;
    println!(
        "{}",
        json!({
            "verb": "evaluate",
            "scenario": cfg.scenario,
            "policy": cfg.policy.key(),
            "episodes": t.episodes,
            "success_rate": t.success_rate(),
            "position_mean": t.position.mean,
            "position_max": t.position.max,
            "velocity_mean": t.velocity.mean,
            "velocity_max": t.velocity.max,
            "glideslope_min": t.glideslope.min,
            "fuel_mean": t.fuel.mean,
            "eval_csv": harness::run_dir(&cfg).join(harness::EVAL_FILE),
        })
    );
    Ok(())
}

/// Policies with stored evaluations under `out/<scenario>/`.
fn stored_policies(base: &Path) -> anyhow::Result<Vec<PolicyKind>> {
    let entries = std::fs::read_dir(base).with_context(|| format!("reading {}", base.display()))?;
    let mut found = Vec::new();
    for e in entries {
        let e = e?;
        if e.path().join(harness::EVAL_FILE).is_file() {
            if let Ok(p) = PolicyKind::parse(&e.file_name().to_string_lossy(), None) {
                found.push(p);
            }
        }
    }
    Ok(found)
}

fn compare(flags: &Flags) -> anyhow::Result<()> {
    let mut file = flags.run_file()?;
    let list = file.policy.take();
    let cfg = RunConfig::from_file(file)?;
    let policies = match list {
        Some(l) => l
            .split(',')
            .map(|k| PolicyKind::parse(k, flags.unroll))
            .collect::<Result<Vec<_>, _>>()?,
        None => stored_policies(&cfg.out_dir.join(&cfg.scenario))?,
    };
    if policies.is_empty() {
        return Err(HarnessError::Config(format!("no evaluations stored for `{}`", cfg.scenario)).into());
    }
    let report = harness::compare(&cfg.out_dir, &cfg.scenario, &policies)?;
    print!("{}", report.render());
    Ok(())
}

fn characterize(flags: &Flags) -> anyhow::Result<()> {
    let mut file = flags.run_file()?;
    file.scenario.get_or_insert_with(|| "mars-altimeter".into());
    let cfg = RunConfig::from_file(file)?;
    for r in harness::characterize_altimeter(&cfg)? {
        println!(
            "{}",
            json!({
                "elevation_m": r.elevation,
                "mean_abs_error_m": r.mean_abs_error,
                "std_abs_error_m": r.std_abs_error,
                "max_abs_error_m": r.max_abs_error,
                "miss_percent": r.miss_percent,
                "samples": r.samples,
            })
        );
    }
    Ok(())
}

fn error_line(err: &anyhow::Error) -> String {
    let kind = err.downcast_ref::<HarnessError>().map_or("error", HarnessError::kind);
    let chain: Vec<String> = err.chain().map(ToString::to_string).collect();
    json!({ "error": kind, "message": chain.join(": ") }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("{}", json!({ "error": "usage", "message": first }));
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Train(f) => train(f),
        Command::Evaluate(f) => evaluate(f),
        Command::Compare(f) => compare(f),
        Command::CharacterizeAltimeter(f) => characterize(f),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}
