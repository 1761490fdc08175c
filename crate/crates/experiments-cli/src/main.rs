use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use experiments_cli::{
    ablate_beta, ablate_pretrain, evaluate_artifacts, make_experts, render_artifact, run_cells, run_experiment, sweep_cells,
    transfer_experiment, ExperimentConfig, ExperimentOutcome, Result,
};

#[derive(Parser)]
#[command(name = "icrl-experiments", about = "Gridworld constraint-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seeds = vec![seed];
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify the expert, then sample its demonstrations.
    MakeExpert(Common),
    /// Train the configured methods at the grid's own stochasticity.
    Train(Common),
    /// Re-evaluate stored policies.
    Evaluate(Common),
    /// Train every method over the stochasticity sweep.
    Sweep(Common),
    /// Repeat the sweep for each temperature in `ablation_betas`.
    AblateBeta(Common),
    /// Encoder features with and without pre-training.
    AblatePretrain(Common),
    /// Plan for the alternative goal with the frozen learned cost.
    Transfer(Common),
    /// Print the ASCII cost map of a lambda.json or zeta.json file.
    RenderCost {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
}

fn report(outcome: &ExperimentOutcome) -> ExitCode {
    for r in &outcome.aggregate {
        println!(
            "{} st={:.2} beta={:e} n={} reward={:.4}±{:.4} violation={:.4}±{:.4}",
            r.label, r.stochasticity, r.beta, r.seeds, r.reward_mean, r.reward_se, r.violation_mean, r.violation_se
        );
    }
    for f in &outcome.failures {
        eprintln!("failed: {} st={:.2} seed={}: {}", f.label, f.stochasticity, f.seed, f.error);
    }
    if outcome.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    Ok(match cli.command {
        Command::MakeExpert(c) => {
            for e in make_experts(&c.load()?)? {
                println!(
                    "st={:.2} seed={} penalty={:e} violation_probability={:.3e} saturated={} reward={:.4}",
                    e.stochasticity, e.seed, e.penalty, e.violation_probability, e.saturated, e.eval.reward
                );
            }
            ExitCode::SUCCESS
        }
        Command::Train(c) => {
            let mut cfg = c.load()?;
            cfg.sweep = None;
            report(&run_cells(&sweep_cells(&cfg), &cfg.output_dir)?)
        }
        Command::Evaluate(c) => {
            let (rows, failures) = evaluate_artifacts(&c.load()?)?;
            for r in &rows {
                println!("{} st={:.2} seed={} reward={:.4} violation={:.4}", r.label, r.stochasticity, r.seed, r.reward, r.violation_rate);
            }
            for f in &failures {
                eprintln!("failed: {} st={:.2} seed={}: {}", f.label, f.stochasticity, f.seed, f.error);
            }
            if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Command::Sweep(c) => report(&run_experiment(&c.load()?)?),
        Command::AblateBeta(c) => report(&ablate_beta(&c.load()?)?),
        Command::AblatePretrain(c) => report(&ablate_pretrain(&c.load()?)?),
        Command::Transfer(c) => {
            for r in transfer_experiment(&c.load()?)? {
                println!(
                    "st={:.2} seed={} violation={:.4} reward={:.4} control_violation={:.4} control_reward={:.4}",
                    r.stochasticity, r.seed, r.learned.violation_rate, r.learned.reward, r.control.violation_rate, r.control.reward
                );
            }
            ExitCode::SUCCESS
        }
        Command::RenderCost { common, input } => {
            let cfg = common.load()?;
            let map = render_artifact(&input, &cfg.grid)?;
            match &common.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join("costmap.txt"), map)?;
                }
                None => print!("{map}"),
            }
            ExitCode::SUCCESS
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
