#![allow(clippy::neg_cmp_op_on_partial_ord)]
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stable_chaos::finite_system::{simulate_finite_with, FiniteOptions};
use stable_chaos::harness::{
    run_experiment, write_event_log, write_snapshots, write_stable_path, Experiment,
    ExperimentConfig,
};
use stable_chaos::limit_system::StablePathGrid;
use stable_chaos::stable_noise::SeedTree;
use stable_chaos::Error;

#[derive(Parser)]
#[command(
    name = "stable-chaos",
    version,
    about = "Mean-field jump systems with heavy-tailed common kicks"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Validate the config and exit.
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one finite system and write its event log and snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Particle count (defaults to the first entry of `n_grid`).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run one catalog experiment.
    Experiment {
        name: Experiment,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.root_seed = s;
    }
    Ok(cfg)
}

fn simulate(cfg: &ExperimentConfig, n: Option<usize>, out: &Path) -> Result<(), Error> {
    let n = n.unwrap_or(cfg.finite.n_grid[0]);
    let seeds = SeedTree::new(cfg.root_seed).subtree("simulate", 0);
    let opts = FiniteOptions {
        drift_substep: cfg.finite.drift_substep,
        collateral_scale: cfg.finite.collateral_off.then_some(0.0),
        stops: cfg.finite.output_times.clone(),
        ..Default::default()
    };
    let bundle = simulate_finite_with(
        &cfg.model,
        n,
        cfg.finite.horizon,
        &cfg.doa_law()?,
        &seeds,
        &opts,
    )?;
    std::fs::create_dir_all(out)?;
    write_event_log(&out.join("events.csv"), &bundle)?;
    let snaps: Vec<(f64, Vec<f64>)> = cfg
        .finite
        .output_times
        .iter()
        .map(|&t| (t, bundle.state_at(t).to_vec()))
        .collect();
    write_snapshots(&out.join("snapshots.csv"), &snaps)?;
    let path = StablePathGrid::sample(
        &cfg.stable_params()?,
        cfg.finite.horizon,
        cfg.limit.step,
        &mut seeds.stream("stable-path", 0),
    )?;
    write_stable_path(&out.join("stable_path.csv"), &path)?;
    println!(
        "N={n}: {} candidates, {} accepted",
        bundle.events().len(),
        bundle.accepted_events().count()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Simulate {
            config,
            seed,
            out,
            n,
        } => {
            let cfg = load(&config, seed)?;
            if cli.dry_run {
                println!("config ok");
                return Ok(());
            }
            simulate(&cfg, n, &out)
        }
        Cmd::Experiment {
            name,
            config,
            seed,
            out,
        } => {
            let mut cfg = load(&config, seed)?;
            if cfg.experiment != name {
                return Err(Error::Config(format!(
                    "config declares {}, command asks for {}",
                    cfg.experiment.name(),
                    name.name()
                )));
            }
            cfg.out_path = out.display().to_string();
            if cli.dry_run {
                println!("config ok");
                return Ok(());
            }
            let report = run_experiment(&cfg, &out)?;
            for line in &report.summary {
                println!("{line}");
            }
            println!("wrote {}", report.csv.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                _ if e.is_numeric() => 3,
                Error::Io(_) | Error::Csv(_) => 1,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
