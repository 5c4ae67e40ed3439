//! Runs a small stable CLT experiment through the harness and prints the CSV.

use stable_chaos::harness::{run_experiment, Experiment, ExperimentConfig};
use stable_chaos::model::{Drift, InitialLaw, MainJump, ModelSpec, Rate};

fn main() -> stable_chaos::Result<()> {
    let spec = ModelSpec {
        alpha: 0.5,
        drift: Drift::Zero,
        main_jump: MainJump::Zero,
        rate: Rate::Constant { c: 1.0 },
        initial: InitialLaw::PointMass { x: 0.0 },
    };
    let mut cfg = ExperimentConfig::new(Experiment::StableClt, spec);
    cfg.finite.n_grid = vec![16, 256];
    cfg.finite.replicas = 2000;
    cfg.root_seed = 9;
    let out = std::env::temp_dir().join("stable-chaos-example");
    let report = run_experiment(&cfg, &out)?;
    print!("{}", std::fs::read_to_string(&report.csv)?);
    Ok(())
}
