//! The limit system driven by one stable path, and its directing measure.

use stable_chaos::limit_system::{directing_measure_at, simulate_limit};
use stable_chaos::model::{Drift, InitialLaw, MainJump, ModelSpec, Rate};
use stable_chaos::stable_noise::{SeedTree, StableParams};

fn main() -> stable_chaos::Result<()> {
    let spec = ModelSpec {
        alpha: 1.5,
        drift: Drift::TanhToMean { beta: 0.5 },
        main_jump: MainJump::Zero,
        rate: Rate::Sigmoid { c0: 1.0, c1: 1.0 },
        initial: InitialLaw::Uniform { lo: -1.0, hi: 1.0 },
    };
    let params = StableParams::new(1.5, 0.5, 0.5)?;
    let bundle = simulate_limit(&spec, 500, 1.0, 1e-3, &params, &SeedTree::new(2))?;
    let s = bundle.path.values();
    for t in [0.25, 0.5, 0.75, 1.0] {
        let k = bundle.step_at(t);
        let mu = directing_measure_at(&bundle, t)?;
        let mean = mu.values().iter().sum::<f64>() / mu.len() as f64;
        println!(
            "t={t:.2} S_t={:+.4} mu_t(f)={:.4} mean position {:+.4}",
            s[k], bundle.mean_rates[k], mean
        );
    }
    Ok(())
}
