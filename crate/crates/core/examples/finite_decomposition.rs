//! One run of the N-particle system and the split of a trajectory into drift,
//! main jumps and collateral jumps.

use stable_chaos::finite_system::{decompose_trajectory, simulate_finite};
use stable_chaos::model::{Drift, InitialLaw, MainJump, ModelSpec, Rate};
use stable_chaos::stable_noise::{DoaLaw, SeedTree};

fn main() -> stable_chaos::Result<()> {
    let spec = ModelSpec {
        alpha: 0.5,
        drift: Drift::TanhToMean { beta: 0.5 },
        main_jump: MainJump::TanhRestoring { kappa: 0.3 },
        rate: Rate::Sigmoid { c0: 1.0, c1: 1.0 },
        initial: InitialLaw::Uniform { lo: -1.0, hi: 1.0 },
    };
    let doa = DoaLaw::symmetric_pareto(0.5, 1.0)?;
    let bundle = simulate_finite(&spec, 50, 5.0, &doa, &SeedTree::new(5))?;
    println!(
        "{} candidates, {} accepted, {} grid points",
        bundle.events().len(),
        bundle.accepted_events().count(),
        bundle.len()
    );
    let d = decompose_trajectory(&bundle, 0)?;
    let last = d.drift.len() - 1;
    println!(
        "particle 0 at T: X={:.4} B={:.4} I={:.4} J={:.4} E={:.4}",
        bundle.final_state()[0],
        d.drift[last],
        d.main_jumps[last],
        d.collateral[last],
        d.self_collateral[last]
    );
    println!(
        "reconstruction error {:.2e}",
        d.reconstruction_error(&bundle)
    );
    Ok(())
}
