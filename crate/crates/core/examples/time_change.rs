//! The cumulated intensity of a finite run and the unit-rate Poisson times it
//! produces.

use stable_chaos::finite_system::{cumulated_intensity, simulate_finite, transformed_event_times};
use stable_chaos::measures::{ks_one_sample, Sample};
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
    let bundle = simulate_finite(&spec, 100, 10.0, &doa, &SeedTree::new(8))?;
    let a = cumulated_intensity(&bundle);
    println!("A(T) = {:.4}", a.value_at(10.0));
    println!(
        "largest violation of {} (t-s) <= A(t)-A(s) <= {} (t-s): {:.2e}",
        spec.f_lower(),
        spec.f_upper(),
        a.bound_violation(spec.f_lower(), spec.f_upper())
    );
    let s = transformed_event_times(&bundle);
    let mut prev = 0.0;
    let spacings: Vec<f64> = s
        .iter()
        .map(|&v| {
            let d = v - prev;
            prev = v;
            d
        })
        .collect();
    let ks = ks_one_sample(&Sample::new(spacings)?, |x| 1.0 - (-x).exp());
    println!(
        "{} events, KS vs Exp(1): stat={:.4} p={:.3}",
        s.len(),
        ks.stat,
        ks.p_value
    );
    Ok(())
}
