//! Draws stable increments and checks self-similarity: `S_4` has the law of
//! `4^(1/alpha) S_1`.

use stable_chaos::measures::{ks_two_sample, Sample};
use stable_chaos::stable_noise::{SeedTree, StableParams};

fn main() -> stable_chaos::Result<()> {
    let seeds = SeedTree::new(11);
    for alpha in [0.5, 1.5] {
        let params = StableParams::new(alpha, 0.5, 0.5)?;
        let sampler = params.sampler()?;
        let (mut a, mut b) = (seeds.stream("s4", 0), seeds.stream("s1", 0));
        let s4: Vec<f64> = (0..20_000)
            .map(|_| sampler.increment(4.0, &mut a))
            .collect();
        let scaled: Vec<f64> = (0..20_000)
            .map(|_| 4f64.powf(1.0 / alpha) * sampler.increment(1.0, &mut b))
            .collect();
        let ks = ks_two_sample(&Sample::new(s4)?, &Sample::new(scaled)?);
        println!(
            "alpha={alpha} sigma={:.4} beta={:.2} KS(S_4, 4^(1/a) S_1)={:.4} p={:.3}",
            params.scale(),
            params.skewness(),
            ks.stat,
            ks.p_value
        );
    }
    Ok(())
}
