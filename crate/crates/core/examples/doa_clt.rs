//! Normalized sums of Pareto draws against their stable limit.

use stable_chaos::measures::{ks_two_sample, Sample};
use stable_chaos::stable_noise::{stable_target_of, DoaLaw, SeedTree};

fn main() -> stable_chaos::Result<()> {
    let law = DoaLaw::symmetric_pareto(0.5, 1.0)?;
    let target = stable_target_of(&law);
    println!(
        "target: alpha={} a+={} a-={}",
        target.alpha, target.a_plus, target.a_minus
    );
    let sampler = target.sampler()?;
    let seeds = SeedTree::new(3);
    let mut r = seeds.stream("reference", 0);
    let reference = Sample::new((0..4000).map(|_| sampler.increment(1.0, &mut r)).collect())?;
    for n in [4usize, 64, 1024] {
        let mut rng = seeds.stream("sums", n as u64);
        let scale = (n as f64).powf(-1.0 / law.alpha());
        let sums: Vec<f64> = (0..4000)
            .map(|_| scale * (0..n).map(|_| law.sample(&mut rng)).sum::<f64>())
            .collect();
        let ks = ks_two_sample(&Sample::new(sums)?, &reference);
        println!("n={n:5} KS={:.4}", ks.stat);
    }
    Ok(())
}
