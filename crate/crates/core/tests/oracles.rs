//! Sampler checks against independently constructed references.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use stable_chaos::measures::{ks_two_sample, Sample};
use stable_chaos::stable_noise::{DoaLaw, SeedTree, StableParams};

const DRAWS: usize = 100_000;

/// Compound Poisson with the Lévy measure `a z^(-1-alpha) dz` on `z > eps`,
/// plus the mean of the discarded jumps below `eps`.
fn truncated_subordinator(alpha: f64, a: f64, eps: f64, rng: &mut impl Rng) -> f64 {
    let rate = a / alpha * eps.powf(-alpha);
    let small = a / (1.0 - alpha) * eps.powf(1.0 - alpha);
    let count = Poisson::new(rate).unwrap().sample(rng) as usize;
    let big: f64 = (0..count)
        .map(|_| eps * (1.0 - rng.random::<f64>()).powf(-1.0 / alpha))
        .sum();
    small + big
}

#[test]
fn one_sided_law_matches_compound_poisson_oracle() {
    let params = StableParams::new(0.5, 0.5, 0.0).unwrap();
    let sampler = params.sampler().unwrap();
    let seeds = SeedTree::new(101);
    let mut rng = seeds.stream("stable", 0);
    let draws: Vec<f64> = (0..DRAWS)
        .map(|_| sampler.increment(1.0, &mut rng))
        .collect();
    assert!(draws.iter().all(|&x| x >= 0.0));
    let mut rng = seeds.stream("oracle", 0);
    let oracle: Vec<f64> = (0..DRAWS)
        .map(|_| truncated_subordinator(0.5, 0.5, 1e-4, &mut rng))
        .collect();
    let ks = ks_two_sample(&Sample::new(draws).unwrap(), &Sample::new(oracle).unwrap());
    assert!(ks.stat < 0.05, "KS {}", ks.stat);
}

#[test]
fn increments_are_self_similar() {
    let seeds = SeedTree::new(102);
    for (alpha, ap, am) in [(0.5, 0.25, 0.25), (1.5, 0.7, 0.3), (0.7, 1.0, 0.0)] {
        let sampler = StableParams::new(alpha, ap, am).unwrap().sampler().unwrap();
        let mut r1 = seeds.stream("t", 0);
        let mut r2 = seeds.stream("unit", 0);
        let t: f64 = 2.5;
        let a: Vec<f64> = (0..DRAWS).map(|_| sampler.increment(t, &mut r1)).collect();
        let b: Vec<f64> = (0..DRAWS)
            .map(|_| t.powf(1.0 / alpha) * sampler.increment(1.0, &mut r2))
            .collect();
        let ks = ks_two_sample(&Sample::new(a).unwrap(), &Sample::new(b).unwrap());
        assert!(ks.stat < 0.02, "alpha {alpha}: KS {}", ks.stat);
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut r = vec![0.0; v.len()];
    for (rank, &i) in idx.iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let m = (n - 1.0) / 2.0;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - m) * (y - m)).sum();
    let var: f64 = ra.iter().map(|x| (x - m).powi(2)).sum();
    cov / var
}

#[test]
fn derived_streams_are_uncorrelated() {
    let seeds = SeedTree::new(103);
    let sampler = StableParams::new(1.5, 0.5, 0.5).unwrap().sampler().unwrap();
    let pairs = [
        (("a", 0), ("a", 1)),
        (("a", 0), ("b", 0)),
        (("collateral", 7), ("acceptance", 7)),
    ];
    for ((l1, i1), (l2, i2)) in pairs {
        let mut r1 = seeds.stream(l1, i1);
        let mut r2 = seeds.stream(l2, i2);
        let a: Vec<f64> = (0..DRAWS).map(|_| sampler.standard(&mut r1)).collect();
        let b: Vec<f64> = (0..DRAWS).map(|_| sampler.standard(&mut r2)).collect();
        let rho = spearman(&a, &b);
        assert!(rho.abs() < 0.01, "{l1}/{i1} vs {l2}/{i2}: rho {rho}");
    }
    let mut r1 = seeds.subtree("x", 0).stream("s", 0);
    let mut r2 = seeds.subtree("x", 1).stream("s", 0);
    let a: Vec<f64> = (0..DRAWS).map(|_| r1.random()).collect();
    let b: Vec<f64> = (0..DRAWS).map(|_| r2.random()).collect();
    assert!(spearman(&a, &b).abs() < 0.01);
}

#[test]
fn pareto_sums_approach_their_stable_target() {
    let law = DoaLaw::asymmetric_pareto(1.5, 0.7, 1.0).unwrap();
    let target = stable_chaos::stable_noise::stable_target_of(&law)
        .sampler()
        .unwrap();
    let seeds = SeedTree::new(104);
    let mut rng = seeds.stream("sums", 0);
    let n = 2000;
    let scale = (n as f64).powf(-1.0 / 1.5);
    let sums: Vec<f64> = (0..20_000)
        .map(|_| scale * (0..n).map(|_| law.sample(&mut rng)).sum::<f64>())
        .collect();
    let mut rng = seeds.stream("target", 0);
    let direct: Vec<f64> = (0..20_000)
        .map(|_| target.increment(1.0, &mut rng))
        .collect();
    let ks = ks_two_sample(&Sample::new(sums).unwrap(), &Sample::new(direct).unwrap());
    assert!(ks.stat < 0.03, "KS {}", ks.stat);
}
