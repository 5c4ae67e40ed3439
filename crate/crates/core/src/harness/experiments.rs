//! The experiment catalog. Each run is a pure function of its config: every
//! replica draws from streams keyed by `(experiment, N, replica)`, and rows
//! are emitted in `(N, time, replica)` order whatever the thread count.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::finite_system::{
    collateral_sum_fast, simulate_finite_with, snapshots_finite, transformed_event_times,
    FiniteOptions,
};
use crate::limit_system::{
    simulate_limit_on_path, simulate_limit_with, LimitOptions, StablePathGrid,
};
use crate::measures::{ks_one_sample, ks_two_sample, order_free_mean, wasserstein1_1d, Sample};
use crate::model::Rate;
use crate::stable_noise::{SeedTree, Stream};

/// Test function for the common-noise experiment.
pub fn common_noise_test_function(x: f64) -> f64 {
    x.atan()
}

fn tree(cfg: &ExperimentConfig) -> SeedTree {
    SeedTree::new(cfg.root_seed).subtree(cfg.experiment.name(), 0)
}

fn require(cfg: &ExperimentConfig, kind: Experiment) -> Result<()> {
    cfg.validate()?;
    if cfg.experiment != kind {
        return Err(Error::Config(format!(
            "config is for {}, not {}",
            cfg.experiment.name(),
            kind.name()
        )));
    }
    Ok(())
}

fn collateral_rate(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.model.rate {
        Rate::Constant { c } if cfg.model.is_collateral_only() => Ok(c),
        _ => Err(Error::Config(format!(
            "{} needs b ≡ 0, psi ≡ 0 and a constant rate",
            cfg.experiment.name()
        ))),
    }
}

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableCltRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub ks_stat: f64,
    pub n_samples: usize,
}

/// Law of the collateral sum `J^N_T` against `c^(1/alpha) S_T` for each N.
/// All N share one reference sample.
pub fn run_stable_clt(cfg: &ExperimentConfig) -> Result<Vec<StableCltRow>> {
    require(cfg, Experiment::StableClt)?;
    let c = collateral_rate(cfg)?;
    let doa = cfg.doa_law()?;
    let target = cfg.stable_params()?.sampler()?;
    let horizon = cfg.finite.horizon;
    let reps = cfg.finite.replicas;
    let seeds = tree(cfg);
    let reference: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| target.increment(c * horizon, &mut seeds.stream("reference", r)))
        .collect();
    let reference = Sample::new(reference)?;
    cfg.finite
        .n_grid
        .iter()
        .map(|&n| {
            let sub = seeds.subtree("N", n as u64);
            let draws: Vec<f64> = (0..reps as u64)
                .into_par_iter()
                .map(|r| collateral_sum_fast(n, c, horizon, &doa, &mut sub.stream("replica", r)))
                .collect::<Result<_>>()?;
            let ks = ks_two_sample(&Sample::new(draws)?, &reference);
            Ok(StableCltRow {
                n,
                ks_stat: ks.stat,
                n_samples: reps,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeChangeRow {
    pub replica: usize,
    pub n_events: usize,
    /// KS p-value of the transformed spacings against Exp(1); empty when the
    /// replica had no accepted event.
    pub ks_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeChangeSummary {
    pub rows: Vec<TimeChangeRow>,
    /// Replicas with at least one accepted event.
    pub counted: usize,
    /// Fraction of counted replicas with `ks_p` above the configured cutoff.
    pub pass_fraction: f64,
}

/// Spacings of `N A(t_k)` at accepted events, tested against Exp(1), at
/// `N = n_grid[0]`.
pub fn run_time_change_poisson(cfg: &ExperimentConfig) -> Result<TimeChangeSummary> {
    require(cfg, Experiment::TimeChangePoisson)?;
    let doa = cfg.doa_law()?;
    let n = cfg.finite.n_grid[0];
    let seeds = tree(cfg);
    let opts = FiniteOptions {
        drift_substep: cfg.finite.drift_substep,
        ..Default::default()
    };
    let rows: Vec<TimeChangeRow> = (0..cfg.finite.replicas)
        .into_par_iter()
        .map(|r| {
            let b = simulate_finite_with(
                &cfg.model,
                n,
                cfg.finite.horizon,
                &doa,
                &seeds.subtree("replica", r as u64),
                &opts,
            )?;
            let s = transformed_event_times(&b);
            let spacings: Vec<f64> = s
                .iter()
                .scan(0.0, |prev, &v| {
                    let d = v - *prev;
                    *prev = v;
                    Some(d)
                })
                .collect();
            let ks_p = match Sample::new(spacings) {
                Ok(sample) => Some(ks_one_sample(&sample, |x| 1.0 - (-x.max(0.0)).exp()).p_value),
                Err(_) => None,
            };
            Ok(TimeChangeRow {
                replica: r,
                n_events: s.len(),
                ks_p,
            })
        })
        .collect::<Result<_>>()?;
    let counted = rows.iter().filter(|r| r.ks_p.is_some()).count();
    let passed = rows
        .iter()
        .filter(|r| r.ks_p.is_some_and(|p| p > cfg.thresholds.ks_p))
        .count();
    let pass_fraction = if counted == 0 {
        0.0
    } else {
        passed as f64 / counted as f64
    };
    Ok(TimeChangeSummary {
        rows,
        counted,
        pass_fraction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollateralLimitRow {
    pub n_samples: usize,
    pub step: f64,
    pub ks_stat: f64,
}

/// Closed-form check of the limit scheme: with `b ≡ 0`, `psi ≡ 0`, `f ≡ c`,
/// the pooled `X_T - X_0` (one particle per fresh stable path) must follow
/// `c^(1/alpha) S_T`.
pub fn run_collateral_limit(cfg: &ExperimentConfig) -> Result<CollateralLimitRow> {
    require(cfg, Experiment::CollateralLimit)?;
    let c = collateral_rate(cfg)?;
    let params = cfg.stable_params()?;
    let target = params.sampler()?;
    let horizon = cfg.finite.horizon;
    let reps = cfg.limit.reference_replicas;
    let seeds = tree(cfg);
    let opts = LimitOptions::default();
    let pooled: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let b = simulate_limit_with(
                &cfg.model,
                cfg.limit.m,
                horizon,
                cfg.limit.step,
                &params,
                &seeds.subtree("path", r),
                &opts,
            )?;
            Ok(b.final_state()[0] - b.initial_state()[0])
        })
        .collect::<Result<_>>()?;
    let direct: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            c.powf(1.0 / params.alpha) * target.increment(horizon, &mut seeds.stream("direct", r))
        })
        .collect();
    let ks = ks_two_sample(&Sample::new(pooled)?, &Sample::new(direct)?);
    Ok(CollateralLimitRow {
        n_samples: reps,
        step: cfg.limit.step,
        ks_stat: ks.stat,
    })
}

/// Pooled marginals of one limit particle per fresh stable path at each
/// output time. The other `M - 1` particles only supply the empirical
/// measure.
pub fn limit_reference(cfg: &ExperimentConfig, seeds: &SeedTree) -> Result<Vec<Vec<f64>>> {
    let params = cfg.stable_params()?;
    let times = &cfg.finite.output_times;
    let opts = LimitOptions {
        record_times: times.clone(),
        ..Default::default()
    };
    let per_path: Vec<Vec<f64>> = (0..cfg.limit.reference_replicas as u64)
        .into_par_iter()
        .map(|r| {
            let b = simulate_limit_with(
                &cfg.model,
                cfg.limit.m,
                cfg.finite.horizon,
                cfg.limit.step,
                &params,
                &seeds.subtree("limit-path", r),
                &opts,
            )?;
            Ok(times
                .iter()
                .map(|&t| b.state(b.step_at(t)).expect("recorded")[0])
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..times.len())
        .map(|k| per_path.iter().map(|v| v[k]).collect())
        .collect())
}

/// Snapshots of the finite system for `replicas` independent runs at each
/// output time: `out[replica][time]` is the full N-vector.
fn finite_snapshots(
    cfg: &ExperimentConfig,
    n: usize,
    seeds: &SeedTree,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let doa = cfg.doa_law()?;
    let opts = FiniteOptions {
        drift_substep: cfg.finite.drift_substep,
        collateral_scale: cfg.finite.collateral_off.then_some(0.0),
        ..Default::default()
    };
    let times = &cfg.finite.output_times;
    let sub = seeds.subtree("N", n as u64);
    (0..cfg.finite.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let snaps = snapshots_finite(
                &cfg.model,
                n,
                cfg.finite.horizon,
                &doa,
                &sub.subtree("replica", r),
                times,
                &opts,
            )?;
            Ok(times
                .iter()
                .map(|&t| {
                    snaps
                        .iter()
                        .find(|(s, _)| *s == t)
                        .map(|(_, xs)| xs.clone())
                        .expect("snapshot recorded")
                })
                .collect())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosSweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub t: f64,
    pub w1: f64,
    pub n_pooled: usize,
}

/// W1 between the pooled law of `X^{N,1}_t` (one particle per replica) and the
/// pooled limit marginal, for each `(N, t)`. The limit reference is reduced to
/// the replica count by mid-quantile resampling.
pub fn run_chaos_sweep(cfg: &ExperimentConfig) -> Result<Vec<ChaosSweepRow>> {
    require(cfg, Experiment::ChaosSweep)?;
    let seeds = tree(cfg);
    let reference = limit_reference(cfg, &seeds)?;
    let reps = cfg.finite.replicas;
    let mut rows = Vec::new();
    for &n in &cfg.finite.n_grid {
        let snaps = finite_snapshots(cfg, n, &seeds)?;
        for (k, &t) in cfg.finite.output_times.iter().enumerate() {
            let pooled = Sample::new(snaps.iter().map(|s| s[k][0]).collect())?;
            let reference = Sample::new(reference[k].clone())?.quantile_resample(reps)?;
            rows.push(ChaosSweepRow {
                n,
                t,
                w1: wasserstein1_1d(&pooled, &reference)?,
                n_pooled: reps,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonNoiseRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub var_finite: f64,
    pub var_limit_ref: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommonNoiseSummary {
    pub rows: Vec<CommonNoiseRow>,
    /// Fewer than 10 replicas: variances are indicative only.
    pub low_precision: bool,
}

/// Across-replica variance of `mu^N_T(g)` with `g = arctan`, next to the
/// across-path variance of the limit estimate `mu_T(g)`. With collateral jumps
/// switched off the limit is deterministic and its variance is reported as 0.
pub fn run_common_noise(cfg: &ExperimentConfig) -> Result<CommonNoiseSummary> {
    require(cfg, Experiment::CommonNoise)?;
    let seeds = tree(cfg);
    let horizon = cfg.finite.horizon;
    let mut at_horizon = cfg.clone();
    at_horizon.finite.output_times = vec![horizon];
    let g = common_noise_test_function;

    let var_limit_ref = if cfg.finite.collateral_off {
        0.0
    } else {
        let params = cfg.stable_params()?;
        let opts = LimitOptions::default();
        let means: Vec<f64> = (0..cfg.limit.reference_replicas as u64)
            .into_par_iter()
            .map(|r| {
                let b = simulate_limit_with(
                    &cfg.model,
                    cfg.limit.m,
                    horizon,
                    cfg.limit.step,
                    &params,
                    &seeds.subtree("limit-path", r),
                    &opts,
                )?;
                Ok(order_free_mean(b.final_state().iter().map(|&x| g(x))))
            })
            .collect::<Result<_>>()?;
        variance(&means)
    };

    let rows = cfg
        .finite
        .n_grid
        .iter()
        .map(|&n| {
            let snaps = finite_snapshots(&at_horizon, n, &seeds)?;
            let means: Vec<f64> = snaps
                .iter()
                .map(|s| order_free_mean(s[0].iter().map(|&x| g(x))))
                .collect();
            Ok(CommonNoiseRow {
                n,
                var_finite: variance(&means),
                var_limit_ref,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CommonNoiseSummary {
        rows,
        low_precision: cfg.finite.replicas < 10,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfcheckRow {
    pub knob: String,
    pub value_a: f64,
    pub value_b: f64,
    pub w1: f64,
    pub mc_se: f64,
}

/// Bootstrap standard error of W1 between paired pooled samples, resampling
/// replicas jointly.
fn paired_w1_se(a: &[f64], b: &[f64], rounds: usize, rng: &mut Stream) -> Result<f64> {
    use rand::Rng;
    let n = a.len();
    let mut stats = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let sa = Sample::new(idx.iter().map(|&i| a[i]).collect())?;
        let sb = Sample::new(idx.iter().map(|&i| b[i]).collect())?;
        stats.push(wasserstein1_1d(&sa, &sb)?);
    }
    Ok(variance(&stats).sqrt())
}

/// Repeats the limit simulation at `(h, h/2)` and `(M, 2M)` on coupled
/// randomness (the coarse path sums pairs of fine increments; the larger
/// particle system contains the smaller one's streams) and reports the W1
/// between the pooled marginals of particle 0 at the horizon.
pub fn run_limit_selfcheck(cfg: &ExperimentConfig) -> Result<Vec<SelfcheckRow>> {
    require(cfg, Experiment::LimitSelfcheck)?;
    let seeds = tree(cfg);
    let params = cfg.stable_params()?;
    let (h, m, horizon) = (cfg.limit.step, cfg.limit.m, cfg.finite.horizon);
    let opts = LimitOptions::default();
    let pairs: Vec<(f64, f64, f64, f64)> = (0..cfg.limit.reference_replicas as u64)
        .into_par_iter()
        .map(|r| {
            let rep = seeds.subtree("limit-path", r);
            let fine = StablePathGrid::sample(
                &params,
                horizon,
                h / 2.0,
                &mut rep.stream("stable-path", 0),
            )?;
            let coarse = StablePathGrid {
                step: h,
                horizon,
                increments: fine.increments.chunks(2).map(|c| c.iter().sum()).collect(),
            };
            let at_h = simulate_limit_on_path(&cfg.model, m, &coarse, &rep, &opts)?;
            let at_half = simulate_limit_on_path(&cfg.model, m, &fine, &rep, &opts)?;
            let at_2m = simulate_limit_on_path(&cfg.model, 2 * m, &coarse, &rep, &opts)?;
            let x = at_h.final_state()[0];
            Ok((x, at_half.final_state()[0], x, at_2m.final_state()[0]))
        })
        .collect::<Result<_>>()?;
    let mut boot = seeds.stream("bootstrap", 0);
    let mut row =
        |knob: &str, a: f64, b: f64, xa: Vec<f64>, xb: Vec<f64>| -> Result<SelfcheckRow> {
            let w1 = wasserstein1_1d(&Sample::new(xa.clone())?, &Sample::new(xb.clone())?)?;
            let mc_se = paired_w1_se(&xa, &xb, 200, &mut boot)?;
            Ok(SelfcheckRow {
                knob: knob.into(),
                value_a: a,
                value_b: b,
                w1,
                mc_se,
            })
        };
    Ok(vec![
        row(
            "h",
            h,
            h / 2.0,
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )?,
        row(
            "M",
            m as f64,
            2.0 * m as f64,
            pairs.iter().map(|p| p.2).collect(),
            pairs.iter().map(|p| p.3).collect(),
        )?,
    ])
}
