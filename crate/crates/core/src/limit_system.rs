//! The conditional McKean-Vlasov limit, approximated by `M` particles that
//! share one stable path.
//!
//! On each step `[t, t + h)`, with every coefficient read at the left
//! endpoint:
//!
//! 1. the drift is integrated by RK4 with the empirical measure frozen at `t`;
//! 2. each particle makes its main jump `psi(X^i_t)` with probability
//!    `1 - exp(-f(X^i_t) h)`;
//! 3. every particle receives the same increment `mu_t(f)^(1/alpha) ΔS`.
//!
//! The empirical measure of the `M` particles stands in for the directing
//! measure `L(X^1 | S)`.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{invalid, Error, Result};
use crate::measures::{order_free_mean, Sample};
use crate::model::{ModelSpec, Rate};
use crate::stable_noise::{SeedTree, StableParams, Stream};

/// Increments of one stable path on the grid `t_k = min(k h, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StablePathGrid {
    pub step: f64,
    pub horizon: f64,
    pub increments: Vec<f64>,
}

fn step_count(horizon: f64, step: f64) -> usize {
    // tolerate representation error in T / h
    ((horizon / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

impl StablePathGrid {
    pub fn sample(
        params: &StableParams,
        horizon: f64,
        step: f64,
        rng: &mut Stream,
    ) -> Result<Self> {
        if !(step > 0.0) || !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid("stable path needs positive step and horizon"));
        }
        let sampler = params.sampler()?;
        let count = step_count(horizon, step);
        let mut prev = 0.0;
        let increments = (1..=count)
            .map(|k| {
                let t = if k == count { horizon } else { k as f64 * step };
                let dt = t - prev;
                prev = t;
                sampler.increment(dt, rng)
            })
            .collect();
        Ok(Self {
            step,
            horizon,
            increments,
        })
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// Grid times `t_0 = 0, ..., t_n = T`.
    pub fn times(&self) -> Vec<f64> {
        let n = self.len();
        (0..=n)
            .map(|k| {
                if k == n {
                    self.horizon
                } else {
                    k as f64 * self.step
                }
            })
            .collect()
    }

    /// `S` at the grid times, starting from `S_0 = 0`.
    pub fn values(&self) -> Vec<f64> {
        let mut s = 0.0;
        std::iter::once(0.0)
            .chain(self.increments.iter().map(|d| {
                s += d;
                s
            }))
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct LimitOptions {
    pub initial_positions: Option<Vec<f64>>,
    /// Stream index used by each particle (defaults to `0..M`).
    pub stream_ids: Option<Vec<u64>>,
    /// Record every grid point (otherwise only `t_0`, `T` and `record_times`).
    pub record_all: bool,
    /// Times whose grid point (the last one not after the time) is recorded.
    pub record_times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LimitBundle {
    pub spec: ModelSpec,
    pub m: usize,
    pub path: StablePathGrid,
    times: Vec<f64>,
    recorded: Vec<usize>,
    states: Vec<f64>,
    /// `mu_t(f)` at every grid time.
    pub mean_rates: Vec<f64>,
    /// Common increment added at each step.
    pub common_increments: Vec<f64>,
}

impl LimitBundle {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Grid indices with a stored state.
    pub fn recorded_steps(&self) -> &[usize] {
        &self.recorded
    }

    fn slot_of(&self, step: usize) -> Option<usize> {
        self.recorded.binary_search(&step).ok()
    }

    /// Positions at grid index `step`, if recorded.
    pub fn state(&self, step: usize) -> Option<&[f64]> {
        self.slot_of(step)
            .map(|s| &self.states[s * self.m..(s + 1) * self.m])
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.times.len() - 1)
            .expect("final state is always recorded")
    }

    pub fn initial_state(&self) -> &[f64] {
        self.state(0).expect("initial state is always recorded")
    }

    /// Grid index of the last grid time not after `t`.
    pub fn step_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }
}

struct FrozenRk4 {
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
}

impl FrozenRk4 {
    fn new(m: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; m]),
            stage: vec![0.0; m],
        }
    }

    /// RK4 for `dx = b(x, mu) dt` with `mu` fixed to the empirical measure of
    /// `frozen`.
    fn step(&mut self, spec: &ModelSpec, xs: &mut [f64], frozen: &[f64], h: f64) {
        let drift = spec.drift.frozen(frozen);
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;
        drift.eval_into(xs, k1);
        for ((s, &x), &k) in stage.iter_mut().zip(xs.iter()).zip(k1.iter()) {
            *s = x + 0.5 * h * k;
        }
        drift.eval_into(stage, k2);
        for ((s, &x), &k) in stage.iter_mut().zip(xs.iter()).zip(k2.iter()) {
            *s = x + 0.5 * h * k;
        }
        drift.eval_into(stage, k3);
        for ((s, &x), &k) in stage.iter_mut().zip(xs.iter()).zip(k3.iter()) {
            *s = x + h * k;
        }
        drift.eval_into(stage, k4);
        for (i, x) in xs.iter_mut().enumerate() {
            *x += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Simulates the limit system on a fresh stable path drawn from `seeds`.
pub fn simulate_limit(
    spec: &ModelSpec,
    m: usize,
    horizon: f64,
    step: f64,
    params: &StableParams,
    seeds: &SeedTree,
) -> Result<LimitBundle> {
    let opts = LimitOptions {
        record_all: true,
        ..Default::default()
    };
    simulate_limit_with(spec, m, horizon, step, params, seeds, &opts)
}

pub fn simulate_limit_with(
    spec: &ModelSpec,
    m: usize,
    horizon: f64,
    step: f64,
    params: &StableParams,
    seeds: &SeedTree,
    opts: &LimitOptions,
) -> Result<LimitBundle> {
    check_inputs(spec, m, horizon, step, params)?;
    let path = StablePathGrid::sample(params, horizon, step, &mut seeds.stream("stable-path", 0))?;
    simulate_limit_on_path(spec, m, &path, seeds, opts)
}

fn check_inputs(
    spec: &ModelSpec,
    m: usize,
    horizon: f64,
    step: f64,
    params: &StableParams,
) -> Result<()> {
    spec.validate()?;
    params.validate()?;
    if m == 0 {
        return Err(invalid("M must be at least 1"));
    }
    if spec.alpha != params.alpha {
        return Err(invalid(format!(
            "model index {} differs from stable index {}",
            spec.alpha, params.alpha
        )));
    }
    if !(step > 0.0) || !(step < horizon) {
        return Err(invalid(format!(
            "step {step} must lie in (0, T = {horizon})"
        )));
    }
    Ok(())
}

/// Runs the `M`-particle scheme on a given stable path. Particle `i` draws its
/// initial position and main-jump clock from streams keyed by its stream id,
/// so replicas on a frozen path differ only through these streams.
pub fn simulate_limit_on_path(
    spec: &ModelSpec,
    m: usize,
    path: &StablePathGrid,
    seeds: &SeedTree,
    opts: &LimitOptions,
) -> Result<LimitBundle> {
    spec.validate()?;
    if m == 0 {
        return Err(invalid("M must be at least 1"));
    }
    let ids: Vec<u64> = match &opts.stream_ids {
        Some(ids) if ids.len() != m => return Err(invalid("one stream id per particle required")),
        Some(ids) => ids.clone(),
        None => (0..m as u64).collect(),
    };
    let mut xs: Vec<f64> = match &opts.initial_positions {
        Some(x) if x.len() != m => {
            return Err(invalid("one initial position per particle required"))
        }
        Some(x) => x.clone(),
        None => ids
            .iter()
            .map(|&id| spec.initial.sample(&mut seeds.stream("initial", id)))
            .collect(),
    };
    let with_main = spec.alpha < 1.0 && !spec.main_jump.is_zero();
    let with_drift = !spec.drift.is_zero();
    // Each particle burns an Exp(1) clock at rate f(left limit). A step in
    // which the clock runs out carries one main jump and restarts it, so a
    // jump occurs with probability 1 - exp(-f h) per step.
    let mut clocks: Vec<(Stream, f64)> = if with_main {
        ids.iter()
            .map(|&id| {
                let mut rng = seeds.stream("main-jump", id);
                let e = rng.sample(Exp1);
                (rng, e)
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut rates = vec![0.0; m];

    let times = path.times();
    let steps = path.len();
    let inv_alpha = 1.0 / spec.alpha;
    let mut rk4 = FrozenRk4::new(m);
    let mut left = vec![0.0; m];
    let mut mean_rates = Vec::with_capacity(steps + 1);
    let mut common_increments = Vec::with_capacity(steps);
    let mut recorded = vec![0];
    let mut states = xs.clone();
    let mut wanted = vec![false; steps + 1];
    for &t in &opts.record_times {
        wanted[times.partition_point(|&s| s <= t).saturating_sub(1)] = true;
    }

    for k in 0..steps {
        let dt = times[k + 1] - times[k];
        left.copy_from_slice(&xs);
        for (r, &x) in rates.iter_mut().zip(&left) {
            *r = spec.rate.eval(x);
        }
        let mean_f = match spec.rate {
            Rate::Constant { c } => c,
            _ => order_free_mean(rates.iter().copied()),
        };
        mean_rates.push(mean_f);
        let common = mean_f.powf(inv_alpha) * path.increments[k];
        common_increments.push(common);

        if with_drift {
            rk4.step(spec, &mut xs, &left, dt);
        }
        if with_main {
            for (i, (rng, clock)) in clocks.iter_mut().enumerate() {
                *clock -= rates[i] * dt;
                if *clock <= 0.0 {
                    xs[i] += spec.main_jump.eval(left[i]);
                    *clock = rng.sample(Exp1);
                }
            }
        }
        for x in xs.iter_mut() {
            *x += common;
        }
        if !common.is_finite() || xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteStep {
                step: k,
                time: times[k],
                detail: format!("stable increment {}", path.increments[k]),
            });
        }
        if opts.record_all || wanted[k + 1] || k + 1 == steps {
            recorded.push(k + 1);
            states.extend_from_slice(&xs);
        }
    }
    mean_rates.push(spec.mean_rate(&xs));

    Ok(LimitBundle {
        spec: *spec,
        m,
        path: path.clone(),
        times,
        recorded,
        states,
        mean_rates,
        common_increments,
    })
}

/// Empirical measure of the `M` particles at the last grid time not after `t`.
pub fn directing_measure_at(bundle: &LimitBundle, t: f64) -> Result<Sample> {
    let horizon = *bundle.times.last().unwrap();
    if t > horizon || t < 0.0 {
        return Err(invalid(format!("time {t} outside [0, {horizon}]")));
    }
    let step = bundle.step_at(t);
    let xs = bundle
        .state(step)
        .ok_or_else(|| invalid(format!("grid index {step} was not recorded")))?;
    Sample::new(xs.to_vec())
}

/// Cross-replica dependence between two limit particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub replicas: usize,
    /// Sample covariance of `g(X^1_T)`, `g(X^2_T)` with the stable path frozen.
    pub conditional_cov: f64,
    pub conditional_corr: f64,
    /// Bootstrap standard error of `conditional_corr`.
    pub conditional_se: f64,
    /// Same quantities with a fresh stable path per replica.
    pub unconditional_cov: f64,
    pub unconditional_corr: f64,
    pub unconditional_se: f64,
}

fn cov_corr(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let (ma, mb) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    let cov = sab / (n - 1.0);
    let corr = if saa > 0.0 && sbb > 0.0 {
        sab / (saa * sbb).sqrt()
    } else {
        0.0
    };
    (cov, corr)
}

fn bootstrap_se(pairs: &[(f64, f64)], rounds: usize, rng: &mut Stream) -> f64 {
    let n = pairs.len();
    let mut buf = vec![(0.0, 0.0); n];
    let stats: Vec<f64> = (0..rounds)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = pairs[rng.random_range(0..n)];
            }
            cov_corr(&buf).1
        })
        .collect();
    let mean = stats.iter().sum::<f64>() / rounds as f64;
    (stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (rounds - 1) as f64).sqrt()
}

/// Freezes one stable path, reruns the `M`-particle system `replicas` times
/// with fresh particle streams, and measures the dependence of `g(X^1_T)` and
/// `g(X^2_T)` across replicas. The same statistics on fresh stable paths are
/// reported for contrast.
#[allow(clippy::too_many_arguments)]
pub fn conditional_iid_check(
    spec: &ModelSpec,
    m: usize,
    horizon: f64,
    step: f64,
    params: &StableParams,
    seeds: &SeedTree,
    replicas: usize,
    g: impl Fn(f64) -> f64 + Sync,
) -> Result<CorrelationReport> {
    use rayon::prelude::*;
    if replicas < 2 {
        return Err(invalid("at least two replicas are required"));
    }
    if m < 2 {
        return Err(invalid("at least two particles are required"));
    }
    check_inputs(spec, m, horizon, step, params)?;
    let frozen =
        StablePathGrid::sample(params, horizon, step, &mut seeds.stream("frozen-path", 0))?;
    let opts = LimitOptions::default();
    let run = |fresh_path: bool, r: usize| -> Result<(f64, f64)> {
        let rep = seeds.subtree(if fresh_path { "fresh" } else { "frozen" }, r as u64);
        let b = if fresh_path {
            simulate_limit_with(spec, m, horizon, step, params, &rep, &opts)?
        } else {
            simulate_limit_on_path(spec, m, &frozen, &rep, &opts)?
        };
        let x = b.final_state();
        Ok((g(x[0]), g(x[1])))
    };
    let cond: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|r| run(false, r))
        .collect::<Result<_>>()?;
    let uncond: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|r| run(true, r))
        .collect::<Result<_>>()?;
    let mut boot = seeds.stream("bootstrap", 0);
    let (conditional_cov, conditional_corr) = cov_corr(&cond);
    let (unconditional_cov, unconditional_corr) = cov_corr(&uncond);
    Ok(CorrelationReport {
        replicas,
        conditional_cov,
        conditional_corr,
        conditional_se: bootstrap_se(&cond, 500, &mut boot),
        unconditional_cov,
        unconditional_corr,
        unconditional_se: bootstrap_se(&uncond, 500, &mut boot),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::empirical_apply;
    use crate::model::{Drift, InitialLaw, MainJump, Rate};

    fn closed_form(c: f64) -> ModelSpec {
        ModelSpec {
            alpha: 0.5,
            drift: Drift::Zero,
            main_jump: MainJump::Zero,
            rate: Rate::Constant { c },
            initial: InitialLaw::Uniform { lo: -1.0, hi: 1.0 },
        }
    }

    fn general() -> ModelSpec {
        ModelSpec {
            alpha: 0.5,
            drift: Drift::TanhToMean { beta: 0.5 },
            main_jump: MainJump::TanhRestoring { kappa: 0.3 },
            rate: Rate::Sigmoid { c0: 1.0, c1: 1.0 },
            initial: InitialLaw::Uniform { lo: -1.0, hi: 1.0 },
        }
    }

    fn params() -> StableParams {
        StableParams::new(0.5, 0.25, 0.25).unwrap()
    }

    #[test]
    fn path_grid_shape() {
        let mut s = SeedTree::new(1).stream("p", 0);
        let p = StablePathGrid::sample(&params(), 1.0, 0.3, &mut s).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.times(), vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        assert_eq!(p.values()[0], 0.0);
        let p = StablePathGrid::sample(&params(), 1.0, 1e-3, &mut s).unwrap();
        assert_eq!(p.len(), 1000);
    }

    #[test]
    fn closed_form_is_exact_on_grid() {
        let spec = closed_form(2.0);
        let b = simulate_limit(&spec, 5, 1.0, 0.01, &params(), &SeedTree::new(3)).unwrap();
        let s = b.path.values();
        let x0 = b.initial_state().to_vec();
        for k in [1, 50, 100] {
            let xs = b.state(k).unwrap();
            for i in 0..5 {
                // 2^(1/0.5) = 4
                assert!((xs[i] - x0[i] - 4.0 * s[k]).abs() <= 1e-9 * (1.0 + s[k].abs()));
            }
        }
    }

    #[test]
    fn common_increment_is_shared() {
        let b =
            simulate_limit(&closed_form(1.0), 4, 1.0, 0.1, &params(), &SeedTree::new(4)).unwrap();
        for k in 0..b.path.len() {
            let (pre, post) = (b.state(k).unwrap(), b.state(k + 1).unwrap());
            for i in 0..4 {
                assert_eq!(post[i], pre[i] + b.common_increments[k]);
            }
        }
    }

    #[test]
    fn single_particle_directing_measure_is_dirac() {
        let b = simulate_limit(&general(), 1, 1.0, 0.01, &params(), &SeedTree::new(5)).unwrap();
        let mu = directing_measure_at(&b, 0.5).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.values()[0], b.state(50).unwrap()[0]);
    }

    #[test]
    fn directing_measure_at_zero_and_beyond() {
        let b = simulate_limit(&general(), 20, 1.0, 0.01, &params(), &SeedTree::new(6)).unwrap();
        assert_eq!(
            directing_measure_at(&b, 0.0).unwrap().values(),
            b.initial_state()
        );
        assert!(directing_measure_at(&b, 1.01).is_err());
        let spec = general();
        for k in 0..b.times().len() {
            let mu = Sample::new(b.state(k).unwrap().to_vec()).unwrap();
            let mf = empirical_apply(&mu, |x| spec.rate.eval(x));
            assert!(mf >= spec.f_lower() && mf <= spec.f_upper());
            assert!(b.mean_rates[k] >= spec.f_lower() && b.mean_rates[k] <= spec.f_upper());
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = params();
        assert!(simulate_limit(&general(), 0, 1.0, 0.01, &p, &SeedTree::new(1)).is_err());
        assert!(simulate_limit(&general(), 5, 1.0, 1.0, &p, &SeedTree::new(1)).is_err());
        let p15 = StableParams::new(1.5, 0.25, 0.25).unwrap();
        assert!(simulate_limit(&general(), 5, 1.0, 0.1, &p15, &SeedTree::new(1)).is_err());
    }

    #[test]
    fn exchangeable_under_stream_permutation() {
        let spec = general();
        let seeds = SeedTree::new(8);
        let mut s = seeds.stream("path", 0);
        let path = StablePathGrid::sample(&params(), 1.0, 0.01, &mut s).unwrap();
        let m = 6;
        let sigma = [2usize, 5, 0, 1, 4, 3];
        let ids: Vec<u64> = (0..m as u64).collect();
        let mut perm_ids = vec![0u64; m];
        for i in 0..m {
            perm_ids[sigma[i]] = ids[i];
        }
        let a_opts = LimitOptions {
            stream_ids: Some(ids),
            record_all: true,
            ..Default::default()
        };
        let b_opts = LimitOptions {
            stream_ids: Some(perm_ids),
            record_all: true,
            ..Default::default()
        };
        let a = simulate_limit_on_path(&spec, m, &path, &seeds, &a_opts).unwrap();
        let b = simulate_limit_on_path(&spec, m, &path, &seeds, &b_opts).unwrap();
        for k in 0..a.times().len() {
            let (xa, xb) = (a.state(k).unwrap(), b.state(k).unwrap());
            for i in 0..m {
                assert_eq!(xa[i].to_bits(), xb[sigma[i]].to_bits());
            }
        }
    }

    #[test]
    fn closed_form_is_step_size_independent() {
        // f constant: X_T - X_0 = c^(1/alpha) S_T whatever the grid.
        let spec = closed_form(1.5);
        let p = params();
        let mut s = SeedTree::new(9).stream("p", 0);
        let fine = StablePathGrid::sample(&p, 1.0, 0.01, &mut s).unwrap();
        let coarse = StablePathGrid {
            step: 0.02,
            horizon: 1.0,
            increments: fine.increments.chunks(2).map(|c| c[0] + c[1]).collect(),
        };
        let seeds = SeedTree::new(10);
        let a = simulate_limit_on_path(&spec, 3, &fine, &seeds, &LimitOptions::default()).unwrap();
        let b =
            simulate_limit_on_path(&spec, 3, &coarse, &seeds, &LimitOptions::default()).unwrap();
        for i in 0..3 {
            let (da, db) = (a.final_state()[i], b.final_state()[i]);
            assert!((da - db).abs() <= 1e-9 * (1.0 + da.abs()));
        }
    }

    #[test]
    fn conditional_independence_without_interaction() {
        let spec = ModelSpec {
            initial: InitialLaw::IrwinHall {
                center: 0.0,
                spread: 1.0,
            },
            ..closed_form(1.0)
        };
        let r = conditional_iid_check(
            &spec,
            2,
            1.0,
            0.05,
            &params(),
            &SeedTree::new(12),
            300,
            f64::atan,
        )
        .unwrap();
        assert!(r.conditional_corr.abs() < 3.0 * r.conditional_se, "{r:?}");
        assert!(r.unconditional_corr > 3.0 * r.unconditional_se, "{r:?}");
        assert!(conditional_iid_check(
            &spec,
            2,
            1.0,
            0.05,
            &params(),
            &SeedTree::new(1),
            1,
            f64::atan
        )
        .is_err());
    }
}
