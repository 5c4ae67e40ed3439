//! Thinning engine for the N-particle system.
//!
//! Candidate clock rings come from a Poisson process of rate `N * sup f`. At
//! each ring a particle `i` is drawn uniformly and the ring is accepted with
//! probability `f(X^i_-) / sup f`. An accepted ring moves particle `i` by
//! `psi(X^i_-)` and every other particle by `u * N^(-1/alpha)` with `u` drawn
//! from the collateral law. Between rings the coupled drift ODE is integrated
//! with classical RK4 on substeps no longer than `drift_substep`.

use rand::Rng;
use rand_distr::{Exp1, Poisson};

use super::EventRecord;
use crate::error::{invalid, Error, Result};
use crate::model::ModelSpec;
use crate::stable_noise::{DoaLaw, SeedTree, Stream};

/// Knobs that do not change the law of the simulated system, plus two test
/// hooks.
#[derive(Debug, Clone)]
pub struct FiniteOptions {
    /// Largest drift substep.
    pub drift_substep: f64,
    /// Extra grid times at which the state is recorded exactly.
    pub stops: Vec<f64>,
    /// Overrides the collateral scale `N^(-1/alpha)`. `Some(0.0)` switches
    /// collateral jumps off.
    pub collateral_scale: Option<f64>,
    /// Explicit initial positions instead of draws from the initial law.
    pub initial_positions: Option<Vec<f64>>,
    /// Maps the uniformly drawn candidate index `k` to particle `index_map[k]`.
    pub index_map: Option<Vec<usize>>,
}

impl Default for FiniteOptions {
    fn default() -> Self {
        Self {
            drift_substep: 1e-2,
            stops: Vec::new(),
            collateral_scale: None,
            initial_positions: None,
            index_map: None,
        }
    }
}

/// What happened at a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Start,
    /// End of a drift substep or a requested stop.
    Drift,
    /// A rejected candidate (event index).
    Rejected(usize),
    /// An accepted candidate (event index); the stored state is post-jump.
    Accepted(usize),
}

/// Receives the trajectory as it is produced.
pub trait Recorder {
    /// Called for every grid point with the post-jump state. `pre_jump` is
    /// the left limit when the point is an accepted event.
    fn point(&mut self, t: f64, kind: GridKind, xs: &[f64], pre_jump: Option<&[f64]>);
    fn event(&mut self, rec: EventRecord);
    /// Whether left limits are needed at accepted events.
    fn wants_pre_jump(&self) -> bool {
        false
    }
}

pub(crate) struct Streams {
    times: Stream,
    index: Stream,
    accept: Stream,
    collateral: Stream,
}

impl Streams {
    pub(crate) fn new(seeds: &SeedTree) -> Self {
        Self {
            times: seeds.stream("candidate-times", 0),
            index: seeds.stream("candidate-index", 0),
            accept: seeds.stream("acceptance", 0),
            collateral: seeds.stream("collateral", 0),
        }
    }
}

pub(crate) fn initial_positions(
    spec: &ModelSpec,
    n: usize,
    seeds: &SeedTree,
    explicit: Option<&[f64]>,
) -> Result<Vec<f64>> {
    match explicit {
        Some(xs) if xs.len() != n => Err(invalid(format!(
            "expected {n} initial positions, got {}",
            xs.len()
        ))),
        Some(xs) => Ok(xs.to_vec()),
        None => Ok((0..n)
            .map(|i| spec.initial.sample(&mut seeds.stream("initial", i as u64)))
            .collect()),
    }
}

struct Rk4 {
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
        }
    }

    /// Advances `xs` by one step of length `h` of the coupled ODE
    /// `dx_i = b(x_i, mu(x)) dt`.
    fn step(&mut self, spec: &ModelSpec, xs: &mut [f64], h: f64) {
        let drift = spec.drift;
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;
        drift.eval_into(xs, xs, k1);
        for ((s, &x), &k) in stage.iter_mut().zip(xs.iter()).zip(k1.iter()) {
            *s = x + 0.5 * h * k;
        }
        drift.eval_into(stage, stage, k2);
        for ((s, &x), &k) in stage.iter_mut().zip(xs.iter()).zip(k2.iter()) {
            *s = x + 0.5 * h * k;
        }
        drift.eval_into(stage, stage, k3);
        for ((s, &x), &k) in stage.iter_mut().zip(xs.iter()).zip(k3.iter()) {
            *s = x + h * k;
        }
        drift.eval_into(stage, stage, k4);
        for (idx, x) in xs.iter_mut().enumerate() {
            *x += h / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]);
        }
    }
}

/// Runs one realization, streaming the trajectory into `recorder`. Returns
/// the final state.
pub fn run_finite<R: Recorder>(
    spec: &ModelSpec,
    n: usize,
    horizon: f64,
    doa: &DoaLaw,
    seeds: &SeedTree,
    opts: &FiniteOptions,
    recorder: &mut R,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(invalid(format!(
            "horizon must be finite and nonnegative, got {horizon}"
        )));
    }
    if doa.alpha() != spec.alpha {
        return Err(invalid(format!(
            "collateral law index {} differs from model index {}",
            doa.alpha(),
            spec.alpha
        )));
    }
    if !(opts.drift_substep > 0.0) {
        return Err(invalid("drift substep must be positive"));
    }
    if let Some(map) = &opts.index_map {
        let mut seen = vec![false; n];
        if map.len() != n
            || map
                .iter()
                .any(|&k| k >= n || std::mem::replace(&mut seen[k], true))
        {
            return Err(invalid("index map must be a permutation of 0..N"));
        }
    }
    let mut stops: Vec<f64> = opts
        .stops
        .iter()
        .copied()
        .filter(|&s| s > 0.0 && s < horizon)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut xs = initial_positions(spec, n, seeds, opts.initial_positions.as_deref())?;
    recorder.point(0.0, GridKind::Start, &xs, None);
    if horizon == 0.0 {
        return Ok(xs);
    }

    let f_sup = spec.f_upper();
    let total_rate = n as f64 * f_sup;
    let scale = opts
        .collateral_scale
        .unwrap_or_else(|| (n as f64).powf(-1.0 / spec.alpha));
    let with_main = spec.alpha < 1.0 && !spec.main_jump.is_zero();
    let with_drift = !spec.drift.is_zero();
    let want_pre = recorder.wants_pre_jump();

    let mut streams = Streams::new(seeds);
    let mut rk4 = Rk4::new(n);
    let mut pre = vec![0.0; if want_pre { n } else { 0 }];
    let mut t = 0.0;
    let mut next_candidate = streams.times.sample::<f64, _>(Exp1) / total_rate;
    let mut stop_idx = 0;
    let mut event_idx = 0usize;

    loop {
        let next_stop = stops.get(stop_idx).copied().unwrap_or(horizon);
        let target = next_candidate.min(next_stop);

        if with_drift && target > t {
            let steps = ((target - t) / opts.drift_substep).ceil().max(1.0) as usize;
            let h = (target - t) / steps as f64;
            for s in 1..=steps {
                rk4.step(spec, &mut xs, h);
                if s < steps {
                    recorder.point(t + s as f64 * h, GridKind::Drift, &xs, None);
                }
            }
        }
        t = target;

        if next_candidate <= next_stop {
            let k = streams.index.random_range(0..n);
            let i = opts.index_map.as_ref().map_or(k, |m| m[k]);
            let z: f64 = streams.accept.random();
            let xi = xs[i];
            let accepted = z * f_sup <= spec.rate.eval(xi);
            let rec = if accepted {
                let u = doa.sample(&mut streams.collateral);
                let jump = if with_main {
                    spec.main_jump.eval(xi)
                } else {
                    0.0
                };
                if want_pre {
                    pre.copy_from_slice(&xs);
                }
                let d = u * scale;
                for x in xs.iter_mut() {
                    *x += d;
                }
                // undo the collateral on the firing particle, then apply its own jump
                xs[i] = xi + jump;
                if !d.is_finite() || xs.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFiniteEvent {
                        event: event_idx,
                        time: t,
                        detail: format!("collateral draw u = {u}, particle {i}"),
                    });
                }
                EventRecord {
                    time: t,
                    particle: i,
                    accepted: true,
                    u: Some(u),
                    main_jump: jump,
                }
            } else {
                EventRecord {
                    time: t,
                    particle: i,
                    accepted: false,
                    u: None,
                    main_jump: 0.0,
                }
            };
            let kind = if accepted {
                GridKind::Accepted(event_idx)
            } else {
                GridKind::Rejected(event_idx)
            };
            recorder.point(
                t,
                kind,
                &xs,
                if accepted && want_pre {
                    Some(&pre)
                } else {
                    None
                },
            );
            recorder.event(rec);
            event_idx += 1;
            next_candidate = t + streams.times.sample::<f64, _>(Exp1) / total_rate;
        } else {
            recorder.point(t, GridKind::Drift, &xs, None);
            if stop_idx < stops.len() {
                stop_idx += 1;
            } else {
                break;
            }
        }
    }
    Ok(xs)
}

/// `J^N_T` for the collateral-only model (`b ≡ 0`, `psi ≡ 0`, `f ≡ c`)
/// without materializing positions: every candidate is accepted, so the number
/// of collateral jumps is Poisson(`N c T`).
pub fn collateral_sum_fast(
    n: usize,
    rate: f64,
    horizon: f64,
    doa: &DoaLaw,
    rng: &mut Stream,
) -> Result<f64> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    if !(rate > 0.0) || !(horizon >= 0.0) {
        return Err(invalid("rate must be positive and horizon nonnegative"));
    }
    let lambda = n as f64 * rate * horizon;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let count: f64 = rng.sample(Poisson::new(lambda).map_err(|e| invalid(e.to_string()))?);
    let sum: f64 = (0..count as u64).map(|_| doa.sample(rng)).sum();
    Ok(sum * (n as f64).powf(-1.0 / doa.alpha()))
}
