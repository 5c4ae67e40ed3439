//! Exact event-driven simulation of the N-particle system with simultaneous
//! heavy-tailed jumps, and accessors for its time change and path
//! decomposition.

mod decomposition;
mod engine;
mod time_change;

pub use decomposition::{decompose_trajectory, Decomposition};
pub use engine::{collateral_sum_fast, run_finite, FiniteOptions, GridKind, Recorder};
pub use time_change::{cumulated_intensity, transformed_event_times, TimeChange};

use crate::error::{invalid, Result};
use crate::model::ModelSpec;
use crate::stable_noise::{DoaLaw, SeedTree};

/// One candidate clock ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub particle: usize,
    pub accepted: bool,
    /// Collateral draw, present iff accepted.
    pub u: Option<f64>,
    /// Displacement of the firing particle (0 when there are no main jumps).
    pub main_jump: f64,
}

/// All particle paths on the simulation grid, plus the event log.
///
/// States are stored post-jump. For each accepted event the left limit is
/// kept as well, so every quantity that integrates along the path can be
/// evaluated with the predictable (left-limit) convention.
#[derive(Debug, Clone)]
pub struct TrajectoryBundle {
    pub spec: ModelSpec,
    pub n: usize,
    pub horizon: f64,
    /// Collateral displacement per unit of `u` (normally `N^(-1/alpha)`).
    pub collateral_scale: f64,
    times: Vec<f64>,
    kinds: Vec<GridKind>,
    states: Vec<f64>,
    pre_jump: Vec<f64>,
    /// Grid index of each accepted event, in event order.
    accepted_at: Vec<usize>,
    events: Vec<EventRecord>,
}

impl TrajectoryBundle {
    pub fn grid(&self) -> &[f64] {
        &self.times
    }

    pub fn kinds(&self) -> &[GridKind] {
        &self.kinds
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn accepted_events(&self) -> impl Iterator<Item = &EventRecord> {
        self.events.iter().filter(|e| e.accepted)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Post-jump positions at grid point `k`.
    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.n..(k + 1) * self.n]
    }

    /// Left limit of the positions at grid point `k`.
    pub fn left_limit(&self, k: usize) -> &[f64] {
        match self.kinds[k] {
            GridKind::Accepted(_) => {
                let slot = self
                    .accepted_at
                    .binary_search(&k)
                    .expect("accepted grid index");
                &self.pre_jump[slot * self.n..(slot + 1) * self.n]
            }
            _ => self.state(k),
        }
    }

    /// Positions at the last grid point not after `t`.
    pub fn state_at(&self, t: f64) -> &[f64] {
        let k = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        self.state(k)
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Path of one particle on the grid.
    pub fn path(&self, i: usize) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.states[k * self.n + i])
            .collect()
    }

    /// Rebuilds a bundle from a given event log for a drift-free model, with
    /// a grid made of `0`, the event times and `horizon`.
    pub fn replay(
        spec: &ModelSpec,
        initial: Vec<f64>,
        horizon: f64,
        events: Vec<EventRecord>,
    ) -> Result<Self> {
        spec.validate()?;
        if !spec.drift.is_zero() {
            return Err(invalid("replay requires a drift-free model"));
        }
        let n = initial.len();
        if n == 0 {
            return Err(invalid("N must be at least 1"));
        }
        let mut last = 0.0;
        for ev in &events {
            if !(ev.time > last) || ev.time > horizon || ev.particle >= n {
                return Err(invalid(
                    "events must have increasing times in (0, horizon] and valid particles",
                ));
            }
            if ev.accepted != ev.u.is_some() {
                return Err(invalid("accepted events carry exactly one collateral draw"));
            }
            last = ev.time;
        }
        let scale = (n as f64).powf(-1.0 / spec.alpha);
        let mut rec = BundleRecorder::default();
        let mut xs = initial;
        rec.point(0.0, GridKind::Start, &xs, None);
        for (idx, ev) in events.iter().enumerate() {
            if let Some(u) = ev.u {
                let pre = xs.clone();
                let xi = xs[ev.particle];
                for x in xs.iter_mut() {
                    *x += u * scale;
                }
                xs[ev.particle] = xi + ev.main_jump;
                rec.point(ev.time, GridKind::Accepted(idx), &xs, Some(&pre));
            } else {
                rec.point(ev.time, GridKind::Rejected(idx), &xs, None);
            }
            rec.event(*ev);
        }
        if horizon > last {
            rec.point(horizon, GridKind::Drift, &xs, None);
        }
        Ok(Self {
            spec: *spec,
            n,
            horizon,
            collateral_scale: scale,
            times: rec.times,
            kinds: rec.kinds,
            states: rec.states,
            pre_jump: rec.pre_jump,
            accepted_at: rec.accepted_at,
            events: rec.events,
        })
    }
}

#[derive(Default)]
struct BundleRecorder {
    times: Vec<f64>,
    kinds: Vec<GridKind>,
    states: Vec<f64>,
    pre_jump: Vec<f64>,
    accepted_at: Vec<usize>,
    events: Vec<EventRecord>,
}

impl Recorder for BundleRecorder {
    fn point(&mut self, t: f64, kind: GridKind, xs: &[f64], pre_jump: Option<&[f64]>) {
        if let Some(pre) = pre_jump {
            self.accepted_at.push(self.times.len());
            self.pre_jump.extend_from_slice(pre);
        }
        self.times.push(t);
        self.kinds.push(kind);
        self.states.extend_from_slice(xs);
    }

    fn event(&mut self, rec: EventRecord) {
        self.events.push(rec);
    }

    fn wants_pre_jump(&self) -> bool {
        true
    }
}

/// Simulates the N-particle system on `[0, horizon]` and records everything.
pub fn simulate_finite(
    spec: &ModelSpec,
    n: usize,
    horizon: f64,
    doa: &DoaLaw,
    seeds: &SeedTree,
) -> Result<TrajectoryBundle> {
    simulate_finite_with(spec, n, horizon, doa, seeds, &FiniteOptions::default())
}

pub fn simulate_finite_with(
    spec: &ModelSpec,
    n: usize,
    horizon: f64,
    doa: &DoaLaw,
    seeds: &SeedTree,
    opts: &FiniteOptions,
) -> Result<TrajectoryBundle> {
    let mut rec = BundleRecorder::default();
    run_finite(spec, n, horizon, doa, seeds, opts, &mut rec)?;
    let collateral_scale = opts
        .collateral_scale
        .unwrap_or_else(|| (n as f64).powf(-1.0 / spec.alpha));
    Ok(TrajectoryBundle {
        spec: *spec,
        n,
        horizon,
        collateral_scale,
        times: rec.times,
        kinds: rec.kinds,
        states: rec.states,
        pre_jump: rec.pre_jump,
        accepted_at: rec.accepted_at,
        events: rec.events,
    })
}

/// Records the state only at requested times.
pub struct SnapshotRecorder {
    times: Vec<f64>,
    next: usize,
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

impl SnapshotRecorder {
    pub fn new(mut times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(invalid("snapshot times must be finite and nonnegative"));
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        Ok(Self {
            times,
            next: 0,
            snapshots: Vec::new(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

impl Recorder for SnapshotRecorder {
    fn point(&mut self, t: f64, kind: GridKind, xs: &[f64], _pre: Option<&[f64]>) {
        // Requested times are grid stops, so they arrive as drift points (or as
        // the start point for t = 0).
        if matches!(kind, GridKind::Drift | GridKind::Start) {
            while self.next < self.times.len() && self.times[self.next] <= t {
                if self.times[self.next] == t {
                    self.snapshots.push((t, xs.to_vec()));
                }
                self.next += 1;
            }
        }
    }

    fn event(&mut self, _rec: EventRecord) {}
}

/// Positions at each requested time (which must not exceed `horizon`).
pub fn snapshots_finite(
    spec: &ModelSpec,
    n: usize,
    horizon: f64,
    doa: &DoaLaw,
    seeds: &SeedTree,
    times: &[f64],
    opts: &FiniteOptions,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if times.iter().any(|&t| t > horizon) {
        return Err(invalid("snapshot time beyond horizon"));
    }
    let mut rec = SnapshotRecorder::new(times.to_vec())?;
    let mut opts = opts.clone();
    opts.stops.extend_from_slice(rec.times());
    run_finite(spec, n, horizon, doa, seeds, &opts, &mut rec)?;
    Ok(rec.snapshots)
}

#[cfg(test)]
mod tests;
