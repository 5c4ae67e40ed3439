use super::{GridKind, TrajectoryBundle};
use crate::model::Rate;

/// Cumulated jump intensity `A(t) = ∫_0^t mu_s(f) ds` on the bundle grid,
/// linear between knots.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChange {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeChange {
    /// `A(t)` by linear interpolation, constant beyond the last knot.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.knots.partition_point(|&s| s <= t);
        if k == 0 {
            return 0.0;
        }
        if k == self.knots.len() {
            return *self.values.last().unwrap();
        }
        let (t0, t1) = (self.knots[k - 1], self.knots[k]);
        let (a0, a1) = (self.values[k - 1], self.values[k]);
        a0 + (a1 - a0) * (t - t0) / (t1 - t0)
    }

    /// Generalized inverse `inf { t : A(t) >= a }`.
    pub fn inverse(&self, a: f64) -> Option<f64> {
        if a <= 0.0 {
            return Some(0.0);
        }
        let k = self.values.partition_point(|&v| v < a);
        if k == self.values.len() {
            return None;
        }
        let (t0, t1) = (self.knots[k - 1], self.knots[k]);
        let (a0, a1) = (self.values[k - 1], self.values[k]);
        Some(t0 + (t1 - t0) * (a - a0) / (a1 - a0))
    }

    /// Largest violation of `lo (t - s) <= A(t) - A(s) <= hi (t - s)` over all
    /// knot pairs `s < t`, in `O(knots)`. Zero or negative when the bounds
    /// hold.
    pub fn bound_violation(&self, lo: f64, hi: f64) -> f64 {
        // With D = A - c t, the bound for c = lo is D(t) >= D(s) for s < t,
        // and for c = hi it is D(t) <= D(s).
        let mut worst = f64::NEG_INFINITY;
        let mut max_lo = f64::NEG_INFINITY;
        let mut min_hi = f64::INFINITY;
        for (&t, &a) in self.knots.iter().zip(&self.values) {
            let d_lo = a - lo * t;
            let d_hi = a - hi * t;
            worst = worst.max(max_lo - d_lo).max(d_hi - min_hi);
            max_lo = max_lo.max(d_lo);
            min_hi = min_hi.min(d_hi);
        }
        worst
    }
}

/// `A(t) = ∫_0^t mu^N_s(f) ds` by the trapezoid rule along the grid, using the
/// left limit at the right end of each segment. A constant rate integrates
/// exactly to `c t`.
pub fn cumulated_intensity(bundle: &TrajectoryBundle) -> TimeChange {
    let knots = bundle.grid().to_vec();
    let spec = &bundle.spec;
    let values = match spec.rate {
        Rate::Constant { c } => knots.iter().map(|&t| c * t).collect(),
        _ => {
            let mut values = Vec::with_capacity(knots.len());
            let mut acc = 0.0;
            values.push(0.0);
            let mut right = spec.mean_rate(bundle.state(0));
            for k in 1..knots.len() {
                let left_end = spec.mean_rate(bundle.left_limit(k));
                acc += 0.5 * (right + left_end) * (knots[k] - knots[k - 1]);
                values.push(acc);
                right = match bundle.kinds()[k] {
                    GridKind::Accepted(_) => spec.mean_rate(bundle.state(k)),
                    _ => left_end,
                };
            }
            values
        }
    };
    TimeChange { knots, values }
}

/// `s_k = N A(t_k)` for the accepted event times `t_k`. Under the model these
/// are the arrival times of a unit-rate Poisson process.
pub fn transformed_event_times(bundle: &TrajectoryBundle) -> Vec<f64> {
    let tc = cumulated_intensity(bundle);
    let n = bundle.n as f64;
    bundle
        .kinds()
        .iter()
        .enumerate()
        .filter(|(_, kind)| matches!(kind, GridKind::Accepted(_)))
        .map(|(k, _)| n * tc.values[k])
        .collect()
}
