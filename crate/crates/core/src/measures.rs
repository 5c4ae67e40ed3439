//! Empirical measures on the line and the distances used to compare them.

use crate::error::{Error, Result};

/// Largest atom count for which [`wasserstein_dq`] will search all couplings.
pub const EXACT_DQ_MAX_ATOMS: usize = 10;

/// Uniformly weighted atoms. Non-empty, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite atom {v}")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Equal-size surrogate with `n` atoms: the order statistics at the
    /// mid-quantiles `(k + 1/2) / n`. For `n == len` this is the sample itself.
    pub fn quantile_resample(&self, n: usize) -> Result<Sample> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let sorted = self.sorted();
        let len = sorted.len();
        let values = (0..n)
            .map(|k| {
                let pos = ((k as f64 + 0.5) * len as f64 / n as f64).floor() as usize;
                sorted[pos.min(len - 1)]
            })
            .collect();
        Ok(Sample { values })
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Sample::new(v)
    }
}

fn same_size(a: &Sample, b: &Sample) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// W1 between two equal-size empirical measures via the sorted coupling.
pub fn wasserstein1_1d(a: &Sample, b: &Sample) -> Result<f64> {
    same_size(a, b)?;
    let (x, y) = (a.sorted(), b.sorted());
    Ok(x.iter().zip(&y).map(|(p, q)| (p - q).abs()).sum::<f64>() / x.len() as f64)
}

/// `|x - y| ∧ |x - y|^q`.
pub fn d_q(x: f64, y: f64, q: f64) -> f64 {
    let d = (x - y).abs();
    d.min(d.powf(q))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqDistance {
    /// Cost of the monotone coupling. An upper bound on `W_{d_q}`.
    pub bound: f64,
    /// Optimal assignment cost, when it was computed.
    pub exact: Option<f64>,
}

/// `W_{d_q}` between equal-size empirical measures.
///
/// The monotone coupling is not optimal for concave costs, so `bound` is only
/// an upper bound. With `exact = true` the optimum over all permutations is
/// found by depth-first search, which is limited to
/// [`EXACT_DQ_MAX_ATOMS`] atoms.
pub fn wasserstein_dq(a: &Sample, b: &Sample, q: f64, exact: bool) -> Result<DqDistance> {
    same_size(a, b)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q must lie in (0,1), got {q}"
        )));
    }
    let (x, y) = (a.sorted(), b.sorted());
    let n = x.len();
    let bound = x.iter().zip(&y).map(|(p, r)| d_q(*p, *r, q)).sum::<f64>() / n as f64;
    let exact = if exact {
        if n > EXACT_DQ_MAX_ATOMS {
            return Err(Error::ExactTooLarge(n));
        }
        let cost: Vec<Vec<f64>> = x
            .iter()
            .map(|p| y.iter().map(|r| d_q(*p, *r, q)).collect())
            .collect();
        let mut best = bound * n as f64;
        let mut used = vec![false; n];
        assign(&cost, 0, 0.0, &mut used, &mut best);
        Some((best / n as f64).min(bound))
    } else {
        None
    };
    Ok(DqDistance { bound, exact })
}

fn assign(cost: &[Vec<f64>], row: usize, acc: f64, used: &mut [bool], best: &mut f64) {
    if acc >= *best {
        return;
    }
    if row == cost.len() {
        *best = acc;
        return;
    }
    for col in 0..cost.len() {
        if !used[col] {
            used[col] = true;
            assign(cost, row + 1, acc + cost[row][col], used, best);
            used[col] = false;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub stat: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p(stat: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * stat)
}

/// Two-sample Kolmogorov-Smirnov statistic with its asymptotic p-value.
pub fn ks_two_sample(a: &Sample, b: &Sample) -> KsResult {
    let (x, y) = (a.sorted(), b.sorted());
    let stat = ks_sorted(&x, &y);
    let (n, m) = (x.len() as f64, y.len() as f64);
    KsResult {
        stat,
        p_value: ks_p(stat, n * m / (n + m)),
    }
}

fn ks_sorted(x: &[f64], y: &[f64]) -> f64 {
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut stat: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        stat = stat.max((i as f64 / n - j as f64 / m).abs());
    }
    stat
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_one_sample(a: &Sample, cdf: impl Fn(f64) -> f64) -> KsResult {
    let x = a.sorted();
    let n = x.len() as f64;
    let stat = x.iter().enumerate().fold(0.0f64, |acc, (k, &v)| {
        let f = cdf(v);
        acc.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n)
    });
    KsResult {
        stat,
        p_value: ks_p(stat, n),
    }
}

/// `mu(g)` for the empirical measure `mu` of `sample`.
pub fn empirical_apply(sample: &Sample, g: impl Fn(f64) -> f64) -> f64 {
    sample.values.iter().map(|&v| g(v)).sum::<f64>() / sample.len() as f64
}

/// Mean of bounded terms that does not depend on the order of summation.
///
/// Each term is rounded onto a fixed grid of spacing `2^-64` and accumulated
/// as an integer, so any permutation of the input yields a bit-identical
/// result. Terms must satisfy `|v| < 2^40`.
pub fn order_free_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    const SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64
    let mut acc: i128 = 0;
    let mut n: u64 = 0;
    for v in values {
        acc += (v * SCALE).round() as i128;
        n += 1;
    }
    if n == 0 {
        return f64::NAN;
    }
    (acc as f64 / SCALE) / n as f64
}
