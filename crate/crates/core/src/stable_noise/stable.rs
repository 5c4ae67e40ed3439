//! Strictly alpha-stable increments.
//!
//! The law is specified by its Lévy measure
//! `a_plus / z^(alpha+1) dz` on `z > 0` and `a_minus / |z|^(alpha+1) dz` on `z < 0`,
//! with no drift when `alpha < 1` and compensated (mean zero) when `alpha > 1`.
//!
//! Integrating the Lévy-Khintchine exponent against this measure gives
//!
//! ```text
//! log E[exp(i u S_1)] = Gamma(-alpha) cos(pi alpha / 2) (a_plus + a_minus) |u|^alpha
//!                       * (1 - i beta sgn(u) tan(pi alpha / 2))
//! ```
//!
//! with `beta = (a_plus - a_minus) / (a_plus + a_minus)`. Since
//! `Gamma(-alpha) cos(pi alpha / 2) < 0` on both `(0,1)` and `(1,2)`, this is the
//! zero-location law `S_alpha(sigma, beta, 0)` with
//!
//! ```text
//! sigma^alpha = -(a_plus + a_minus) Gamma(-alpha) cos(pi alpha / 2)
//! ```
//!
//! which is what the Chambers-Mallows-Stuck transform samples. Over a time
//! step `dt` the increment is `dt^(1/alpha) S_1` by strict stability.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Exp1, Open01};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};

/// Index and Lévy-measure weights of a strictly stable law.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub a_plus: f64,
    pub a_minus: f64,
}

impl StableParams {
    pub fn new(alpha: f64, a_plus: f64, a_minus: f64) -> Result<Self> {
        let p = Self {
            alpha,
            a_plus,
            a_minus,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.a_plus >= 0.0 && self.a_minus >= 0.0) {
            return Err(invalid("Lévy weights must be nonnegative"));
        }
        if !(self.a_plus + self.a_minus > 0.0) || !(self.a_plus + self.a_minus).is_finite() {
            return Err(invalid("Lévy weights must have a positive finite sum"));
        }
        Ok(())
    }

    /// Skewness `beta` in `[-1, 1]`.
    pub fn skewness(&self) -> f64 {
        (self.a_plus - self.a_minus) / (self.a_plus + self.a_minus)
    }

    /// Scale `sigma` of `S_1`.
    pub fn scale(&self) -> f64 {
        let a = self.alpha;
        let s_alpha = -(self.a_plus + self.a_minus) * gamma(-a) * (FRAC_PI_2 * a).cos();
        s_alpha.powf(1.0 / a)
    }

    /// Precomputes the transform constants for repeated draws.
    pub fn sampler(&self) -> Result<StableSampler> {
        self.validate()?;
        Ok(StableSampler::from_params(self))
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid(format!("alpha must lie in (0,2), got {alpha}")));
    }
    if alpha == 1.0 {
        return Err(invalid("alpha = 1 is not supported"));
    }
    Ok(())
}

/// Chambers-Mallows-Stuck sampler with the per-law constants cached.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler {
    alpha: f64,
    sigma: f64,
    shift: f64,
    stretch: f64,
}

impl StableSampler {
    fn from_params(p: &StableParams) -> Self {
        let a = p.alpha;
        let bt = p.skewness() * (FRAC_PI_2 * a).tan();
        Self {
            alpha: a,
            sigma: p.scale(),
            shift: bt.atan() / a,
            stretch: (1.0 + bt * bt).powf(0.5 / a),
        }
    }

    /// One draw of the standardized `S_alpha(1, beta, 0)` variable.
    pub fn standard<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = self.alpha;
        let u: f64 = rng.sample(Open01);
        let v = PI * (u - 0.5);
        let w: f64 = rng.sample(Exp1);
        let arg = a * (v + self.shift);
        let cos_v = v.cos();
        self.stretch * arg.sin() / cos_v.powf(1.0 / a) * ((v - arg).cos() / w).powf((1.0 - a) / a)
    }

    /// One draw of `S_dt`. Zero-length steps return exactly 0 without
    /// consuming randomness.
    pub fn increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
        if dt == 0.0 {
            return 0.0;
        }
        self.sigma * dt.powf(1.0 / self.alpha) * self.standard(rng)
    }
}

/// One sample of the increment `S_dt` of the strictly stable process.
pub fn sample_stable_increment<R: Rng + ?Sized>(
    params: &StableParams,
    dt: f64,
    rng: &mut R,
) -> Result<f64> {
    params.validate()?;
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(invalid(format!(
            "dt must be finite and nonnegative, got {dt}"
        )));
    }
    Ok(StableSampler::from_params(params).increment(dt, rng))
}
