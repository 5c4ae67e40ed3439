//! Pareto-tailed collateral jump laws in the domain of attraction of a
//! strictly stable law with norming `n^(1/alpha)`.

use rand::Rng;
use rand_distr::Open01;

use super::stable::{check_alpha, StableParams};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoaKind {
    SymmetricPareto,
    AsymmetricPareto,
}

/// Signed Pareto law: `|U| >= x0` with `P(|U| > x) = (x / x0)^(-alpha)`,
/// positive with probability `p_plus`, shifted to mean zero when `alpha > 1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DoaLaw {
    kind: DoaKind,
    alpha: f64,
    p_plus: f64,
    x0: f64,
    center_shift: f64,
}

impl DoaLaw {
    pub fn symmetric_pareto(alpha: f64, x0: f64) -> Result<Self> {
        Self::build(DoaKind::SymmetricPareto, alpha, 0.5, x0)
    }

    pub fn asymmetric_pareto(alpha: f64, p_plus: f64, x0: f64) -> Result<Self> {
        Self::build(DoaKind::AsymmetricPareto, alpha, p_plus, x0)
    }

    pub fn new(kind: DoaKind, alpha: f64, p_plus: f64, x0: f64) -> Result<Self> {
        if kind == DoaKind::SymmetricPareto && p_plus != 0.5 {
            return Err(invalid("symmetric Pareto law requires p_plus = 0.5"));
        }
        Self::build(kind, alpha, p_plus, x0)
    }

    fn build(kind: DoaKind, alpha: f64, p_plus: f64, x0: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(0.0..=1.0).contains(&p_plus) {
            return Err(invalid(format!("p_plus must lie in [0,1], got {p_plus}")));
        }
        if !(x0 > 0.0) || !x0.is_finite() {
            return Err(invalid(format!("x0 must be positive, got {x0}")));
        }
        // E|U| = alpha x0 / (alpha - 1) for the Pareto magnitude.
        let center_shift = if alpha > 1.0 {
            (2.0 * p_plus - 1.0) * alpha * x0 / (alpha - 1.0)
        } else {
            0.0
        };
        Ok(Self {
            kind,
            alpha,
            p_plus,
            x0,
            center_shift,
        })
    }

    pub fn kind(&self) -> DoaKind {
        self.kind
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }
    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn center_shift(&self) -> f64 {
        self.center_shift
    }

    /// `P(|U + center_shift| > x)`, exact for `x >= x0`.
    pub fn tail(&self, x: f64) -> f64 {
        if x < self.x0 {
            1.0
        } else {
            (x / self.x0).powf(-self.alpha)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v: f64 = rng.sample(Open01);
        let magnitude = self.x0 * v.powf(-1.0 / self.alpha);
        let positive = rng.random::<f64>() < self.p_plus;
        let signed = if positive { magnitude } else { -magnitude };
        signed - self.center_shift
    }
}

/// One draw `U ~ law`.
pub fn sample_doa<R: Rng + ?Sized>(law: &DoaLaw, rng: &mut R) -> f64 {
    law.sample(rng)
}

/// Stable limit of `n^(-1/alpha) (U_1 + ... + U_n)`:
/// `a_plus = p_plus alpha x0^alpha`, `a_minus = (1 - p_plus) alpha x0^alpha`.
pub fn stable_target_of(law: &DoaLaw) -> StableParams {
    let w = law.alpha * law.x0.powf(law.alpha);
    StableParams {
        alpha: law.alpha,
        a_plus: law.p_plus * w,
        a_minus: (1.0 - law.p_plus) * w,
    }
}
