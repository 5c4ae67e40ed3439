//! Coefficient families for the drift `b`, main jump `psi`, jump rate `f`
//! and initial law. Every family is bounded and Lipschitz; the bounds and
//! Lipschitz constants are derived from the parameters.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measures::order_free_mean;
use crate::stable_noise::Stream;

/// `tanh` through one `exp`, with absolute error below `1e-15` and values in
/// `[-1, 1]`.
#[inline]
pub fn tanh(x: f64) -> f64 {
    let a = x.abs();
    let t = if a > 20.0 {
        1.0
    } else {
        1.0 - 2.0 / ((2.0 * a).exp() + 1.0)
    };
    t.copysign(x)
}

/// Drift `b(x, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drift {
    Zero,
    Constant {
        c: f64,
    },
    /// `beta * tanh(m(tanh) - x)`: relaxation toward a bounded mean statistic.
    TanhToMean {
        beta: f64,
    },
    /// `∫ B(x - y) m(dy)`; costs O(N^2) per evaluation.
    Convolution {
        kernel: Kernel,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Kernel {
    /// `B(z) = beta * tanh(z / width)`
    ScaledTanh { beta: f64, width: f64 },
    /// `B(z) = beta * exp(-z^2 / (2 width^2))`
    GaussianBump { beta: f64, width: f64 },
}

impl Kernel {
    fn eval(&self, z: f64) -> f64 {
        match *self {
            Kernel::ScaledTanh { beta, width } => beta * tanh(z / width),
            Kernel::GaussianBump { beta, width } => beta * (-0.5 * (z / width).powi(2)).exp(),
        }
    }

    fn width(&self) -> f64 {
        match *self {
            Kernel::ScaledTanh { width, .. } | Kernel::GaussianBump { width, .. } => width,
        }
    }

    fn beta(&self) -> f64 {
        match *self {
            Kernel::ScaledTanh { beta, .. } | Kernel::GaussianBump { beta, .. } => beta,
        }
    }

    fn lipschitz(&self) -> f64 {
        match *self {
            Kernel::ScaledTanh { beta, width } => beta.abs() / width,
            // max |d/dz exp(-z^2/2w^2)| = exp(-1/2) / w
            Kernel::GaussianBump { beta, width } => beta.abs() * (-0.5f64).exp() / width,
        }
    }
}

/// Cost of evaluating the drift for all particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostClass {
    Free,
    Linear,
    Quadratic,
}

impl Drift {
    pub fn is_zero(&self) -> bool {
        matches!(self, Drift::Zero)
    }

    pub fn cost_class(&self) -> CostClass {
        match self {
            Drift::Zero => CostClass::Free,
            Drift::Constant { .. } | Drift::TanhToMean { .. } => CostClass::Linear,
            Drift::Convolution { .. } => CostClass::Quadratic,
        }
    }

    pub fn bound(&self) -> f64 {
        match *self {
            Drift::Zero => 0.0,
            Drift::Constant { c } => c.abs(),
            Drift::TanhToMean { beta } => beta.abs(),
            Drift::Convolution { kernel } => kernel.beta().abs(),
        }
    }

    /// Lipschitz constant in `(x, W1)`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Drift::Zero | Drift::Constant { .. } => 0.0,
            Drift::TanhToMean { beta } => beta.abs(),
            Drift::Convolution { kernel } => kernel.lipschitz(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Drift::Zero => true,
            Drift::Constant { c } => c.is_finite(),
            Drift::TanhToMean { beta } => beta.is_finite(),
            Drift::Convolution { kernel } => {
                kernel.beta().is_finite() && kernel.width() > 0.0 && kernel.width().is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid drift {self:?}")))
        }
    }

    /// `out[k] = b(points[k], m)` where `m` is the empirical measure of `measure`.
    pub fn eval_into(&self, points: &[f64], measure: &[f64], out: &mut [f64]) {
        self.frozen(measure).eval_into(points, out);
    }

    /// The drift with its measure argument fixed; statistics of `measure`
    /// are computed once here.
    pub fn frozen<'a>(&self, measure: &'a [f64]) -> FrozenDrift<'a> {
        match *self {
            Drift::Zero => FrozenDrift::Constant(0.0),
            Drift::Constant { c } => FrozenDrift::Constant(c),
            Drift::TanhToMean { beta } => FrozenDrift::TanhToMean {
                beta,
                m: order_free_mean(measure.iter().map(|&y| tanh(y))),
            },
            Drift::Convolution { kernel } => FrozenDrift::Convolution { kernel, measure },
        }
    }
}

/// See [`Drift::frozen`].
#[derive(Debug, Clone, Copy)]
pub enum FrozenDrift<'a> {
    Constant(f64),
    TanhToMean { beta: f64, m: f64 },
    Convolution { kernel: Kernel, measure: &'a [f64] },
}

impl FrozenDrift<'_> {
    pub fn eval_into(&self, points: &[f64], out: &mut [f64]) {
        debug_assert_eq!(points.len(), out.len());
        match *self {
            FrozenDrift::Constant(c) => out.fill(c),
            FrozenDrift::TanhToMean { beta, m } => {
                for (o, &x) in out.iter_mut().zip(points) {
                    *o = beta * tanh(m - x);
                }
            }
            FrozenDrift::Convolution { kernel, measure } => {
                for (o, &x) in out.iter_mut().zip(points) {
                    *o = order_free_mean(measure.iter().map(|&y| kernel.eval(x - y)));
                }
            }
        }
    }
}

/// Main jump `psi(x, m)`. The supported families do not depend on `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MainJump {
    Zero,
    Constant {
        delta: f64,
    },
    /// `-kappa * tanh(x)`
    TanhRestoring {
        kappa: f64,
    },
}

impl MainJump {
    pub fn is_zero(&self) -> bool {
        matches!(self, MainJump::Zero)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            MainJump::Zero => 0.0,
            MainJump::Constant { delta } => delta,
            MainJump::TanhRestoring { kappa } => -kappa * tanh(x),
        }
    }

    pub fn bound(&self) -> f64 {
        match *self {
            MainJump::Zero => 0.0,
            MainJump::Constant { delta } => delta.abs(),
            MainJump::TanhRestoring { kappa } => kappa.abs(),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            MainJump::TanhRestoring { kappa } => kappa.abs(),
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.bound().is_finite() {
            Ok(())
        } else {
            Err(invalid(format!("invalid main jump {self:?}")))
        }
    }
}

/// Jump rate `f(x)`, bounded below by a positive constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rate {
    Constant {
        c: f64,
    },
    /// `c0 + c1 * (1 + tanh(x)) / 2`
    Sigmoid {
        c0: f64,
        c1: f64,
    },
}

impl Rate {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Rate::Constant { c } => c,
            Rate::Sigmoid { c0, c1 } => c0 + c1 * 0.5 * (1.0 + tanh(x)),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Rate::Constant { .. })
    }

    pub fn lower(&self) -> f64 {
        match *self {
            Rate::Constant { c } => c,
            Rate::Sigmoid { c0, c1 } => c0 + c1.min(0.0),
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            Rate::Constant { c } => c,
            Rate::Sigmoid { c0, c1 } => c0 + c1.max(0.0),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            Rate::Constant { .. } => 0.0,
            Rate::Sigmoid { c1, .. } => 0.5 * c1.abs(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.lower(), self.upper());
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(invalid(format!(
                "rate must be bounded below by a positive constant and above, got [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Initial law `nu_0`. All families have bounded support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialLaw {
    PointMass {
        x: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `center + spread * (U_1 + ... + U_12 - 6)`: bell-shaped, variance
    /// `spread^2`, support `center ± 6 spread`.
    IrwinHall {
        center: f64,
        spread: f64,
    },
}

impl InitialLaw {
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        match *self {
            InitialLaw::PointMass { x } => x,
            InitialLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            InitialLaw::IrwinHall { center, spread } => {
                let s: f64 = (0..12).map(|_| rng.random::<f64>()).sum();
                center + spread * (s - 6.0)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            InitialLaw::PointMass { x } => x.is_finite(),
            InitialLaw::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
            InitialLaw::IrwinHall { center, spread } => {
                center.is_finite() && spread.is_finite() && spread >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid initial law {self:?}")))
        }
    }
}

/// The coefficient triple `(b, psi, f)` with the index `alpha` and the
/// initial law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub alpha: f64,
    pub drift: Drift,
    pub main_jump: MainJump,
    pub rate: Rate,
    pub initial: InitialLaw,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        crate::stable_noise::StableParams::new(self.alpha, 1.0, 0.0)?;
        self.drift.validate()?;
        self.main_jump.validate()?;
        self.rate.validate()?;
        self.initial.validate()?;
        if self.alpha > 1.0 && !self.main_jump.is_zero() {
            return Err(invalid("main jumps must vanish when alpha > 1"));
        }
        Ok(())
    }

    pub fn f_lower(&self) -> f64 {
        self.rate.lower()
    }

    pub fn f_upper(&self) -> f64 {
        self.rate.upper()
    }

    /// `b ≡ 0`, `psi ≡ 0`, `f ≡ c`: only the collateral sum moves the particles.
    pub fn is_collateral_only(&self) -> bool {
        self.drift.is_zero() && self.main_jump.is_zero() && self.rate.is_constant()
    }

    /// Mean of `f` under the empirical measure of `xs`.
    pub fn mean_rate(&self, xs: &[f64]) -> f64 {
        match self.rate {
            Rate::Constant { c } => c,
            rate => order_free_mean(xs.iter().map(|&x| rate.eval(x))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable_noise::SeedTree;

    #[test]
    fn tanh_matches_std() {
        for k in -40_000..=40_000 {
            let x = k as f64 * 1e-3;
            let t = tanh(x);
            assert!((t - x.tanh()).abs() < 1e-15, "{x}");
            assert!(t.abs() <= 1.0);
        }
        assert_eq!(tanh(0.0), 0.0);
        assert_eq!(tanh(1e300), 1.0);
        assert_eq!(tanh(-1e300), -1.0);
        assert!(tanh(f64::NAN).is_nan());
    }

    fn full(alpha: f64) -> ModelSpec {
        ModelSpec {
            alpha,
            drift: Drift::TanhToMean { beta: 0.5 },
            main_jump: MainJump::TanhRestoring { kappa: 0.3 },
            rate: Rate::Sigmoid { c0: 1.0, c1: 1.0 },
            initial: InitialLaw::Uniform { lo: -1.0, hi: 1.0 },
        }
    }

    #[test]
    fn rate_bounds_hold_on_sampled_points() {
        let rate = Rate::Sigmoid { c0: 1.0, c1: 1.0 };
        assert_eq!((rate.lower(), rate.upper()), (1.0, 2.0));
        let mut s = SeedTree::new(1).stream("f", 0);
        for _ in 0..10_000 {
            let x = (s.random::<f64>() - 0.5) * 200.0;
            let f = rate.eval(x);
            assert!((rate.lower()..=rate.upper()).contains(&f));
        }
        let neg = Rate::Sigmoid { c0: 2.0, c1: -1.5 };
        assert_eq!((neg.lower(), neg.upper()), (0.5, 2.0));
    }

    #[test]
    fn main_jumps_forbidden_above_one() {
        assert!(full(0.5).validate().is_ok());
        assert!(full(1.5).validate().is_err());
        let mut spec = full(1.5);
        spec.main_jump = MainJump::Zero;
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn rejects_nonpositive_rate() {
        let mut spec = full(0.5);
        spec.rate = Rate::Sigmoid { c0: 0.0, c1: 1.0 };
        assert!(spec.validate().is_err());
        spec.rate = Rate::Constant { c: -1.0 };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn drift_bounded_and_convolution_matches_direct() {
        let xs = [-3.0, 0.5, 1.0, 40.0];
        let mut out = [0.0; 4];
        let d = Drift::Convolution {
            kernel: Kernel::GaussianBump {
                beta: 2.0,
                width: 0.5,
            },
        };
        d.eval_into(&xs, &xs, &mut out);
        for (k, &x) in xs.iter().enumerate() {
            let direct: f64 = xs
                .iter()
                .map(|y| 2.0 * (-0.5 * ((x - y) / 0.5f64).powi(2)).exp())
                .sum::<f64>()
                / 4.0;
            assert!((out[k] - direct).abs() < 1e-15);
            assert!(out[k].abs() <= d.bound());
        }
        let d = Drift::TanhToMean { beta: 0.5 };
        d.eval_into(&xs, &xs, &mut out);
        assert!(out.iter().all(|b| b.abs() <= 0.5));
    }

    #[test]
    fn spec_roundtrips_through_toml() {
        let spec = full(0.5);
        let text = toml::to_string(&spec).unwrap();
        let back: ModelSpec = toml::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn initial_laws_respect_support() {
        let mut s = SeedTree::new(2).stream("init", 0);
        let ih = InitialLaw::IrwinHall {
            center: 1.0,
            spread: 0.5,
        };
        let u = InitialLaw::Uniform { lo: -2.0, hi: -1.0 };
        for _ in 0..1000 {
            let x = ih.sample(&mut s);
            assert!((x - 1.0).abs() <= 3.0);
            assert!((-2.0..=-1.0).contains(&u.sample(&mut s)));
        }
        assert_eq!(InitialLaw::PointMass { x: 0.25 }.sample(&mut s), 0.25);
    }
}
