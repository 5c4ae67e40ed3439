//! Experiment configuration, read from a TOML file.
//!
//! ```toml
//! experiment = "chaos_sweep"
//! root_seed = 7
//!
//! [model]
//! alpha = 0.5
//! drift = { kind = "tanh_to_mean", beta = 0.5 }
//! main_jump = { kind = "tanh_restoring", kappa = 0.3 }
//! rate = { kind = "sigmoid", c0 = 1.0, c1 = 1.0 }
//! initial = { kind = "uniform", lo = -1.0, hi = 1.0 }
//!
//! [doa]
//! kind = "symmetric_pareto"
//! x0 = 1.0
//!
//! [finite]
//! n_grid = [16, 64, 256, 1024]
//! horizon = 1.0
//! replicas = 200
//! output_times = [1.0]
//!
//! [limit]
//! m = 2000
//! step = 0.001
//! ```
//!
//! Every field except `experiment` and `model` has a default; see the
//! `Default` impls below.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::stable_noise::{stable_target_of, DoaKind, DoaLaw, StableParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    StableClt,
    TimeChangePoisson,
    CollateralLimit,
    ChaosSweep,
    CommonNoise,
    LimitSelfcheck,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::StableClt => "stable_clt",
            Experiment::TimeChangePoisson => "time_change_poisson",
            Experiment::CollateralLimit => "collateral_limit",
            Experiment::ChaosSweep => "chaos_sweep",
            Experiment::CommonNoise => "common_noise",
            Experiment::LimitSelfcheck => "limit_selfcheck",
        }
    }
}

/// Collateral law; its index is taken from the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoaConfig {
    pub kind: DoaKind,
    pub p_plus: f64,
    pub x0: f64,
}

impl Default for DoaConfig {
    fn default() -> Self {
        Self {
            kind: DoaKind::SymmetricPareto,
            p_plus: 0.5,
            x0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiniteConfig {
    /// Particle counts; increasing.
    pub n_grid: Vec<usize>,
    pub horizon: f64,
    pub replicas: usize,
    pub output_times: Vec<f64>,
    pub drift_substep: f64,
    /// Switches collateral jumps off (common-noise control run).
    pub collateral_off: bool,
}

impl Default for FiniteConfig {
    fn default() -> Self {
        Self {
            n_grid: vec![16, 64, 256, 1024],
            horizon: 1.0,
            replicas: 200,
            output_times: vec![1.0],
            drift_substep: 1e-2,
            collateral_off: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitConfig {
    /// Particles approximating the directing measure.
    pub m: usize,
    pub step: f64,
    /// Independent stable paths in the pooled limit reference.
    pub reference_replicas: usize,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            m: 2000,
            step: 1e-3,
            reference_replicas: 2000,
        }
    }
}

/// Pass/fail thresholds, fixed before any run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Largest acceptable two-sample KS statistic (stable_clt, collateral_limit).
    pub ks_stat: f64,
    /// Slack allowed when checking that a statistic does not increase with N.
    pub trend_slack: f64,
    /// Replica-level KS p-value cutoff (time_change_poisson).
    pub ks_p: f64,
    /// Required fraction of replicas above `ks_p`.
    pub pass_fraction: f64,
    /// Required ratio of finite to limit variance at the largest N (common_noise).
    pub variance_ratio: f64,
    /// Self-check bounds on W1 between paired limit runs. The defaults are
    /// about 3x the largest value seen over seeds 1-3 of
    /// `configs/limit_selfcheck.toml`, where the (h, h/2) W1 was 2.64, 0.69,
    /// 0.081 and the (M, 2M) W1 was 203, 5.7, 4.8.
    pub selfcheck_w1_step: f64,
    pub selfcheck_w1_particles: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ks_stat: 0.05,
            trend_slack: 0.01,
            ks_p: 0.01,
            pass_fraction: 0.95,
            variance_ratio: 0.5,
            selfcheck_w1_step: 8.0,
            selfcheck_w1_particles: 600.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: ModelSpec,
    #[serde(default)]
    pub doa: DoaConfig,
    #[serde(default)]
    pub finite: FiniteConfig,
    #[serde(default)]
    pub limit: LimitConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default = "default_out")]
    pub out_path: String,
}

fn default_out() -> String {
    "out".into()
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, model: ModelSpec) -> Self {
        Self {
            experiment,
            model,
            doa: DoaConfig::default(),
            finite: FiniteConfig::default(),
            limit: LimitConfig::default(),
            thresholds: Thresholds::default(),
            root_seed: 0,
            out_path: default_out(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn doa_law(&self) -> Result<DoaLaw> {
        DoaLaw::new(
            self.doa.kind,
            self.model.alpha,
            self.doa.p_plus,
            self.doa.x0,
        )
        .map_err(|e| config_err(e.to_string()))
    }

    pub fn stable_params(&self) -> Result<StableParams> {
        Ok(stable_target_of(&self.doa_law()?))
    }

    pub fn validate(&self) -> Result<()> {
        self.model
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        self.doa_law()?;
        let f = &self.finite;
        if f.n_grid.is_empty() || f.n_grid.contains(&0) {
            return Err(config_err("n_grid must be non-empty with positive entries"));
        }
        if self.experiment == Experiment::ChaosSweep && f.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("n_grid must be increasing for chaos_sweep"));
        }
        if f.replicas == 0 || self.limit.reference_replicas == 0 {
            return Err(config_err("replicas must be at least 1"));
        }
        if !(f.horizon > 0.0) || !f.horizon.is_finite() {
            return Err(config_err("horizon must be positive"));
        }
        if f.output_times
            .iter()
            .any(|&t| !(0.0..=f.horizon).contains(&t))
        {
            return Err(config_err("output times must lie in [0, horizon]"));
        }
        if !(f.drift_substep > 0.0) {
            return Err(config_err("drift_substep must be positive"));
        }
        if self.limit.m == 0 {
            return Err(config_err("M must be at least 1"));
        }
        if !(self.limit.step > 0.0) || self.limit.step >= f.horizon {
            return Err(config_err("limit step must lie in (0, horizon)"));
        }
        Ok(())
    }
}
