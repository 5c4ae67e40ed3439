//! Experiment configuration, the experiment catalog and CSV output.
//!
//! The chaos sweep compares pooled marginals. Its limit reference reads one
//! particle per independently drawn stable path, which samples the marginal
//! law of a limit particle.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

pub use config::{DoaConfig, Experiment, ExperimentConfig, FiniteConfig, LimitConfig, Thresholds};
pub use experiments::{
    common_noise_test_function, limit_reference, run_chaos_sweep, run_collateral_limit,
    run_common_noise, run_limit_selfcheck, run_stable_clt, run_time_change_poisson, ChaosSweepRow,
    CollateralLimitRow, CommonNoiseRow, CommonNoiseSummary, SelfcheckRow, StableCltRow,
    TimeChangeRow, TimeChangeSummary,
};
pub use output::{write_csv, write_event_log, write_gnuplot, write_snapshots, write_stable_path};

use crate::error::Result;

/// Files written by [`run_experiment`] and a few human-readable lines.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv: PathBuf,
    pub dat: PathBuf,
    pub summary: Vec<String>,
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Runs the configured experiment and writes `<name>.csv`, `<name>.dat` and a
/// copy of the effective config into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let name = cfg.experiment.name();
    let csv = out_dir.join(format!("{name}.csv"));
    let dat = out_dir.join(format!("{name}.dat"));
    let mut summary = Vec::new();
    match cfg.experiment {
        Experiment::StableClt => {
            let rows = run_stable_clt(cfg)?;
            write_csv(&csv, &rows)?;
            let cols: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| vec![r.n as f64, r.ks_stat, r.n_samples as f64])
                .collect();
            write_gnuplot(&dat, &["N", "ks_stat", "n_samples"], &cols)?;
            for r in &rows {
                summary.push(format!("N={} ks_stat={:.4}", r.n, r.ks_stat));
            }
        }
        Experiment::TimeChangePoisson => {
            let s = run_time_change_poisson(cfg)?;
            write_csv(&csv, &s.rows)?;
            let cols: Vec<Vec<f64>> = s
                .rows
                .iter()
                .map(|r| vec![r.replica as f64, r.n_events as f64, opt(r.ks_p)])
                .collect();
            write_gnuplot(&dat, &["replica", "n_events", "ks_p"], &cols)?;
            summary.push(format!(
                "{} of {} replicas with events; fraction with p > {}: {:.3}",
                s.counted,
                s.rows.len(),
                cfg.thresholds.ks_p,
                s.pass_fraction
            ));
        }
        Experiment::CollateralLimit => {
            let r = run_collateral_limit(cfg)?;
            write_csv(&csv, std::slice::from_ref(&r))?;
            write_gnuplot(
                &dat,
                &["n_samples", "step", "ks_stat"],
                &[vec![r.n_samples as f64, r.step, r.ks_stat]],
            )?;
            summary.push(format!(
                "ks_stat={:.4} on {} samples",
                r.ks_stat, r.n_samples
            ));
        }
        Experiment::ChaosSweep => {
            let rows = run_chaos_sweep(cfg)?;
            write_csv(&csv, &rows)?;
            let cols: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| vec![r.n as f64, r.t, r.w1, r.n_pooled as f64])
                .collect();
            write_gnuplot(&dat, &["N", "t", "w1", "n_pooled"], &cols)?;
            for r in &rows {
                summary.push(format!("N={} t={} w1={:.4}", r.n, r.t, r.w1));
            }
        }
        Experiment::CommonNoise => {
            let s = run_common_noise(cfg)?;
            write_csv(&csv, &s.rows)?;
            let cols: Vec<Vec<f64>> = s
                .rows
                .iter()
                .map(|r| vec![r.n as f64, r.var_finite, r.var_limit_ref])
                .collect();
            write_gnuplot(&dat, &["N", "var_finite", "var_limit_ref"], &cols)?;
            if s.low_precision {
                summary.push("low precision: fewer than 10 replicas".into());
            }
            for r in &s.rows {
                summary.push(format!(
                    "N={} var_finite={:.3e} var_limit_ref={:.3e}",
                    r.n, r.var_finite, r.var_limit_ref
                ));
            }
        }
        Experiment::LimitSelfcheck => {
            let rows = run_limit_selfcheck(cfg)?;
            write_csv(&csv, &rows)?;
            let cols: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| vec![r.value_a, r.value_b, r.w1, r.mc_se])
                .collect();
            write_gnuplot(&dat, &["value_a", "value_b", "w1", "mc_se"], &cols)?;
            for r in &rows {
                let limit = match r.knob.as_str() {
                    "h" => cfg.thresholds.selfcheck_w1_step,
                    _ => cfg.thresholds.selfcheck_w1_particles,
                };
                summary.push(format!(
                    "{}: {} vs {} w1={:.4} se={:.4} ({} threshold {limit})",
                    r.knob,
                    r.value_a,
                    r.value_b,
                    r.w1,
                    r.mc_se,
                    if r.w1 <= limit { "within" } else { "over" }
                ));
            }
        }
    }
    std::fs::write(out_dir.join("config.toml"), cfg.to_toml())?;
    Ok(RunReport { csv, dat, summary })
}
