//! `run`, `rate-sweep` and `burn-in`.

use std::path::{Path, PathBuf};

use heavyclip::analysis::fit_rate_exponent;
use heavyclip::optim::{warmup_with_hold, Trajectory};
use heavyclip::problems::Calibration;
use heavyclip::rng::stream_rng;
use heavyclip::{
    burn_in_certificate, run_trajectory, schedule, Algorithm, BurnInCertificate, HyperParams, NoiseModel, Problem,
    WarmupMode,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::output::{ensure_dir, fmt_f64, mean_ci, write_json, write_text, write_trajectory_csv};
use crate::svg::{line_chart, thin, Axes, Series};

/// Problem and noise model shared by every seed of a configuration.
pub struct Experiment {
    pub problem: Problem,
    pub noise: NoiseModel,
    pub calibration: Calibration,
}

impl Experiment {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let (problem, noise, calibration) = cfg.calibrated()?;
        Ok(Self {
            problem,
            noise,
            calibration,
        })
    }

    /// Schedule and certificate for a horizon.
    pub fn plan(&self, cfg: &RunConfig, horizon: usize, algorithm: Algorithm) -> Result<(HyperParams, BurnInCertificate)> {
        let hp = schedule(
            horizon,
            cfg.b,
            cfg.s,
            cfg.p_moment,
            self.calibration.g,
            cfg.delta,
            algorithm.order(),
        )?;
        let cert = self.certificate(&hp);
        Ok((hp, cert))
    }

    pub fn certificate(&self, hp: &HyperParams) -> BurnInCertificate {
        burn_in_certificate(
            hp,
            self.problem.smoothness(),
            self.problem.second_order_smoothness(),
            self.problem.space().smooth_c(),
        )
    }

    pub fn trajectory(&self, hp: &HyperParams, algorithm: Algorithm, etas: &[f64], seed: u64) -> Result<Trajectory> {
        Ok(run_trajectory(
            &self.problem,
            &self.noise,
            hp,
            algorithm,
            etas,
            &mut stream_rng(seed, 0),
        )?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateFile {
    pub algorithm: &'static str,
    pub order: &'static str,
    pub horizon: usize,
    pub b: f64,
    pub s: f64,
    pub p_moment: f64,
    pub g: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub tau: f64,
    pub delta: f64,
    pub smoothness: f64,
    pub second_order_smoothness: f64,
    pub smooth_c: f64,
    pub d_delta: f64,
    pub k: f64,
    pub z: f64,
    pub burn_in_raw: f64,
    pub burn_in: usize,
    pub m_threshold: f64,
    pub eps_bound: f64,
    pub calibration_samples: usize,
    pub calibration_safety: f64,
    pub gradient_moment: f64,
    pub noise_moment: f64,
}

impl CertificateFile {
    pub fn new(exp: &Experiment, algorithm: Algorithm, hp: &HyperParams, cert: &BurnInCertificate) -> Self {
        Self {
            algorithm: algorithm.name(),
            order: hp.order.name(),
            horizon: hp.horizon,
            b: hp.b,
            s: hp.s,
            p_moment: hp.moment_index,
            g: hp.g,
            alpha: hp.alpha,
            beta: hp.beta,
            eta: hp.eta,
            tau: hp.tau,
            delta: hp.delta,
            smoothness: exp.problem.smoothness(),
            second_order_smoothness: exp.problem.second_order_smoothness(),
            smooth_c: exp.problem.space().smooth_c(),
            d_delta: cert.d_delta,
            k: cert.k,
            z: cert.z,
            burn_in_raw: cert.burn_in_raw,
            burn_in: cert.burn_in,
            m_threshold: cert.m_threshold,
            eps_bound: cert.eps_bound,
            calibration_samples: exp.calibration.n_samples,
            calibration_safety: exp.calibration.safety,
            gradient_moment: exp.calibration.gradient_moment,
            noise_moment: exp.calibration.noise_moment,
        }
    }
}

/// Per-seed statistics of one trajectory.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub seed: u64,
    pub horizon: usize,
    pub initial_f: f64,
    pub final_f: f64,
    pub min_grad_norm: f64,
    pub avg_grad_norm: f64,
    pub output_index: usize,
    pub output_grad_norm: f64,
    pub clip_fraction: f64,
    pub descent_checked_steps: usize,
    pub descent_violations: usize,
    pub eps_hat_violations: usize,
    pub last_violation_index: usize,
    pub last_iterate_gap: f64,
}

pub fn summarize(seed: u64, traj: &Trajectory, cert: &BurnInCertificate) -> Result<Summary> {
    let output_index = traj.recommend_output(cert)?;
    Ok(Summary {
        seed,
        horizon: traj.len(),
        initial_f: traj.records[0].f,
        final_f: traj.final_objective,
        min_grad_norm: traj.min_grad_norm(),
        avg_grad_norm: traj.avg_grad_norm(),
        output_index,
        output_grad_norm: traj.records[output_index - 1].grad_norm,
        clip_fraction: traj.records.iter().filter(|r| r.clipped).count() as f64 / traj.len() as f64,
        descent_checked_steps: traj.descent_checked_steps(cert),
        descent_violations: traj.descent_violations(cert).len(),
        eps_hat_violations: traj.eps_hat_violations(cert).len(),
        last_violation_index: traj.last_momentum_violation(cert),
        last_iterate_gap: traj.last_iterate_gap(cert),
    })
}

pub struct RunReport {
    pub dir: PathBuf,
    pub certificate: CertificateFile,
    pub summaries: Vec<Summary>,
}

fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed_{seed}"))
}

fn plot_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    let f: Vec<_> = traj.records.iter().map(|r| (r.t as f64, r.f)).collect();
    let g: Vec<_> = traj.records.iter().map(|r| (r.t as f64, r.grad_norm)).collect();
    let axes = Axes {
        title: "objective",
        x_label: "t",
        y_label: "F(w_t)",
        log_x: false,
        log_y: false,
    };
    write_text(&dir.join("objective.svg"), &line_chart(axes, &[Series { label: "F", points: thin(f, 2000) }]))?;
    let axes = Axes {
        title: "gradient norm",
        x_label: "t",
        y_label: "|grad F(w_t)|",
        log_x: false,
        log_y: true,
    };
    write_text(&dir.join("grad_norm.svg"), &line_chart(axes, &[Series { label: "grad", points: thin(g, 2000) }]))
}

/// Runs every seed and writes `seed_<n>/{trajectory.csv, certificate.json,
/// summary.json}` plus an aggregate `runs.json`.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let exp = Experiment::new(cfg)?;
    let (hp, cert) = exp.plan(cfg, cfg.horizon, cfg.algorithm)?;
    let etas = warmup_with_hold(&hp, cfg.hold_steps.unwrap_or(cert.burn_in), cfg.warmup);
    let certificate = CertificateFile::new(&exp, cfg.algorithm, &hp, &cert);
    ensure_dir(&cfg.out)?;
    let summaries = cfg
        .seed_list()
        .into_par_iter()
        .map(|seed| -> Result<Summary> {
            let traj = exp.trajectory(&hp, cfg.algorithm, &etas, seed)?;
            let dir = seed_dir(&cfg.out, seed);
            ensure_dir(&dir)?;
            write_trajectory_csv(&dir.join("trajectory.csv"), &traj.records)?;
            write_json(&dir.join("certificate.json"), &certificate)?;
            let summary = summarize(seed, &traj, &cert)?;
            write_json(&dir.join("summary.json"), &summary)?;
            if cfg.plots {
                plot_trajectory(&dir, &traj)?;
            }
            Ok(summary)
        })
        .collect::<Result<Vec<_>>>()?;
    write_json(&cfg.out.join("runs.json"), &summaries)?;
    Ok(RunReport {
        dir: cfg.out.clone(),
        certificate,
        summaries,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub horizon: usize,
    pub seeds: usize,
    pub avg_grad_norm: f64,
    pub avg_grad_norm_ci: f64,
    pub min_grad_norm: f64,
    pub min_grad_norm_ci: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepFit {
    pub metric: &'static str,
    pub slope: f64,
    pub stderr: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub algorithm: &'static str,
    pub order: &'static str,
    pub p_moment: f64,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<SweepFit>,
}

/// Seed-averaged `(1/T)Σ‖∇F(w_t)‖` and `min_t ‖∇F(w_t)‖` over the `T` grid,
/// with log-log slopes.
pub fn rate_sweep(cfg: &RunConfig) -> Result<SweepReport> {
    let exp = Experiment::new(cfg)?;
    let seeds = cfg.seed_list();
    let mut rows = Vec::new();
    for &horizon in &cfg.t_grid {
        let (hp, cert) = exp.plan(cfg, horizon, cfg.algorithm)?;
        let etas = warmup_with_hold(&hp, cfg.hold_steps.unwrap_or(cert.burn_in), cfg.warmup);
        let stats = seeds
            .par_iter()
            .map(|&seed| {
                let t = exp.trajectory(&hp, cfg.algorithm, &etas, seed)?;
                Ok((t.avg_grad_norm(), t.min_grad_norm()))
            })
            .collect::<Result<Vec<_>>>()?;
        let (avg, avg_ci) = mean_ci(&stats.iter().map(|s| s.0).collect::<Vec<_>>());
        let (min, min_ci) = mean_ci(&stats.iter().map(|s| s.1).collect::<Vec<_>>());
        rows.push(SweepRow {
            horizon,
            seeds: seeds.len(),
            avg_grad_norm: avg,
            avg_grad_norm_ci: avg_ci,
            min_grad_norm: min,
            min_grad_norm_ci: min_ci,
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.horizon as f64).collect();
    let target = -cfg.algorithm.order().rate_exponent(cfg.p_moment);
    let mut fits = Vec::new();
    for (metric, values) in [
        ("avg_grad_norm", rows.iter().map(|r| r.avg_grad_norm).collect::<Vec<_>>()),
        ("min_grad_norm", rows.iter().map(|r| r.min_grad_norm).collect()),
    ] {
        let fit = fit_rate_exponent(&ts, &values)?;
        fits.push(SweepFit {
            metric,
            slope: fit.slope,
            stderr: fit.stderr,
            target,
        });
    }
    let report = SweepReport {
        algorithm: cfg.algorithm.name(),
        order: cfg.algorithm.order().name(),
        p_moment: cfg.p_moment,
        rows,
        fits,
    };
    write_sweep(cfg, &report)?;
    Ok(report)
}

fn write_sweep(cfg: &RunConfig, report: &SweepReport) -> Result<()> {
    ensure_dir(&cfg.out)?;
    let mut w = csv::Writer::from_path(cfg.out.join("rate_sweep.csv"))?;
    w.write_record(["T", "seeds", "avg_grad_norm", "avg_grad_norm_ci", "min_grad_norm", "min_grad_norm_ci"])?;
    for r in &report.rows {
        w.write_record([
            r.horizon.to_string(),
            r.seeds.to_string(),
            fmt_f64(r.avg_grad_norm),
            fmt_f64(r.avg_grad_norm_ci),
            fmt_f64(r.min_grad_norm),
            fmt_f64(r.min_grad_norm_ci),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::Output(e.to_string()))?;
    write_json(&cfg.out.join("rate_fit.json"), report)?;
    if cfg.plots {
        let axes = Axes {
            title: "rate sweep",
            x_label: "T",
            y_label: "gradient norm",
            log_x: true,
            log_y: true,
        };
        let series = [
            Series {
                label: "average",
                points: report.rows.iter().map(|r| (r.horizon as f64, r.avg_grad_norm)).collect(),
            },
            Series {
                label: "minimum",
                points: report.rows.iter().map(|r| (r.horizon as f64, r.min_grad_norm)).collect(),
            },
        ];
        write_text(&cfg.out.join("rate_sweep.svg"), &line_chart(axes, &series))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSummary {
    pub mode: &'static str,
    pub hold_steps: usize,
    pub final_f: f64,
    pub final_f_ci: f64,
    pub min_grad_norm: f64,
    pub min_grad_norm_ci: f64,
    pub descent_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BurnInReport {
    pub burn_in: usize,
    pub hold_steps: usize,
    pub seeds: usize,
    pub modes: Vec<ModeSummary>,
    /// Fraction of seeds where `hold` has no more descent violations than `none`.
    pub hold_not_worse_fraction: f64,
}

/// Runs warm-up modes `none` and `hold` on the same seeds.
pub fn burn_in_compare(cfg: &RunConfig) -> Result<BurnInReport> {
    let exp = Experiment::new(cfg)?;
    let (hp, cert) = exp.plan(cfg, cfg.horizon, cfg.algorithm)?;
    let hold = cfg.hold_steps.unwrap_or(cert.burn_in);
    let seeds = cfg.seed_list();
    let mut per_mode = Vec::new();
    for mode in [WarmupMode::None, WarmupMode::Hold] {
        let etas = warmup_with_hold(&hp, hold, mode);
        let rows = seeds
            .par_iter()
            .map(|&seed| summarize(seed, &exp.trajectory(&hp, cfg.algorithm, &etas, seed)?, &cert))
            .collect::<Result<Vec<_>>>()?;
        per_mode.push((mode, rows));
    }
    ensure_dir(&cfg.out)?;
    let mut w = csv::Writer::from_path(cfg.out.join("burn_in.csv"))?;
    w.write_record(["mode", "seed", "final_f", "min_grad_norm", "avg_grad_norm", "descent_violations"])?;
    let mut modes = Vec::new();
    for (mode, rows) in &per_mode {
        for r in rows {
            w.write_record([
                mode.name().to_string(),
                r.seed.to_string(),
                fmt_f64(r.final_f),
                fmt_f64(r.min_grad_norm),
                fmt_f64(r.avg_grad_norm),
                r.descent_violations.to_string(),
            ])?;
        }
        let (final_f, final_f_ci) = mean_ci(&rows.iter().map(|r| r.final_f).collect::<Vec<_>>());
        let (min_g, min_g_ci) = mean_ci(&rows.iter().map(|r| r.min_grad_norm).collect::<Vec<_>>());
        modes.push(ModeSummary {
            mode: mode.name(),
            hold_steps: if *mode == WarmupMode::Hold { hold } else { 0 },
            final_f,
            final_f_ci,
            min_grad_norm: min_g,
            min_grad_norm_ci: min_g_ci,
            descent_violations: rows.iter().map(|r| r.descent_violations).sum(),
        });
    }
    w.flush().map_err(|e| HarnessError::Output(e.to_string()))?;
    let none = &per_mode[0].1;
    let held = &per_mode[1].1;
    let not_worse = none
        .iter()
        .zip(held)
        .filter(|(a, b)| b.descent_violations <= a.descent_violations)
        .count();
    let report = BurnInReport {
        burn_in: cert.burn_in,
        hold_steps: hold,
        seeds: seeds.len(),
        modes,
        hold_not_worse_fraction: not_worse as f64 / seeds.len() as f64,
    };
    write_json(&cfg.out.join("burn_in_summary.json"), &report)?;
    Ok(report)
}
