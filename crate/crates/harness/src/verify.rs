//! The `verify` invariant suite.

use std::time::Instant;

use heavyclip::analysis::{gradient_fd_error, hessian_vector_fd_error, sweep_inequalities, SweepReport};
use heavyclip::concentration::{
    power_mean_check, random_direction, run_coverage, s_sequence, s_sequence_majorant, sum_norm,
    truncation_bias_variance_mc, CoverageLemma, MIN_TRUNCATION_TRIALS,
};
use heavyclip::optim::run_trajectory_observed;
use heavyclip::rng::{stream_rng, StreamRng};
use heavyclip::{DualVector, NormedSpace, Problem};
use rand::Rng;
use rand_distr::{Distribution, Pareto};
use serde::Serialize;

use crate::config::RunConfig;
use crate::experiment::Experiment;
use crate::output::{ensure_dir, write_json};
use crate::error::Result;

fn pareto<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    Pareto::new(1.0, a).expect("valid tail").sample(rng)
}

fn sym_pareto<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let x = pareto(a, rng);
    if rng.random::<bool>() {
        x
    } else {
        -x
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub quick: bool,
    pub elapsed_seconds: f64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Tenfold smaller sweeps.
    pub quick: bool,
    /// Multiplies the scheduled clip threshold before the trajectory checks.
    pub tau_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            quick: false,
            tau_scale: 1.0,
        }
    }
}

struct Suite {
    checks: Vec<CheckResult>,
    quick: bool,
}

impl Suite {
    fn n(&self, full: usize) -> usize {
        if self.quick {
            (full / 10).max(1)
        } else {
            full
        }
    }

    fn push(&mut self, name: impl Into<String>, samples: usize, violations: usize, detail: impl Into<String>) {
        self.checks.push(CheckResult {
            name: name.into(),
            samples,
            violations,
            pass: violations == 0,
            detail: detail.into(),
        });
    }

    fn push_pass(&mut self, name: impl Into<String>, samples: usize, pass: bool, detail: impl Into<String>) {
        self.checks.push(CheckResult {
            name: name.into(),
            samples,
            violations: usize::from(!pass),
            pass,
            detail: detail.into(),
        });
    }

    fn push_sweep(&mut self, name: String, rep: &SweepReport) {
        self.push(name, rep.checked, rep.violations, format!("min residual {:.3e}", rep.min_residual));
    }
}

fn spaces(cfg: &RunConfig, dim: usize) -> Vec<NormedSpace> {
    let mut qs = vec![2.0, 1.5, 1.25];
    if !qs.contains(&cfg.q) {
        qs.push(cfg.q);
    }
    qs.into_iter().map(|q| NormedSpace::new(dim, q).expect("valid exponent")).collect()
}

fn random_dual<R: Rng + ?Sized>(space: &NormedSpace, rng: &mut R) -> DualVector {
    let scale = 10f64.powf(6.0 * rng.random::<f64>() - 3.0);
    let v = (0..space.dim()).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect();
    space.dual(v).expect("finite")
}

fn normed_space_checks(s: &mut Suite, cfg: &RunConfig) -> Result<()> {
    let mut rng = stream_rng(cfg.seed, 101);
    for space in spaces(cfg, 6) {
        let q = space.primal_exponent();
        let n = s.n(10_000);
        let (mut duality, mut smooth, mut clip) = (0, 0, 0);
        let mut worst = f64::INFINITY;
        for _ in 0..n {
            let v = random_dual(&space, &mut rng);
            let d = v.duality_map();
            let norm = v.norm();
            if (v.pair(&d)? - norm).abs() > 1e-12 * norm || (d.norm() - 1.0).abs() > 1e-12 {
                duality += 1;
            }
            let x = random_dual(&space, &mut rng);
            let y = random_dual(&space, &mut rng);
            let res = space.verify_smooth_norm(&x, &y)?;
            let scale = (x.norm() + y.norm()).powi(2).max(1.0);
            worst = worst.min(res / scale);
            if res < -1e-9 * scale {
                smooth += 1;
            }
            let tau = norm * 2.0 * rng.random::<f64>() + 1e-12;
            let c = v.clip(tau)?;
            let collinear = v.pair(&c.duality_map())? >= norm * (1.0 - 1e-12);
            if c.norm() > tau * (1.0 + 1e-12) || (norm <= tau && c != v) || !collinear {
                clip += 1;
            }
        }
        s.push(format!("duality_map[q={q}]"), n, duality, "⟨v,d(v)⟩ = ‖v‖ and ‖d(v)‖ = 1 to 1e-12");
        s.push(
            format!("smooth_norm[q={q}]"),
            n,
            smooth,
            format!("C = {}, min scaled residual {worst:.3e}", space.smooth_c()),
        );
        s.push(format!("clip[q={q}]"), n, clip, "norm ≤ τ, identity inside the ball, direction kept");
    }
    Ok(())
}

fn analysis_checks(s: &mut Suite, cfg: &RunConfig) -> Result<()> {
    let dim = 6;
    let mut problems: Vec<(String, Problem)> = Vec::new();
    for space in spaces(cfg, dim) {
        let q = space.primal_exponent();
        problems.push((format!("cosine_sum[q={q}]"), Problem::cosine_sum(space, 1.3, vec![0.2; dim])?));
        problems.push((
            format!("quadratic[q={q}]"),
            Problem::quadratic(space, vec![0.1, 1.0, 3.0, 2.0, 0.5, 1.5], vec![0.5; dim], vec![1.0; dim])?,
        ));
    }
    problems.push(("configured".into(), cfg.build_problem()?));
    let n = s.n(10_000);
    for (i, (label, problem)) in problems.iter().enumerate() {
        let rep = sweep_inequalities(problem, n, 2.0, &mut stream_rng(cfg.seed, 200 + i as u64))?;
        s.push_sweep(format!("one_step[{label}]"), &rep.one_step);
        s.push_sweep(format!("smooth_upper[{label}]"), &rep.smooth_upper);
        s.push_sweep(format!("taylor_value[{label}]"), &rep.taylor_value);
        s.push_sweep(format!("taylor_gradient[{label}]"), &rep.taylor_gradient);

        let mut rng = stream_rng(cfg.seed, 300 + i as u64);
        let m = s.n(1_000);
        let (mut bad, mut worst) = (0, 0.0f64);
        let space = problem.space();
        for _ in 0..m {
            let shift = |rng: &mut StreamRng, r: f64| -> Vec<f64> {
                (0..space.dim()).map(|_| r * (2.0 * rng.random::<f64>() - 1.0)).collect()
            };
            let w = problem.initial_point().add(&space.primal(shift(&mut rng, 3.0))?)?;
            let v = space.primal(shift(&mut rng, 1.0))?;
            let e = gradient_fd_error(problem, &w, 1e-5)?.max(hessian_vector_fd_error(problem, &w, &v, 1e-5)?);
            worst = worst.max(e);
            if e > 1e-6 {
                bad += 1;
            }
        }
        s.push(format!("finite_difference[{label}]"), m, bad, format!("max relative error {worst:.2e}"));
    }
    Ok(())
}

fn concentration_checks(s: &mut Suite, cfg: &RunConfig) -> Result<()> {
    let mut rng = stream_rng(cfg.seed, 400);
    for q in [2.0, 1.5] {
        let space = NormedSpace::new(5, q)?;
        for len in [1usize, 10, 100] {
            let n = s.n(10_000);
            let (mut bad, mut bad_s) = (0, 0);
            for _ in 0..n {
                let xs: Vec<DualVector> = (0..len)
                    .map(|_| random_direction(&space, pareto(1.8, &mut rng), &mut rng))
                    .collect();
                let total = sum_norm(&xs)?;
                if s_sequence_majorant(&xs)? < total - 1e-9 * total.max(1.0) {
                    bad += 1;
                }
                let seq = s_sequence(&xs)?;
                if seq.iter().zip(&xs).any(|(st, x)| st.abs() > x.norm() * (1.0 + 1e-12)) {
                    bad_s += 1;
                }
            }
            s.push(
                format!("s_sequence_majorant[C={},len={len}]", space.smooth_c()),
                n,
                bad + bad_s,
                "majorant ≥ ‖ΣX‖ and |s_t| ≤ ‖X_t‖",
            );
        }
    }

    let n = s.n(100_000);
    let mut bad = 0;
    for _ in 0..n {
        let len = rng.random_range(1..20);
        let xs: Vec<f64> = (0..len).map(|_| 10f64.powf(8.0 * rng.random::<f64>() - 4.0)).collect();
        let p = 0.1 + 2.9 * rng.random::<f64>();
        let q = p + 5.0 * rng.random::<f64>();
        let scale = xs.iter().fold(0.0f64, |m, &x| m.max(x));
        if power_mean_check(&xs, p, q)? < -1e-12 * scale.max(1.0) {
            bad += 1;
        }
    }
    s.push("power_mean", n, bad, "(Σx^p)^{1/p} ≥ (Σx^q)^{1/q}");

    let delta = 0.1;
    let trials = s.n(10_000).max(1_000);
    for lemma in CoverageLemma::ALL {
        let rep = run_coverage(lemma, delta, trials, cfg.seed)?;
        s.push_pass(
            format!("coverage[{}]", lemma.name()),
            trials,
            rep.pass,
            format!(
                "coverage {:.4} (95% CI {:.4}–{:.4}) vs level {:.3}",
                rep.coverage, rep.ci_low, rep.ci_high, rep.level
            ),
        );
    }

    let trials = (s.n(200_000)).max(MIN_TRUNCATION_TRIALS);
    let scalar = NormedSpace::euclidean(1);
    let zero = scalar.zero_dual();
    let (a, p) = (1.8, 1.5);
    let g_moment = a / (a - p);
    let mut worst = String::from("|bias| and variance within 3 SE of their bounds at τ ∈ {2, 5, 10, 20, 50}");
    let mut bad = 0;
    for (i, tau) in [2.0, 5.0, 10.0, 20.0, 50.0].into_iter().enumerate() {
        let est = truncation_bias_variance_mc(
            |rng: &mut StreamRng| scalar.dual(vec![sym_pareto(a, rng)]).expect("finite"),
            &zero,
            tau,
            p,
            g_moment,
            trials,
            &mut stream_rng(cfg.seed, 500 + i as u64),
        )?;
        if !est.within_bounds() {
            bad += 1;
            worst = format!("τ={tau}: {est:?}");
        }
    }
    s.push("truncation_bias_variance", 5 * trials, bad, worst);

    let mean = scalar.dual(vec![a / (a - 1.0)])?;
    let mut last = f64::INFINITY;
    let mut bad = 0;
    for tau in [1.5, 3.0, 10.0, 30.0, 100.0] {
        let est = truncation_bias_variance_mc(
            |rng: &mut StreamRng| scalar.dual(vec![pareto(a, rng)]).expect("finite"),
            &mean,
            tau,
            p,
            g_moment,
            MIN_TRUNCATION_TRIALS,
            &mut stream_rng(cfg.seed, 600),
        )?;
        if est.bias >= last {
            bad += 1;
        }
        last = est.bias;
    }
    s.push("truncation_bias_monotone", 5, bad, "one-sided Pareto, common random numbers");
    Ok(())
}

fn trajectory_checks(s: &mut Suite, cfg: &RunConfig, tau_scale: f64) -> Result<()> {
    let exp = Experiment::new(cfg)?;
    let (mut hp, cert) = exp.plan(cfg, cfg.horizon, cfg.algorithm)?;
    hp.tau *= tau_scale;
    s.push_pass(
        "schedule_tau_consistency",
        1,
        hp.check(),
        format!("τ = {:.6e}, relative deviation from G/α^(1/p) {:.3e}", hp.tau, hp.tau_deviation()),
    );
    let etas = heavyclip::optim::warmup_with_hold(&hp, cfg.hold_steps.unwrap_or(cert.burn_in), cfg.warmup);
    let seeds: Vec<u64> = if cfg.seeds > 1 {
        cfg.seed_list()
    } else {
        (0..s.n(100) as u64).map(|i| cfg.seed + i).collect()
    };
    let (mut ball, mut length, mut steps) = (0, 0, 0);
    let (mut descent_seeds, mut eps_seeds, mut last_seeds, mut active) = (0, 0, 0, 0);
    for &seed in &seeds {
        let traj = run_trajectory_observed(
            &exp.problem,
            &exp.noise,
            &hp,
            cfg.algorithm,
            &etas,
            &mut stream_rng(seed, 0),
            |obs| {
                steps += 1;
                let m = obs.state.momentum();
                if m.norm() > hp.tau * (1.0 + 1e-12) {
                    ball += 1;
                }
                if !m.is_zero() {
                    let moved = obs.state.w().sub(obs.w_before).map(|d| d.norm()).unwrap_or(f64::NAN);
                    if !((moved - obs.eta).abs() <= 1e-12 * obs.eta.max(1.0)) {
                        length += 1;
                    }
                }
            },
        )?;
        active += traj.descent_checked_steps(&cert);
        descent_seeds += usize::from(!traj.descent_violations(&cert).is_empty());
        eps_seeds += usize::from(!traj.eps_hat_violations(&cert).is_empty());
        last_seeds += usize::from(traj.last_iterate_gap(&cert) > 1e-9);
    }
    s.push("momentum_ball", steps, ball, format!("‖m_t‖ ≤ τ = {:.4e}", hp.tau));
    s.push("step_length", steps, length, "‖w_{t+1} − w_t‖ = η_t whenever m_t ≠ 0");
    let n = seeds.len();
    let band = 1.96 * (cfg.delta * (1.0 - cfg.delta) / n as f64).sqrt();
    let allowed = cfg.delta + band;
    for (name, bad, note) in [
        ("burn_in_descent", descent_seeds, format!("{active} active steps")),
        ("eps_hat_certificate", eps_seeds, format!("bound {:.4e}", cert.eps_bound)),
        ("last_iterate", last_seeds, format!("burn-in {}", cert.burn_in)),
    ] {
        let frac = bad as f64 / n as f64;
        s.push_pass(
            name,
            n,
            frac <= allowed,
            format!("{bad}/{n} seeds violate (allowed {allowed:.3}); {note}"),
        );
    }
    Ok(())
}

/// Runs the full suite and writes `verify.json` into the output directory.
pub fn verify(cfg: &RunConfig, opts: VerifyOptions) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut suite = Suite {
        checks: Vec::new(),
        quick: opts.quick,
    };
    normed_space_checks(&mut suite, cfg)?;
    analysis_checks(&mut suite, cfg)?;
    concentration_checks(&mut suite, cfg)?;
    trajectory_checks(&mut suite, cfg, opts.tau_scale)?;
    let report = VerifyReport {
        passed: suite.checks.iter().all(|c| c.pass),
        quick: opts.quick,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        checks: suite.checks,
    };
    ensure_dir(&cfg.out)?;
    write_json(&cfg.out.join("verify.json"), &report)?;
    Ok(report)
}
