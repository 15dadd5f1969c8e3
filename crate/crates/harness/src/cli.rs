//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, Settings};
use crate::coverage::concentration;
use crate::error::{HarnessError, Result};
use crate::experiment::{burn_in_compare, rate_sweep, run};
use crate::verify::{verify, VerifyOptions};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "HEAVYCLIP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "heavyclip", version, about = "Clipped normalized momentum experiments under heavy-tailed noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration over a batch of seeds.
    Run(RunArgs),
    /// Fit the decay exponent of the gradient norm over a grid of horizons.
    RateSweep(SweepArgs),
    /// Compare constant learning rate against holding it at zero through the burn-in.
    BurnIn(RunArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
    /// Monte-Carlo coverage of the concentration bounds.
    Concentration(ConcentrationArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// INI file with [run], [problem], [noise] and [norm] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// nsgd or nigt.
    #[arg(long)]
    pub algo: Option<String>,
    /// quadratic or cosine_sum.
    #[arg(long)]
    pub problem: Option<String>,
    /// Primal norm exponent in (1, 2].
    #[arg(long)]
    pub q: Option<String>,
    /// Moment index in (1, 2].
    #[arg(long = "p-moment")]
    pub p_moment: Option<String>,
    /// Horizon.
    #[arg(long = "T")]
    pub horizon: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// Base seed; seed i of a batch is seed + i.
    #[arg(long)]
    pub seed: Option<String>,
    /// Number of seeds.
    #[arg(long)]
    pub seeds: Option<String>,
    /// none or hold.
    #[arg(long)]
    pub warmup: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Emit SVG charts.
    #[arg(long)]
    pub plots: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated horizons.
    #[arg(long = "t-grid")]
    pub t_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Tenfold smaller sweeps.
    #[arg(long)]
    pub quick: bool,
    /// Scale the scheduled clip threshold (fault injection).
    #[arg(long = "tau-scale", default_value_t = 1.0, hide = true)]
    pub tau_scale: f64,
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    /// Comma-separated failure probabilities.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub delta: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "heavyclip-out")]
    pub out: PathBuf,
}

impl RunArgs {
    /// Defaults, then the config file, then flags.
    pub fn settings(&self) -> Result<Settings> {
        let mut st = Settings::default();
        if let Some(path) = &self.config {
            st.merge_file(path)?;
        }
        let flags = [
            ("run", "algo", &self.algo),
            ("problem", "kind", &self.problem),
            ("norm", "q", &self.q),
            ("noise", "p_moment", &self.p_moment),
            ("run", "T", &self.horizon),
            ("run", "b", &self.b),
            ("run", "s", &self.s),
            ("run", "delta", &self.delta),
            ("run", "seed", &self.seed),
            ("run", "seeds", &self.seeds),
            ("run", "warmup", &self.warmup),
            ("run", "out", &self.out),
        ];
        for (section, key, value) in flags {
            if let Some(v) = value {
                st.set(section, key, v)?;
            }
        }
        if self.plots {
            st.set("run", "plots", "true")?;
        }
        Ok(st)
    }

    fn resolve(&self) -> Result<RunConfig> {
        let st = self.settings()?;
        let cfg = RunConfig::from_settings(&st)?;
        st.write_echo(&cfg.out)?;
        Ok(cfg)
    }
}

/// Configures the global thread pool from [`THREADS_ENV`], if set.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .map_err(|e| HarnessError::config(THREADS_ENV, format!("cannot parse `{raw}`: {e}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::config(THREADS_ENV, e.to_string()))
}

/// Executes a parsed command, printing a short report to stdout.
pub fn execute(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let rep = run(&cfg)?;
            println!(
                "{} seeds, T = {}, burn-in {}, τ = {:.4e}, η = {:.4e}",
                rep.summaries.len(),
                rep.certificate.horizon,
                rep.certificate.burn_in,
                rep.certificate.tau,
                rep.certificate.eta
            );
            for s in &rep.summaries {
                println!(
                    "seed {}: F {:.6} -> {:.6}, min grad {:.4e}, output t = {}",
                    s.seed, s.initial_f, s.final_f, s.min_grad_norm, s.output_index
                );
            }
            println!("wrote {}", rep.dir.display());
        }
        Command::RateSweep(args) => {
            let mut st = args.run.settings()?;
            if let Some(grid) = &args.t_grid {
                st.set("run", "t_grid", grid)?;
            }
            let cfg = RunConfig::from_settings(&st)?;
            st.write_echo(&cfg.out)?;
            let rep = rate_sweep(&cfg)?;
            for r in &rep.rows {
                println!("T = {:>8}: avg grad {:.4e}, min grad {:.4e}", r.horizon, r.avg_grad_norm, r.min_grad_norm);
            }
            for f in &rep.fits {
                println!("{}: slope {:.4} ± {:.4} (target {:.4})", f.metric, f.slope, f.stderr, f.target);
            }
        }
        Command::BurnIn(args) => {
            let cfg = args.resolve()?;
            let rep = burn_in_compare(&cfg)?;
            println!("burn-in {} (hold {} steps), {} seeds", rep.burn_in, rep.hold_steps, rep.seeds);
            for m in &rep.modes {
                println!(
                    "{:>4}: final F {:.6} ± {:.6}, min grad {:.4e} ± {:.4e}, descent violations {}",
                    m.mode, m.final_f, m.final_f_ci, m.min_grad_norm, m.min_grad_norm_ci, m.descent_violations
                );
            }
        }
        Command::Verify(args) => {
            let cfg = args.run.resolve()?;
            let opts = VerifyOptions {
                quick: args.quick,
                tau_scale: args.tau_scale,
            };
            let rep = verify(&cfg, opts)?;
            for c in &rep.checks {
                println!(
                    "{} {} ({} samples, {} violations) {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.samples,
                    c.violations,
                    c.detail
                );
            }
            println!("{:.1}s", rep.elapsed_seconds);
            if !rep.passed {
                return Err(HarnessError::InvariantFailure(rep.failures()));
            }
        }
        Command::Concentration(args) => {
            let rows = concentration(&args.delta, args.trials, args.seed, &args.out)?;
            let mut failed = 0;
            for r in &rows {
                println!(
                    "{} {} δ = {}: coverage {:.4} [{:.4}, {:.4}] level {:.3}",
                    if r.report.pass { "PASS" } else { "FAIL" },
                    r.lemma.name(),
                    r.delta,
                    r.report.coverage,
                    r.report.ci_low,
                    r.report.ci_high,
                    r.report.level
                );
                failed += usize::from(!r.report.pass);
            }
            if failed > 0 {
                return Err(HarnessError::InvariantFailure(failed));
            }
        }
    }
    Ok(())
}
