use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::optim::certificate::BurnInCertificate;
use crate::optim::schedule::{HyperParams, Order};
use crate::optim::state::{OptimizerState, StepInfo};
use crate::problems::{NoiseModel, Problem};
use crate::space::PrimalVector;

/// Slack allowed on objective comparisons.
pub const DESCENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Normalized SGD with clipping and momentum.
    Nsgd,
    /// Normalized implicit gradient transport with clipping.
    Nigt,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nsgd => "nsgd",
            Algorithm::Nigt => "nigt",
        }
    }

    /// Schedule regime matched to the algorithm.
    pub fn order(self) -> Order {
        match self {
            Algorithm::Nsgd => Order::First,
            Algorithm::Nigt => Order::Second,
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nsgd" => Ok(Algorithm::Nsgd),
            "nigt" => Ok(Algorithm::Nigt),
            other => Err(invalid("algorithm", format!("expected nsgd or nigt, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarmupMode {
    /// Constant learning rate from the first step.
    None,
    /// Learning rate held at zero through the burn-in, momentum still
    /// accumulating.
    Hold,
}

impl WarmupMode {
    pub fn name(self) -> &'static str {
        match self {
            WarmupMode::None => "none",
            WarmupMode::Hold => "hold",
        }
    }
}

impl std::str::FromStr for WarmupMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(WarmupMode::None),
            "hold" => Ok(WarmupMode::Hold),
            other => Err(invalid("warmup", format!("expected none or hold, got `{other}`"))),
        }
    }
}

/// Per-step learning rates: constant `η`, or zero for `t ≤ 𝒯` under `Hold`.
pub fn warmup_policy(hp: &HyperParams, cert: &BurnInCertificate, mode: WarmupMode) -> Vec<f64> {
    warmup_with_hold(hp, cert.burn_in, mode)
}

/// [`warmup_policy`] with an explicit hold length.
pub fn warmup_with_hold(hp: &HyperParams, hold: usize, mode: WarmupMode) -> Vec<f64> {
    (1..=hp.horizon)
        .map(|t| match mode {
            WarmupMode::Hold if t <= hold => 0.0,
            _ => hp.eta,
        })
        .collect()
}

/// One row of a trajectory. Quantities refer to `w_t`, the iterate before
/// step `t`, and to `m_t`, the momentum after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    /// `F(w_t)`.
    pub f: f64,
    /// `‖∇F(w_t)‖_⋆`.
    pub grad_norm: f64,
    /// `‖m_t‖_⋆`.
    pub m_norm: f64,
    /// `‖m_t − ∇F(w_t)‖_⋆`.
    pub eps_hat: f64,
    /// `‖g^clip_t − ∇F(query_t)‖_⋆`.
    pub eps: f64,
    pub clipped: bool,
    pub eta: f64,
}

/// State visible to an observer right after a step.
pub struct StepObservation<'a> {
    pub t: usize,
    pub w_before: &'a PrimalVector,
    pub state: &'a OptimizerState,
    pub info: &'a StepInfo,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    /// `w_{T+1}`.
    pub final_point: PrimalVector,
    pub final_objective: f64,
    pub final_grad_norm: f64,
}

/// Runs `hp.horizon` steps of `algorithm`, drawing stochastic gradients from
/// `noise` and using learning rate `etas[t−1]` at step `t`.
pub fn run_trajectory<R: Rng + ?Sized>(
    problem: &Problem,
    noise: &NoiseModel,
    hp: &HyperParams,
    algorithm: Algorithm,
    etas: &[f64],
    rng: &mut R,
) -> Result<Trajectory> {
    run_trajectory_observed(problem, noise, hp, algorithm, etas, rng, |_| {})
}

pub fn run_trajectory_observed<R, O>(
    problem: &Problem,
    noise: &NoiseModel,
    hp: &HyperParams,
    algorithm: Algorithm,
    etas: &[f64],
    rng: &mut R,
    mut observer: O,
) -> Result<Trajectory>
where
    R: Rng + ?Sized,
    O: FnMut(&StepObservation<'_>),
{
    if etas.len() != hp.horizon {
        return Err(invalid(
            "etas",
            format!("expected {} learning rates, got {}", hp.horizon, etas.len()),
        ));
    }
    let mut state = OptimizerState::new(problem.initial_point().clone());
    let mut records = Vec::with_capacity(hp.horizon);
    for (i, &eta) in etas.iter().enumerate() {
        let t = i + 1;
        let w_before = state.w().clone();
        let f = problem.objective(&w_before)?;
        let grad = problem.gradient(&w_before)?;
        let info = match algorithm {
            Algorithm::Nsgd => {
                let g = noise.sample_gradient(problem, &w_before, rng)?;
                state.step_nsgd_clip_with_rate(&g, hp, eta)?
            }
            Algorithm::Nigt => state.step_nigt_clip(
                |x| noise.sample_gradient(problem, x, rng),
                hp,
                eta,
            )?,
        };
        let query_grad = if info.query == w_before {
            grad.clone()
        } else {
            problem.gradient(&info.query)?
        };
        let m = state.momentum();
        records.push(StepRecord {
            t,
            f,
            grad_norm: grad.norm(),
            m_norm: m.norm(),
            eps_hat: m.sub(&grad)?.norm(),
            eps: info.clipped_sample.sub(&query_grad)?.norm(),
            clipped: info.clipped,
            eta,
        });
        observer(&StepObservation {
            t,
            w_before: &w_before,
            state: &state,
            info: &info,
            eta,
        });
    }
    let final_point = state.w().clone();
    Ok(Trajectory {
        final_objective: problem.objective(&final_point)?,
        final_grad_norm: problem.gradient(&final_point)?.norm(),
        final_point,
        records,
    })
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(1/T) Σ_t ‖∇F(w_t)‖_⋆`.
    pub fn avg_grad_norm(&self) -> f64 {
        self.records.iter().map(|r| r.grad_norm).sum::<f64>() / self.records.len() as f64
    }

    /// `min_t ‖∇F(w_t)‖_⋆`.
    pub fn min_grad_norm(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.grad_norm)
            .fold(f64::INFINITY, f64::min)
    }

    /// `F(w_{t+1})` for a 1-based step `t`.
    pub fn objective_after(&self, t: usize) -> f64 {
        if t < self.records.len() {
            self.records[t].f
        } else {
            self.final_objective
        }
    }

    fn post_burn_in<'a>(&'a self, cert: &BurnInCertificate) -> impl Iterator<Item = &'a StepRecord> {
        let start = cert.burn_in.max(1);
        self.records.iter().filter(move |r| r.t >= start)
    }

    /// Steps `t ≥ 𝒯` where `‖m_t‖_⋆ ≥ m_threshold` but
    /// `F(w_{t+1}) < F(w_t) − (η_t/2)‖m_t‖_⋆` fails (with slack
    /// [`DESCENT_TOLERANCE`]).
    pub fn descent_violations(&self, cert: &BurnInCertificate) -> Vec<usize> {
        self.post_burn_in(cert)
            .filter(|r| r.m_norm >= cert.m_threshold)
            .filter(|r| {
                let next = self.objective_after(r.t);
                !(next < r.f - 0.5 * r.eta * r.m_norm + DESCENT_TOLERANCE)
            })
            .map(|r| r.t)
            .collect()
    }

    /// Number of steps `t ≥ 𝒯` where the momentum condition is active.
    pub fn descent_checked_steps(&self, cert: &BurnInCertificate) -> usize {
        self.post_burn_in(cert)
            .filter(|r| r.m_norm >= cert.m_threshold)
            .count()
    }

    /// Steps `t ≥ 𝒯` with `‖m_t − ∇F(w_t)‖_⋆ > eps_bound`.
    pub fn eps_hat_violations(&self, cert: &BurnInCertificate) -> Vec<usize> {
        self.post_burn_in(cert)
            .filter(|r| r.eps_hat > cert.eps_bound)
            .map(|r| r.t)
            .collect()
    }

    /// Argmin of `‖m_t‖_⋆` over `t ≥ 𝒯`, ties going to the earliest step.
    pub fn recommend_output(&self, cert: &BurnInCertificate) -> Result<usize> {
        recommend_output(&self.records, cert)
    }

    /// Last step `t ≥ 𝒯` whose momentum falls below the descent threshold;
    /// `max(𝒯, 1)` when there is none.
    pub fn last_momentum_violation(&self, cert: &BurnInCertificate) -> usize {
        self.post_burn_in(cert)
            .filter(|r| r.m_norm < cert.m_threshold)
            .map(|r| r.t)
            .last()
            .unwrap_or(cert.burn_in.max(1).min(self.records.len()))
    }

    /// `F(w_T) − F(w_t̂)` with `t̂` from [`Trajectory::last_momentum_violation`].
    /// Non-positive when the last-iterate guarantee holds.
    pub fn last_iterate_gap(&self, cert: &BurnInCertificate) -> f64 {
        let last = self.records.last().expect("non-empty trajectory");
        let t_hat = self.last_momentum_violation(cert);
        last.f - self.records[t_hat - 1].f
    }
}

/// Argmin of recorded `‖m_t‖_⋆` over `t ≥ 𝒯` (ties to the smallest `t`).
pub fn recommend_output(records: &[StepRecord], cert: &BurnInCertificate) -> Result<usize> {
    if records.len() < cert.burn_in.max(1) {
        return Err(Error::TrajectoryTooShort {
            len: records.len(),
            required: cert.burn_in.max(1),
        });
    }
    let start = cert.burn_in.max(1);
    let mut best = (start, f64::INFINITY);
    for r in records.iter().filter(|r| r.t >= start) {
        if r.m_norm < best.1 {
            best = (r.t, r.m_norm);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::certificate::burn_in_certificate;
    use crate::optim::schedule::schedule;
    use crate::rng::stream_rng;
    use crate::space::NormedSpace;
    use rand::Rng;

    fn record(t: usize, m_norm: f64) -> StepRecord {
        StepRecord {
            t,
            f: 0.0,
            grad_norm: 0.0,
            m_norm,
            eps_hat: 0.0,
            eps: 0.0,
            clipped: false,
            eta: 0.1,
        }
    }

    fn cert_with(burn_in: usize) -> BurnInCertificate {
        BurnInCertificate {
            d_delta: 1.0,
            k: 15.0,
            z: 1.0,
            burn_in_raw: burn_in as f64,
            burn_in,
            m_threshold: 1.0,
            eps_bound: 1.0,
        }
    }

    #[test]
    fn warmup_modes() {
        let hp = schedule(8, 1.0, 1.0, 2.0, 1.0, 0.1, Order::First).unwrap();
        let none = warmup_policy(&hp, &cert_with(5), WarmupMode::None);
        assert!(none.iter().all(|&e| e == hp.eta));
        assert_eq!(warmup_policy(&hp, &cert_with(0), WarmupMode::Hold), none);
        let e = hp.eta;
        assert_eq!(
            warmup_policy(&hp, &cert_with(5), WarmupMode::Hold),
            vec![0.0, 0.0, 0.0, 0.0, 0.0, e, e, e]
        );
    }

    #[test]
    fn recommend_output_cases() {
        let flat: Vec<_> = (1..=10).map(|t| record(t, 2.0)).collect();
        assert_eq!(recommend_output(&flat, &cert_with(4)).unwrap(), 4);
        let mut dip = flat.clone();
        dip[6].m_norm = 0.5;
        assert_eq!(recommend_output(&dip, &cert_with(2)).unwrap(), 7);
        // minimum before the burn-in does not count
        dip[0].m_norm = 0.1;
        assert_eq!(recommend_output(&dip, &cert_with(2)).unwrap(), 7);
        assert!(matches!(
            recommend_output(&flat, &cert_with(11)),
            Err(Error::TrajectoryTooShort { .. })
        ));
    }

    #[test]
    fn recommend_output_matches_linear_scan() {
        let mut rng = stream_rng(11, 0);
        let recs: Vec<_> = (1..=100).map(|t| record(t, rng.random::<f64>())).collect();
        let cert = cert_with(30);
        let mut best_t = 0;
        let mut best = f64::INFINITY;
        for r in &recs[29..] {
            if r.m_norm < best {
                best = r.m_norm;
                best_t = r.t;
            }
        }
        assert_eq!(recommend_output(&recs, &cert).unwrap(), best_t);
    }

    #[test]
    fn algorithm_parsing() {
        assert_eq!("nsgd".parse::<Algorithm>().unwrap(), Algorithm::Nsgd);
        assert_eq!("nigt".parse::<Algorithm>().unwrap(), Algorithm::Nigt);
        assert!("adam".parse::<Algorithm>().is_err());
        assert_eq!("hold".parse::<WarmupMode>().unwrap(), WarmupMode::Hold);
        assert!("linear".parse::<WarmupMode>().is_err());
    }

    #[test]
    fn deterministic_quadratic_descends() {
        let space = NormedSpace::euclidean(3);
        let problem = Problem::quadratic(space, vec![1.0, 2.0, 3.0], vec![0.0; 3], vec![1.0, -1.0, 2.0]).unwrap();
        let mut noise = NoiseModel::new(2.0, 3.0, 0.0).unwrap();
        let g = noise.calibrate(&problem, 10_000, 1.5, &mut stream_rng(0, 1)).unwrap().g;
        let hp = schedule(100, 1.0, 1.0, 2.0, g, 0.1, Order::First).unwrap();
        let etas = vec![hp.eta; 100];
        let traj = run_trajectory(&problem, &noise, &hp, Algorithm::Nsgd, &etas, &mut stream_rng(0, 0)).unwrap();
        assert_eq!(traj.len(), 100);
        assert!(traj.final_objective < traj.records[0].f);
        let cert = burn_in_certificate(&hp, problem.smoothness(), 0.0, 1.0);
        assert!(traj.last_iterate_gap(&cert) <= 1e-9);
    }

    #[test]
    fn learning_rate_length_checked() {
        let space = NormedSpace::euclidean(1);
        let problem = Problem::cosine_sum(space, 1.0, vec![0.5]).unwrap();
        let noise = NoiseModel::new(2.0, 3.0, 1.0).unwrap();
        let hp = schedule(10, 1.0, 1.0, 2.0, 1.0, 0.1, Order::First).unwrap();
        assert!(run_trajectory(&problem, &noise, &hp, Algorithm::Nsgd, &[0.1; 3], &mut stream_rng(0, 0)).is_err());
    }
}
