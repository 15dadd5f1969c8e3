use crate::error::{invalid, Result};
use crate::optim::schedule::HyperParams;
use crate::space::{DualVector, PrimalVector};

/// Iterate, previous iterate and momentum of a running optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    t: usize,
    w: PrimalVector,
    w_prev: PrimalVector,
    m: DualVector,
}

/// What a single step saw.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    /// Point at which the stochastic gradient was evaluated.
    pub query: PrimalVector,
    pub clipped_sample: DualVector,
    pub clipped: bool,
}

impl OptimizerState {
    /// Starts at `w₁` with `m₀ = 0` and `w₀ = w₁`.
    pub fn new(w1: PrimalVector) -> Self {
        let m = w1.space().zero_dual();
        Self {
            t: 1,
            w_prev: w1.clone(),
            w: w1,
            m,
        }
    }

    /// Index of the next step (1-based).
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn w(&self) -> &PrimalVector {
        &self.w
    }

    pub fn w_prev(&self) -> &PrimalVector {
        &self.w_prev
    }

    pub fn momentum(&self) -> &DualVector {
        &self.m
    }

    /// Clipped normalized momentum step with the scheduled learning rate.
    pub fn step_nsgd_clip(&mut self, g_sample: &DualVector, hp: &HyperParams) -> Result<StepInfo> {
        self.step_nsgd_clip_with_rate(g_sample, hp, hp.eta)
    }

    /// `m ← β m + (1−β) clip(g, τ)`, `w ← w − η d(m)`. `g_sample` must have
    /// been drawn at the current iterate.
    pub fn step_nsgd_clip_with_rate(
        &mut self,
        g_sample: &DualVector,
        hp: &HyperParams,
        eta: f64,
    ) -> Result<StepInfo> {
        let query = self.w.clone();
        self.advance(query, g_sample, hp, eta)
    }

    /// `x_t = w_t + β(w_t − w_{t−1})/(1 − β)`.
    pub fn extrapolation_point(&self, beta: f64) -> Result<PrimalVector> {
        if !(0.0..1.0).contains(&beta) {
            return Err(invalid("beta", format!("extrapolation needs β in [0, 1), got {beta}")));
        }
        let ratio = beta / (1.0 - beta);
        let shift = self.w.sub(&self.w_prev)?;
        self.w.lincomb(1.0, ratio, &shift)
    }

    /// Extrapolated-momentum step: queries `oracle` at `x_t`, then clips and
    /// updates exactly like the plain step.
    pub fn step_nigt_clip<F>(&mut self, oracle: F, hp: &HyperParams, eta: f64) -> Result<StepInfo>
    where
        F: FnOnce(&PrimalVector) -> Result<DualVector>,
    {
        let query = self.extrapolation_point(hp.beta)?;
        let g_sample = oracle(&query)?;
        self.advance(query, &g_sample, hp, eta)
    }

    fn advance(
        &mut self,
        query: PrimalVector,
        g_sample: &DualVector,
        hp: &HyperParams,
        eta: f64,
    ) -> Result<StepInfo> {
        let (clipped_sample, clipped) = g_sample.clip_with_flag(hp.tau)?;
        let m = self.m.lincomb(hp.beta, 1.0 - hp.beta, &clipped_sample)?;
        let direction = m.duality_map();
        let w_next = self.w.lincomb(1.0, -eta, &direction)?;
        self.m = m;
        self.w_prev = std::mem::replace(&mut self.w, w_next);
        self.t += 1;
        Ok(StepInfo {
            query,
            clipped_sample,
            clipped,
        })
    }
}
