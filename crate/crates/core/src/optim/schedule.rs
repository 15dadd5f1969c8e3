use crate::error::{invalid, Error, Result};

/// Which smoothness regime the schedule targets: `First` for `L`-smooth
/// losses (plain momentum), `Second` for `ρ`-second-order smooth losses
/// (extrapolated momentum).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn name(self) -> &'static str {
        match self {
            Order::First => "first",
            Order::Second => "second",
        }
    }

    /// Exponent `e` in `α = b / T^e`.
    pub fn momentum_exponent(self, p: f64) -> f64 {
        match self {
            Order::First => p / (3.0 * p - 2.0),
            Order::Second => 2.0 * p / (5.0 * p - 3.0),
        }
    }

    /// Exponent `e` in `η = s / T^e`.
    pub fn step_exponent(self, p: f64) -> f64 {
        match self {
            Order::First => (2.0 * p - 1.0) / (3.0 * p - 2.0),
            Order::Second => (3.0 * p - 1.0) / (5.0 * p - 3.0),
        }
    }

    /// Decay exponent of the averaged gradient norm, `(𝔭−1)/(3𝔭−2)` or
    /// `(2𝔭−2)/(5𝔭−3)`.
    pub fn rate_exponent(self, p: f64) -> f64 {
        match self {
            Order::First => (p - 1.0) / (3.0 * p - 2.0),
            Order::Second => (2.0 * p - 2.0) / (5.0 * p - 3.0),
        }
    }
}

/// Step size, momentum and clipping parameters for a horizon `T`.
///
/// Fields are public so experiments can perturb them; [`HyperParams::check`]
/// reports whether the schedule relations still hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub horizon: usize,
    pub b: f64,
    pub s: f64,
    pub moment_index: f64,
    pub g: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub tau: f64,
    pub delta: f64,
    pub order: Order,
}

/// Sets `α = b/T^{e_α}`, `β = 1 − α`, `η = s/T^{e_η}` and `τ = G/α^{1/𝔭}`.
pub fn schedule(
    horizon: usize,
    b: f64,
    s: f64,
    moment_index: f64,
    g: f64,
    delta: f64,
    order: Order,
) -> Result<HyperParams> {
    if horizon == 0 {
        return Err(invalid("T", "horizon must be at least 1"));
    }
    for (name, v) in [("b", b), ("s", s), ("G", g)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(name, format!("must be finite and positive, got {v}")));
        }
    }
    if !(moment_index > 1.0 && moment_index <= 2.0) {
        return Err(invalid("p_moment", format!("must lie in (1, 2], got {moment_index}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let t = horizon as f64;
    let alpha = b / t.powf(order.momentum_exponent(moment_index));
    if alpha > 1.0 {
        return Err(Error::MomentumTooLarge { alpha });
    }
    let eta = s / t.powf(order.step_exponent(moment_index));
    let tau = g / alpha.powf(1.0 / moment_index);
    Ok(HyperParams {
        horizon,
        b,
        s,
        moment_index,
        g,
        alpha,
        beta: 1.0 - alpha,
        eta,
        tau,
        delta,
        order,
    })
}

impl HyperParams {
    /// Relative deviation of `τ` from `G/α^{1/𝔭}`.
    pub fn tau_deviation(&self) -> f64 {
        let expected = self.g / self.alpha.powf(1.0 / self.moment_index);
        ((self.tau - expected) / expected).abs()
    }

    /// Whether every schedule relation holds (to a few ulp).
    pub fn check(&self) -> bool {
        let t = self.horizon as f64;
        let close = |a: f64, b: f64| (a - b).abs() <= 4.0 * f64::EPSILON * b.abs();
        self.alpha > 0.0
            && self.alpha <= 1.0
            && self.beta == 1.0 - self.alpha
            && close(self.alpha, self.b / t.powf(self.order.momentum_exponent(self.moment_index)))
            && close(self.eta, self.s / t.powf(self.order.step_exponent(self.moment_index)))
            && self.tau_deviation() <= 4.0 * f64::EPSILON
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_order_p2() {
        let hp = schedule(10_000, 1.0, 1.0, 2.0, 1.0, 0.1, Order::First).unwrap();
        assert_relative_eq!(hp.alpha, 0.01, max_relative = 1e-15);
        assert_relative_eq!(hp.beta, 0.99, max_relative = 1e-15);
        assert_relative_eq!(hp.eta, 1e-3, max_relative = 1e-15);
        assert_relative_eq!(hp.tau, 10.0, max_relative = 1e-15);
        assert!(hp.check());
    }

    #[test]
    fn second_order_p2() {
        let hp = schedule(10_000, 1.0, 1.0, 2.0, 1.0, 0.1, Order::Second).unwrap();
        assert_relative_eq!(hp.alpha, 10f64.powf(-16.0 / 7.0), max_relative = 1e-15);
        assert_relative_eq!(hp.eta, 10f64.powf(-20.0 / 7.0), max_relative = 1e-15);
        assert!(hp.check());
    }

    #[test]
    fn horizon_one_is_momentum_free() {
        let hp = schedule(1, 1.0, 1.0, 1.5, 2.0, 0.1, Order::First).unwrap();
        assert_eq!(hp.alpha, 1.0);
        assert_eq!(hp.beta, 0.0);
        assert_eq!(hp.tau, 2.0);
    }

    #[test]
    fn alpha_above_one_is_rejected() {
        let err = schedule(4, 10.0, 1.0, 2.0, 1.0, 0.1, Order::First).unwrap_err();
        assert!(matches!(err, Error::MomentumTooLarge { .. }));
        assert!(schedule(0, 1.0, 1.0, 2.0, 1.0, 0.1, Order::First).is_err());
        assert!(schedule(10, 1.0, 1.0, 2.0, 0.0, 0.1, Order::First).is_err());
        assert!(schedule(10, 1.0, 1.0, 2.0, 1.0, 1.0, Order::First).is_err());
    }

    #[test]
    fn exponents() {
        assert_eq!(Order::First.rate_exponent(2.0), 0.25);
        assert_relative_eq!(Order::First.rate_exponent(1.5), 0.2, max_relative = 1e-15);
        assert_relative_eq!(Order::Second.rate_exponent(2.0), 2.0 / 7.0, max_relative = 1e-15);
    }

    #[test]
    fn tampered_tau_fails_check() {
        let mut hp = schedule(1000, 1.0, 1.0, 1.5, 3.0, 0.1, Order::First).unwrap();
        hp.tau *= 0.5;
        assert!(!hp.check());
        assert_relative_eq!(hp.tau_deviation(), 0.5, max_relative = 1e-12);
    }
}
