use crate::optim::schedule::{HyperParams, Order};

/// Burn-in length and post-burn-in guarantees implied by a schedule.
///
/// After `burn_in` steps the momentum error `‖m_t − ∇F(w_t)‖_⋆` stays below
/// `eps_bound` (with probability `1 − δ`), and every step with
/// `‖m_t‖_⋆ ≥ m_threshold` decreases `F` by at least `η‖m_t‖_⋆/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurnInCertificate {
    /// `max(1, log(3T/δ))`.
    pub d_delta: f64,
    pub k: f64,
    pub z: f64,
    /// Unclamped burn-in formula value.
    pub burn_in_raw: f64,
    /// Burn-in step count, ceil-rounded and clamped to `[0, T]`.
    pub burn_in: usize,
    pub m_threshold: f64,
    pub eps_bound: f64,
}

/// Evaluates the burn-in constants for smoothness `l`, second-order
/// smoothness `rho` and smooth-norm constant `c` (`G` is taken from `hp`).
///
/// The two regimes use different `K`: `10C·D + 4√C·√D + 1` for first order,
/// `10·D + 4√(C·D) + 1` for second order.
pub fn burn_in_certificate(hp: &HyperParams, l: f64, rho: f64, c: f64) -> BurnInCertificate {
    let p = hp.moment_index;
    let t = hp.horizon as f64;
    let d_delta = (3.0 * t / hp.delta).ln().max(1.0);
    let bias = hp.g * hp.b.powf((p - 1.0) / p);
    let (k, z) = match hp.order {
        Order::First => {
            let k = 10.0 * c * d_delta + 4.0 * c.sqrt() * d_delta.sqrt() + 1.0;
            (k, hp.s * l / hp.b + bias * k)
        }
        Order::Second => {
            let k = 10.0 * d_delta + 4.0 * (c * d_delta).sqrt() + 1.0;
            (k, rho * hp.s * hp.s / (hp.b * hp.b) + bias * k)
        }
    };
    let rate = hp.order.rate_exponent(p);
    let burn_in_raw = t.powf(hp.order.momentum_exponent(p)) / hp.b
        * (rate * t.ln() + hp.g.ln() - z.ln());
    let burn_in = if burn_in_raw.is_nan() || burn_in_raw <= 0.0 {
        0
    } else {
        burn_in_raw.ceil().min(t) as usize
    };
    let decay = t.powf(rate);
    let eps_bound = 2.0 * z / decay;
    let m_threshold =
        2.0 * (6.0 * z / decay + l * hp.s / (2.0 * t.powf(hp.order.step_exponent(p))));
    BurnInCertificate {
        d_delta,
        k,
        z,
        burn_in_raw,
        burn_in,
        m_threshold,
        eps_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::schedule::schedule;
    use approx::assert_relative_eq;

    #[test]
    fn k_with_unit_log_factor() {
        // δ close to 3T makes log(3T/δ) < 1, so D_δ = 1
        let mut hp = schedule(1, 1.0, 1.0, 2.0, 1.0, 0.5, Order::First).unwrap();
        hp.delta = 2.9;
        let cert = burn_in_certificate(&hp, 1.0, 0.0, 1.0);
        assert_eq!(cert.d_delta, 1.0);
        assert_eq!(cert.k, 15.0);
        assert_eq!(cert.z, 1.0 + hp.g * 15.0);
    }

    #[test]
    fn z_first_order() {
        let hp = schedule(1000, 1.0, 1.0, 1.5, 2.0, 0.1, Order::First).unwrap();
        let cert = burn_in_certificate(&hp, 1.0, 0.0, 1.0);
        assert_relative_eq!(cert.z, 1.0 + 2.0 * cert.k, max_relative = 1e-15);
        let d = (3.0 * 1000.0 / 0.1f64).ln();
        assert_relative_eq!(cert.k, 10.0 * d + 4.0 * d.sqrt() + 1.0, max_relative = 1e-15);
    }

    #[test]
    fn second_order_k_and_z() {
        let hp = schedule(1000, 2.0, 3.0, 2.0, 1.0, 0.1, Order::Second).unwrap();
        let c = 2.0;
        let cert = burn_in_certificate(&hp, 1.0, 0.5, c);
        let d = (3.0 * 1000.0 / 0.1f64).ln();
        assert_relative_eq!(cert.k, 10.0 * d + 4.0 * (c * d).sqrt() + 1.0, max_relative = 1e-15);
        let z = 0.5 * 9.0 / 4.0 + 1.0 * cert.k * 2f64.powf(0.5);
        assert_relative_eq!(cert.z, z, max_relative = 1e-14);
        assert_relative_eq!(cert.eps_bound, 2.0 * z / 1000f64.powf(2.0 / 7.0), max_relative = 1e-14);
    }

    #[test]
    fn negative_burn_in_clamps_to_zero() {
        // G much smaller than Z makes the log bracket negative
        let hp = schedule(100, 1.0, 1.0, 2.0, 1e-3, 0.1, Order::First).unwrap();
        let cert = burn_in_certificate(&hp, 1.0, 0.0, 1.0);
        assert!(cert.burn_in_raw < 0.0);
        assert_eq!(cert.burn_in, 0);
    }

    #[test]
    fn burn_in_clamps_to_horizon() {
        // tiny b stretches the burn-in far beyond T
        let hp = schedule(100, 1e-4, 1e-6, 2.0, 1.0, 0.1, Order::First).unwrap();
        let cert = burn_in_certificate(&hp, 1.0, 0.0, 1.0);
        assert!(cert.burn_in_raw > 100.0);
        assert_eq!(cert.burn_in, 100);
    }

    #[test]
    fn thresholds_first_order() {
        let hp = schedule(10_000, 1.0, 1.0, 2.0, 1.0, 0.1, Order::First).unwrap();
        let l = 3.0;
        let cert = burn_in_certificate(&hp, l, 0.0, 1.0);
        let expected = 2.0 * (6.0 * cert.z / 10.0 + l / (2.0 * 1000.0));
        assert_relative_eq!(cert.m_threshold, expected, max_relative = 1e-12);
        assert_relative_eq!(cert.eps_bound, 2.0 * cert.z / 10.0, max_relative = 1e-12);
    }
}
