//! Synthetic objectives with known smoothness constants and a heavy-tailed
//! stochastic gradient oracle.

use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::space::{lp_norm, DualVector, NormedSpace, PrimalVector};

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    /// `½ Σ λ_i (w_i − w*_i)²` with `λ_i > 0`.
    Quadratic {
        eigenvalues: Vec<f64>,
        optimum: Vec<f64>,
    },
    /// `a Σ cos(w_i)` with amplitude `a > 0`.
    CosineSum { amplitude: f64 },
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Quadratic { .. } => "quadratic",
            ProblemKind::CosineSum { .. } => "cosine_sum",
        }
    }
}

/// A separable objective `F` on a normed space with its smoothness
/// constants `L`, `ρ` and starting point `w₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    space: NormedSpace,
    kind: ProblemKind,
    initial: PrimalVector,
}

impl Problem {
    pub fn quadratic(
        space: NormedSpace,
        eigenvalues: Vec<f64>,
        optimum: Vec<f64>,
        initial: Vec<f64>,
    ) -> Result<Self> {
        let dim = space.dim();
        for (name, v) in [("eigenvalues", &eigenvalues), ("optimum", &optimum)] {
            if v.len() != dim {
                return Err(invalid(name, format!("expected {dim} entries, got {}", v.len())));
            }
        }
        if eigenvalues.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(invalid("eigenvalues", "must be finite and positive"));
        }
        if optimum.iter().any(|x| !x.is_finite()) {
            return Err(invalid("optimum", "must be finite"));
        }
        let initial = space.primal(initial)?;
        Ok(Self {
            space,
            kind: ProblemKind::Quadratic {
                eigenvalues,
                optimum,
            },
            initial,
        })
    }

    pub fn cosine_sum(space: NormedSpace, amplitude: f64, initial: Vec<f64>) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(invalid("amplitude", "must be finite and positive"));
        }
        let initial = space.primal(initial)?;
        Ok(Self {
            space,
            kind: ProblemKind::CosineSum { amplitude },
            initial,
        })
    }

    pub fn space(&self) -> &NormedSpace {
        &self.space
    }

    pub fn kind(&self) -> &ProblemKind {
        &self.kind
    }

    pub fn initial_point(&self) -> &PrimalVector {
        &self.initial
    }

    /// Smoothness constant `L` with respect to the (‖·‖_q, ‖·‖_r) pair.
    ///
    /// Both objectives have diagonal Hessians bounded by `L` entrywise, and
    /// `‖v‖_r ≤ ‖v‖_q` for `r ≥ q`, so the Euclidean constant carries over.
    pub fn smoothness(&self) -> f64 {
        match &self.kind {
            ProblemKind::Quadratic { eigenvalues, .. } => {
                eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            }
            ProblemKind::CosineSum { amplitude } => *amplitude,
        }
    }

    /// Second-order smoothness constant `ρ`.
    pub fn second_order_smoothness(&self) -> f64 {
        match &self.kind {
            ProblemKind::Quadratic { .. } => 0.0,
            ProblemKind::CosineSum { amplitude } => *amplitude,
        }
    }

    /// `inf F`.
    pub fn lower_bound(&self) -> f64 {
        match &self.kind {
            ProblemKind::Quadratic { .. } => 0.0,
            ProblemKind::CosineSum { amplitude } => -amplitude * self.space.dim() as f64,
        }
    }

    fn check(&self, w: &PrimalVector) -> Result<()> {
        if w.space() != &self.space {
            if w.dim() != self.space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.space.dim(),
                    actual: w.dim(),
                });
            }
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    pub fn objective(&self, w: &PrimalVector) -> Result<f64> {
        self.check(w)?;
        let w = w.as_slice();
        Ok(match &self.kind {
            ProblemKind::Quadratic {
                eigenvalues,
                optimum,
            } => {
                0.5 * eigenvalues
                    .iter()
                    .zip(optimum)
                    .zip(w)
                    .map(|((l, o), x)| l * (x - o) * (x - o))
                    .sum::<f64>()
            }
            ProblemKind::CosineSum { amplitude } => {
                amplitude * w.iter().map(|x| x.cos()).sum::<f64>()
            }
        })
    }

    /// Exact `∇F(w)`.
    pub fn gradient(&self, w: &PrimalVector) -> Result<DualVector> {
        self.check(w)?;
        let w = w.as_slice();
        let g = match &self.kind {
            ProblemKind::Quadratic {
                eigenvalues,
                optimum,
            } => eigenvalues
                .iter()
                .zip(optimum)
                .zip(w)
                .map(|((l, o), x)| l * (x - o))
                .collect(),
            ProblemKind::CosineSum { amplitude } => {
                w.iter().map(|x| -amplitude * x.sin()).collect()
            }
        };
        self.space.dual(g)
    }

    /// `∇²F(w)·v`; both Hessians are diagonal.
    pub fn hessian_vector(&self, w: &PrimalVector, v: &PrimalVector) -> Result<DualVector> {
        self.check(w)?;
        self.check(v)?;
        let hv = match &self.kind {
            ProblemKind::Quadratic { eigenvalues, .. } => eigenvalues
                .iter()
                .zip(v.as_slice())
                .map(|(l, x)| l * x)
                .collect(),
            ProblemKind::CosineSum { amplitude } => w
                .as_slice()
                .iter()
                .zip(v.as_slice())
                .map(|(x, y)| -amplitude * x.cos() * y)
                .collect(),
        };
        self.space.dual(hv)
    }
}

/// Additive dual-space noise `ξ = R·u/‖u‖_⋆` with a Pareto radius
/// `R = x_m·U^{−1/a}` and an isotropic Gaussian direction `u`.
///
/// `E‖ξ‖_⋆^𝔭 = a·x_m^𝔭/(a − 𝔭)` is finite whenever `a > 𝔭`; the variance
/// is infinite for `a ≤ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    moment_index: f64,
    tail_index: f64,
    scale: f64,
    calibrated_g: Option<f64>,
}

/// Outcome of [`NoiseModel::calibrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub g: f64,
    pub safety: f64,
    pub n_samples: usize,
    /// Empirical `E‖∇f(w₁, z)‖_⋆^𝔭`.
    pub gradient_moment: f64,
    /// Empirical `E‖∇f(w₁, z) − ∇F(w₁)‖_⋆^𝔭`.
    pub noise_moment: f64,
}

impl NoiseModel {
    pub const MIN_CALIBRATION_SAMPLES: usize = 10_000;

    pub fn new(moment_index: f64, tail_index: f64, scale: f64) -> Result<Self> {
        if !(moment_index > 1.0 && moment_index <= 2.0) {
            return Err(invalid(
                "p_moment",
                format!("moment index must lie in (1, 2], got {moment_index}"),
            ));
        }
        if !(tail_index.is_finite() && tail_index > moment_index) {
            return Err(invalid(
                "tail",
                format!("tail index must exceed the moment index {moment_index}, got {tail_index}"),
            ));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(invalid("scale", "must be finite and non-negative"));
        }
        Ok(Self {
            moment_index,
            tail_index,
            scale,
            calibrated_g: None,
        })
    }

    pub fn moment_index(&self) -> f64 {
        self.moment_index
    }

    pub fn tail_index(&self) -> f64 {
        self.tail_index
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `E R^k = a·x_m^k/(a − k)`, or `None` when the moment is infinite.
    pub fn radius_moment(&self, k: f64) -> Option<f64> {
        if k >= self.tail_index {
            return None;
        }
        Some(self.tail_index * self.scale.powf(k) / (self.tail_index - k))
    }

    /// The bound `G` set by calibration (or by [`NoiseModel::with_moment_bound`]).
    pub fn moment_bound(&self) -> Result<f64> {
        self.calibrated_g.ok_or(Error::Uncalibrated)
    }

    pub fn with_moment_bound(mut self, g: f64) -> Self {
        self.calibrated_g = Some(g);
        self
    }

    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        Pareto::new(self.scale, self.tail_index)
            .expect("validated in constructor")
            .sample(rng)
    }

    /// One draw of `ξ`. The number of random words consumed does not depend
    /// on any iterate, so two optimizers seeded alike see the same stream.
    pub fn sample_noise<R: Rng + ?Sized>(&self, space: &NormedSpace, rng: &mut R) -> DualVector {
        if self.scale == 0.0 {
            return space.zero_dual();
        }
        let radius = self.sample_radius(rng);
        let mut u: Vec<f64> = (0..space.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let norm = lp_norm(&u, space.dual_exponent());
        if norm == 0.0 {
            u[0] = 1.0;
        } else {
            for x in &mut u {
                *x *= radius / norm;
            }
        }
        space.dual(u).expect("finite by construction")
    }

    /// `∇f(w, z) = ∇F(w) + ξ`.
    pub fn sample_gradient<R: Rng + ?Sized>(
        &self,
        problem: &Problem,
        w: &PrimalVector,
        rng: &mut R,
    ) -> Result<DualVector> {
        let grad = problem.gradient(w)?;
        let noise = self.sample_noise(problem.space(), rng);
        grad.add(&noise)
    }

    /// Estimates `G` at `w₁` as `safety · max(E‖∇f‖^𝔭, E‖∇f − ∇F‖^𝔭)^{1/𝔭}`
    /// and stores it.
    pub fn calibrate<R: Rng + ?Sized>(
        &mut self,
        problem: &Problem,
        n_samples: usize,
        safety: f64,
        rng: &mut R,
    ) -> Result<Calibration> {
        if n_samples < Self::MIN_CALIBRATION_SAMPLES {
            return Err(invalid(
                "calibration_samples",
                format!("need at least {}, got {n_samples}", Self::MIN_CALIBRATION_SAMPLES),
            ));
        }
        if !(safety.is_finite() && safety >= 1.0) {
            return Err(invalid("safety", format!("must be at least 1, got {safety}")));
        }
        let p = self.moment_index;
        let w1 = problem.initial_point();
        let grad = problem.gradient(w1)?;
        let (mut sum_full, mut sum_noise) = (0.0, 0.0);
        for _ in 0..n_samples {
            let xi = self.sample_noise(problem.space(), rng);
            sum_full += grad.add(&xi)?.norm().powf(p);
            sum_noise += xi.norm().powf(p);
        }
        let n = n_samples as f64;
        let (gradient_moment, noise_moment) = (sum_full / n, sum_noise / n);
        let g = safety * gradient_moment.max(noise_moment).powf(1.0 / p);
        self.calibrated_g = Some(g);
        Ok(Calibration {
            g,
            safety,
            n_samples,
            gradient_moment,
            noise_moment,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;

    fn quad() -> Problem {
        Problem::quadratic(
            NormedSpace::euclidean(2),
            vec![1.0, 2.0],
            vec![0.0, 0.0],
            vec![2.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn objective_values() {
        let q = quad();
        assert_eq!(q.objective(q.initial_point()).unwrap(), 3.0);
        let opt = q.space().primal(vec![0.0, 0.0]).unwrap();
        assert_eq!(q.objective(&opt).unwrap(), 0.0);
        assert!(q.gradient(&opt).unwrap().is_zero());

        let space = NormedSpace::euclidean(3);
        let c = Problem::cosine_sum(space, 1.0, vec![0.0; 3]).unwrap();
        assert_eq!(c.objective(c.initial_point()).unwrap(), 3.0);
        assert!(c.gradient(c.initial_point()).unwrap().is_zero());
        assert_eq!(c.lower_bound(), -3.0);
        assert_eq!((c.smoothness(), c.second_order_smoothness()), (1.0, 1.0));
        assert_eq!((q.smoothness(), q.second_order_smoothness()), (2.0, 0.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let q = quad();
        let w = NormedSpace::euclidean(3).primal(vec![0.0; 3]).unwrap();
        assert_eq!(
            q.objective(&w).unwrap_err(),
            Error::DimensionMismatch { expected: 2, actual: 3 }
        );
        let w = NormedSpace::new(2, 1.5).unwrap().primal(vec![0.0; 2]).unwrap();
        assert_eq!(q.gradient(&w).unwrap_err(), Error::SpaceMismatch);
    }

    #[test]
    fn constructor_validation() {
        let s = NormedSpace::euclidean(2);
        assert!(Problem::quadratic(s, vec![1.0, 0.0], vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(Problem::quadratic(s, vec![1.0], vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(Problem::cosine_sum(s, 0.0, vec![0.0; 2]).is_err());
        assert!(Problem::cosine_sum(s, 1.0, vec![0.0; 3]).is_err());
        assert!(NoiseModel::new(1.5, 1.5, 1.0).is_err());
        assert!(NoiseModel::new(1.0, 1.5, 1.0).is_err());
        assert!(NoiseModel::new(2.5, 3.0, 1.0).is_err());
        assert!(NoiseModel::new(1.5, 1.8, -1.0).is_err());
        assert!(NoiseModel::new(1.5, 1.8, 1.0).is_ok());
    }

    #[test]
    fn zero_scale_returns_exact_gradient() {
        let q = quad();
        let noise = NoiseModel::new(1.5, 1.8, 0.0).unwrap();
        let mut rng = stream_rng(1, 0);
        let g = noise.sample_gradient(&q, q.initial_point(), &mut rng).unwrap();
        assert_eq!(g, q.gradient(q.initial_point()).unwrap());
    }

    #[test]
    fn noise_norm_equals_radius() {
        let space = NormedSpace::new(4, 1.5).unwrap();
        let noise = NoiseModel::new(1.5, 1.8, 1.0).unwrap();
        let mut a = stream_rng(3, 0);
        let mut b = stream_rng(3, 0);
        for _ in 0..100 {
            let xi = noise.sample_noise(&space, &mut a);
            let r = noise.sample_radius(&mut b);
            // b must skip the direction draws to stay aligned
            for _ in 0..4 {
                let _: f64 = b.sample(StandardNormal);
            }
            assert_relative_eq!(xi.norm(), r, max_relative = 1e-12);
            assert!(r >= 1.0);
        }
    }

    #[test]
    fn radius_moment_closed_form() {
        let noise = NoiseModel::new(1.5, 1.8, 1.0).unwrap();
        assert_relative_eq!(noise.radius_moment(1.5).unwrap(), 6.0, max_relative = 1e-12);
        assert!(noise.radius_moment(2.0).is_none());
    }

    #[test]
    fn calibration_zero_noise() {
        let q = quad();
        let mut noise = NoiseModel::new(2.0, 3.0, 0.0).unwrap();
        assert_eq!(noise.moment_bound().unwrap_err(), Error::Uncalibrated);
        let mut rng = stream_rng(0, 0);
        let cal = noise.calibrate(&q, 10_000, 1.5, &mut rng).unwrap();
        let expected = 1.5 * q.gradient(q.initial_point()).unwrap().norm();
        assert_relative_eq!(cal.g, expected, max_relative = 1e-12);
        assert_eq!(noise.moment_bound().unwrap(), cal.g);
        assert_eq!(cal.safety, 1.5);
    }

    #[test]
    fn calibration_rejects_bad_arguments() {
        let q = quad();
        let mut noise = NoiseModel::new(2.0, 3.0, 1.0).unwrap();
        let mut rng = stream_rng(0, 0);
        assert!(noise.calibrate(&q, 100, 1.5, &mut rng).is_err());
        assert!(noise.calibrate(&q, 10_000, 0.5, &mut rng).is_err());
    }
}
