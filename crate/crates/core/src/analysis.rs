//! Numerical checks of smoothness and one-step descent inequalities, and
//! power-law fitting for convergence rates.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::problems::Problem;
use crate::space::{DualVector, PrimalVector};

/// Inequality residuals above `−RESIDUAL_TOLERANCE` count as satisfied.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// `F(w) − η‖∇F(w)‖_⋆ + 2η‖ε‖_⋆ + Lη²/2 − F(w − η d(g*))` with
/// `ε = g* − ∇F(w)`.
pub fn check_one_step(problem: &Problem, w: &PrimalVector, g_star: &DualVector, eta: f64) -> Result<f64> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(invalid("eta", format!("must be finite and positive, got {eta}")));
    }
    let grad = problem.gradient(w)?;
    let eps = g_star.sub(&grad)?;
    let w_next = w.lincomb(1.0, -eta, &g_star.duality_map())?;
    let l = problem.smoothness();
    let rhs = problem.objective(w)? - eta * grad.norm() + 2.0 * eta * eps.norm() + 0.5 * l * eta * eta;
    Ok(rhs - problem.objective(&w_next)?)
}

/// `F(y) + ⟨∇F(y), x − y⟩ + (L/2)‖x − y‖² − F(x)`.
pub fn check_smooth_upper(problem: &Problem, x: &PrimalVector, y: &PrimalVector) -> Result<f64> {
    let diff = x.sub(y)?;
    let dist = diff.norm();
    let rhs = problem.objective(y)?
        + problem.gradient(y)?.pair(&diff)?
        + 0.5 * problem.smoothness() * dist * dist;
    Ok(rhs - problem.objective(x)?)
}

/// Residuals of the second-order Taylor bounds expanded at `x`:
///
/// * value: `F(x) + ⟨∇F(x), h⟩ + ½⟨∇²F(x)h, h⟩ + (ρ/6)‖h‖³ − F(y)`
/// * gradient: `(ρ/2)‖h‖² − ‖∇F(y) − ∇F(x) − ∇²F(x)h‖_⋆`
///
/// with `h = y − x`.
pub fn check_second_order_taylor(problem: &Problem, x: &PrimalVector, y: &PrimalVector) -> Result<(f64, f64)> {
    let h = y.sub(x)?;
    let dist = h.norm();
    let rho = problem.second_order_smoothness();
    let gx = problem.gradient(x)?;
    let hh = problem.hessian_vector(x, &h)?;
    let model = problem.objective(x)? + gx.pair(&h)? + 0.5 * hh.pair(&h)?;
    let value = model + rho / 6.0 * dist.powi(3) - problem.objective(y)?;
    let err = problem.gradient(y)?.sub(&gx)?.sub(&hh)?.norm();
    Ok((value, 0.5 * rho * dist * dist - err))
}

/// Largest relative error between the analytic gradient and central
/// differences with step `h`, measured in the dual norm.
pub fn gradient_fd_error(problem: &Problem, w: &PrimalVector, h: f64) -> Result<f64> {
    let analytic = problem.gradient(w)?;
    let space = problem.space();
    let mut fd = Vec::with_capacity(space.dim());
    for i in 0..space.dim() {
        let mut e = vec![0.0; space.dim()];
        e[i] = h;
        let step = space.primal(e)?;
        let plus = problem.objective(&w.add(&step)?)?;
        let minus = problem.objective(&w.sub(&step)?)?;
        fd.push((plus - minus) / (2.0 * h));
    }
    let fd = space.dual(fd)?;
    Ok(fd.sub(&analytic)?.norm() / analytic.norm().max(1.0))
}

/// Relative error between the analytic Hessian-vector product and a central
/// difference of gradients along `v`.
pub fn hessian_vector_fd_error(problem: &Problem, w: &PrimalVector, v: &PrimalVector, h: f64) -> Result<f64> {
    let analytic = problem.hessian_vector(w, v)?;
    let plus = problem.gradient(&w.lincomb(1.0, h, v)?)?;
    let minus = problem.gradient(&w.lincomb(1.0, -h, v)?)?;
    let fd = plus.lincomb(0.5 / h, -0.5 / h, &minus)?;
    Ok(fd.sub(&analytic)?.norm() / analytic.norm().max(1.0))
}

/// Outcome of a randomized inequality sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepReport {
    pub checked: usize,
    pub violations: usize,
    pub min_residual: f64,
}

impl SweepReport {
    fn new() -> Self {
        Self {
            checked: 0,
            violations: 0,
            min_residual: f64::INFINITY,
        }
    }

    fn record(&mut self, residual: f64) {
        self.checked += 1;
        if residual < -RESIDUAL_TOLERANCE {
            self.violations += 1;
        }
        self.min_residual = self.min_residual.min(residual);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Residual sweeps over random points of a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalitySweep {
    pub one_step: SweepReport,
    pub smooth_upper: SweepReport,
    pub taylor_value: SweepReport,
    pub taylor_gradient: SweepReport,
}

impl InequalitySweep {
    pub fn passed(&self) -> bool {
        self.one_step.passed()
            && self.smooth_upper.passed()
            && self.taylor_value.passed()
            && self.taylor_gradient.passed()
    }
}

fn random_point<R: Rng + ?Sized>(problem: &Problem, radius: f64, rng: &mut R) -> Result<PrimalVector> {
    let space = problem.space();
    let centre = problem.initial_point().as_slice();
    space.primal(
        centre
            .iter()
            .map(|c| c + radius * (2.0 * rng.random::<f64>() - 1.0))
            .collect(),
    )
}

/// Evaluates every residual check at `n` random configurations within
/// `radius` (per coordinate) of the initial point.
pub fn sweep_inequalities<R: Rng + ?Sized>(
    problem: &Problem,
    n: usize,
    radius: f64,
    rng: &mut R,
) -> Result<InequalitySweep> {
    let mut out = InequalitySweep {
        one_step: SweepReport::new(),
        smooth_upper: SweepReport::new(),
        taylor_value: SweepReport::new(),
        taylor_gradient: SweepReport::new(),
    };
    let space = problem.space();
    for _ in 0..n {
        let x = random_point(problem, radius, rng)?;
        let y = random_point(problem, radius, rng)?;
        let noise: Vec<f64> = (0..space.dim())
            .map(|_| radius * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let g_star = problem.gradient(&x)?.add(&space.dual(noise)?)?;
        let eta = radius * rng.random::<f64>() + 1e-6;
        out.one_step.record(check_one_step(problem, &x, &g_star, eta)?);
        out.smooth_upper.record(check_smooth_upper(problem, &x, &y)?);
        let (v, g) = check_second_order_taylor(problem, &x, &y)?;
        out.taylor_value.record(v);
        out.taylor_gradient.record(g);
    }
    Ok(out)
}

/// Least-squares fit of `log(metric) = intercept + slope·log(T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

/// Fits the decay exponent of `metrics` against `horizons`. Needs at least
/// three points spanning 1.5 decades and positive values throughout.
pub fn fit_rate_exponent(horizons: &[f64], metrics: &[f64]) -> Result<RateFit> {
    if horizons.len() != metrics.len() {
        return Err(Error::DimensionMismatch {
            expected: horizons.len(),
            actual: metrics.len(),
        });
    }
    let n = horizons.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("need at least 3 points, got {n}")));
    }
    if horizons.iter().chain(metrics).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Degenerate("horizons and metrics must be positive".into()));
    }
    let lo = horizons.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = horizons.iter().copied().fold(0.0, f64::max);
    let span = (hi / lo).log10();
    if span < 1.5 {
        return Err(Error::Degenerate(format!("horizons span {span:.2} decades, need 1.5")));
    }
    let xs: Vec<f64> = horizons.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = metrics.iter().map(|m| m.ln()).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if n > 2 { (ssr / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RateFit {
        slope,
        stderr,
        intercept,
    })
}
