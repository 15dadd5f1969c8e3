//! Concentration bounds for martingales and truncated heavy-tailed sums in
//! smooth normed spaces, with Monte-Carlo coverage checks.

use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::rng::{stream_rng, StreamRng};
use crate::space::{lp_norm, DualVector, NormedSpace};

/// Residual tolerance for deterministic inequality checks.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

pub const MIN_COVERAGE_TRIALS: usize = 1_000;
pub const MIN_TRUNCATION_TRIALS: usize = 100_000;

const Z95: f64 = 1.959_963_984_540_054;

fn space_of(xs: &[DualVector]) -> Result<Option<NormedSpace>> {
    let Some(first) = xs.first() else {
        return Ok(None);
    };
    let space = *first.space();
    if xs.iter().any(|x| *x.space() != space) {
        return Err(Error::SpaceMismatch);
    }
    Ok(Some(space))
}

/// Scalar reduction of a vector stream.
///
/// `s_t = sign(Σ_{i<t} s_i) · ⟨∇‖S_{t−1}‖², X_t⟩ / (2‖S_{t−1}‖)` with
/// `S_{t−1} = Σ_{i<t} X_i`, and `s_t = 0` whenever `S_{t−1} = 0`. The sign of
/// a zero prefix is taken as `+1`. Each `|s_t| ≤ ‖X_t‖_⋆`.
pub fn s_sequence(xs: &[DualVector]) -> Result<Vec<f64>> {
    let Some(space) = space_of(xs)? else {
        return Ok(Vec::new());
    };
    let mut partial = space.zero_dual();
    let mut s_sum = 0.0;
    let mut out = Vec::with_capacity(xs.len());
    for x in xs {
        let s = if partial.is_zero() {
            0.0
        } else {
            let sign = if s_sum < 0.0 { -1.0 } else { 1.0 };
            sign * x.pair(&partial.duality_map())?
        };
        out.push(s);
        s_sum += s;
        partial = partial.add(x)?;
    }
    Ok(out)
}

/// `|Σ s_t| + (max_t ‖X_t‖² + C Σ ‖X_t‖²)^{1/2}`, an upper bound on `‖Σ X_t‖_⋆`.
pub fn s_sequence_majorant(xs: &[DualVector]) -> Result<f64> {
    let Some(space) = space_of(xs)? else {
        return Ok(0.0);
    };
    let s: f64 = s_sequence(xs)?.iter().sum();
    let p = space.smooth_p();
    let norms: Vec<f64> = xs.iter().map(|x| x.norm().powf(p)).collect();
    let max = norms.iter().fold(0.0_f64, |m, &v| m.max(v));
    let total: f64 = norms.iter().sum();
    Ok(s.abs() + (max + space.smooth_c() * total).powf(1.0 / p))
}

/// Norm of the stream total, `‖Σ X_t‖_⋆`.
pub fn sum_norm(xs: &[DualVector]) -> Result<f64> {
    let Some(space) = space_of(xs)? else {
        return Ok(0.0);
    };
    let mut total = space.zero_dual();
    for x in xs {
        total = total.add(x)?;
    }
    Ok(total.norm())
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(invalid("delta", format!("must lie in (0, 1), got {delta}")))
    }
}

fn check_martingale(r: f64, sigmas: &[f64]) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid("R", format!("must be finite and positive, got {r}")));
    }
    if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(invalid("sigma", "entries must be finite and non-negative"));
    }
    Ok(())
}

/// `2R log(1/δ)/3 + √(2 Σσ_t² log(1/δ))` for scalar increments bounded by `R`
/// with conditional variances `σ_t²`.
pub fn freedman_scalar_bound(r: f64, sigma_sq: &[f64], delta: f64) -> Result<f64> {
    check_martingale(r, sigma_sq)?;
    check_delta(delta)?;
    let log = (1.0 / delta).ln();
    let v: f64 = sigma_sq.iter().sum();
    Ok(2.0 * r * log / 3.0 + (2.0 * v * log).sqrt())
}

/// `3R max(1, log(1/δ)) + 3√(Σσ_t² max(1, log(1/δ)))`, holding with
/// probability at least `1 − 3δ`.
pub fn freedman_hilbert_bound(r: f64, sigmas: &[f64], delta: f64) -> Result<f64> {
    check_martingale(r, sigmas)?;
    check_delta(delta)?;
    let log = (1.0 / delta).ln().max(1.0);
    let v: f64 = sigmas.iter().map(|s| s * s).sum();
    Ok(3.0 * r * log + 3.0 * (v * log).sqrt())
}

/// `5CR max(1, log(3/δ)) + 4(C Σσ_t^p)^{1/p} √max(1, log(3/δ))` for a
/// `(p, C)`-smooth space with `C ≥ 1`.
pub fn freedman_banach_bound(r: f64, sigmas: &[f64], delta: f64, c: f64, p: f64) -> Result<f64> {
    check_martingale(r, sigmas)?;
    check_delta(delta)?;
    if !(c.is_finite() && c >= 1.0) {
        return Err(invalid("C", format!("must be at least 1, got {c}")));
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(invalid("p", format!("must lie in (1, 2], got {p}")));
    }
    let log = (3.0 / delta).ln().max(1.0);
    let v: f64 = sigmas.iter().map(|s| s.powf(p)).sum();
    Ok(5.0 * c * r * log + 4.0 * (c * v).powf(1.0 / p) * log.sqrt())
}

/// Almost-sure bound and conditional second-moment bounds of a martingale
/// difference sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleSpec {
    pub r: f64,
    pub sigmas: Vec<f64>,
    pub delta: f64,
}

impl MartingaleSpec {
    pub fn new(r: f64, sigmas: Vec<f64>, delta: f64) -> Result<Self> {
        check_martingale(r, &sigmas)?;
        check_delta(delta)?;
        if sigmas.iter().any(|&s| s > r) {
            return Err(invalid("sigma", format!("entries must not exceed R = {r}")));
        }
        Ok(Self { r, sigmas, delta })
    }

    pub fn scalar_bound(&self) -> Result<f64> {
        let sq: Vec<f64> = self.sigmas.iter().map(|s| s * s).collect();
        freedman_scalar_bound(self.r, &sq, self.delta)
    }

    pub fn hilbert_bound(&self) -> Result<f64> {
        freedman_hilbert_bound(self.r, &self.sigmas, self.delta)
    }

    pub fn banach_bound(&self, space: &NormedSpace) -> Result<f64> {
        freedman_banach_bound(self.r, &self.sigmas, self.delta, space.smooth_c(), space.smooth_p())
    }
}

/// Constants used for the truncated-sum bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationVariant {
    /// `4Bτ log(3/δ)` leading term, coefficient 2 on the variance term.
    Hilbert,
    /// `6Bτ max(1, log(3/δ))` leading term, coefficient 3 on the variance term.
    HilbertAsProved,
    /// `10CBτ max(1, log(3/δ))` leading term for a `(2, C)`-smooth dual.
    Banach,
}

impl TruncationVariant {
    pub fn name(self) -> &'static str {
        match self {
            TruncationVariant::Hilbert => "hilbert",
            TruncationVariant::HilbertAsProved => "hilbert_as_proved",
            TruncationVariant::Banach => "banach",
        }
    }
}

/// A weighted stream `Σ b_t (X̂_t − μ_t)` of truncated vectors
/// `X̂_t = X_t min(1, τ/‖X_t‖)` with `E‖X_t‖^𝔭 ≤ G_t^𝔭`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedStreamSpec {
    pub weights: Vec<f64>,
    pub moment_bounds: Vec<f64>,
    pub tau: f64,
    pub moment_index: f64,
    /// Failure probability, allowed in `(0, 3)` since the bound only uses `δ/3`.
    pub delta: f64,
    /// Smoothness constant `C` of the dual norm (ignored by the Hilbert variants).
    pub smooth_c: f64,
}

impl WeightedStreamSpec {
    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(invalid("weights", "stream must be non-empty"));
        }
        if self.weights.len() != self.moment_bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: self.moment_bounds.len(),
            });
        }
        if self.weights.iter().any(|b| !(*b > 0.0 && *b <= 1.0)) {
            return Err(invalid("weights", "each b_t must lie in (0, 1]"));
        }
        if self.moment_bounds.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(invalid("G", "each G_t must be finite and positive"));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(invalid("tau", format!("must be finite and positive, got {}", self.tau)));
        }
        if !(self.moment_index > 1.0 && self.moment_index <= 2.0) {
            return Err(invalid("p_moment", format!("must lie in (1, 2], got {}", self.moment_index)));
        }
        if !(self.delta > 0.0 && self.delta < 3.0) {
            return Err(invalid("delta", format!("must lie in (0, 3), got {}", self.delta)));
        }
        if !(self.smooth_c.is_finite() && self.smooth_c >= 1.0) {
            return Err(invalid("C", format!("must be at least 1, got {}", self.smooth_c)));
        }
        Ok(())
    }

    /// `max_t b_t`.
    pub fn max_weight(&self) -> f64 {
        self.weights.iter().fold(0.0_f64, |m, &b| m.max(b))
    }
}

/// Bound on `‖Σ b_t (X̂_t − μ_t)‖_⋆` holding with probability `1 − δ`.
pub fn truncated_sum_bound(spec: &WeightedStreamSpec, variant: TruncationVariant) -> Result<f64> {
    spec.validate()?;
    let p = spec.moment_index;
    let tau = spec.tau;
    let big_b = spec.max_weight();
    let log = (3.0 / spec.delta).ln();
    let log1 = log.max(1.0);
    let pairs = || spec.weights.iter().zip(&spec.moment_bounds);
    let bias: f64 = pairs().map(|(b, g)| b * g.powf(p) / tau.powf(p - 1.0)).sum();
    match variant {
        TruncationVariant::Hilbert | TruncationVariant::HilbertAsProved => {
            let var: f64 = pairs().map(|(b, g)| b * b * g.powf(p) * tau.powf(2.0 - p)).sum();
            let (lead, coef) = if variant == TruncationVariant::Hilbert {
                (4.0 * big_b * tau * log, 2.0)
            } else {
                (6.0 * big_b * tau * log1, 3.0)
            };
            Ok(lead + bias + coef * (var * log1).sqrt())
        }
        TruncationVariant::Banach => {
            let sp = NormedSpace::SMOOTH_P;
            let c = spec.smooth_c;
            let var: f64 = pairs()
                .map(|(b, g)| b.powf(sp) * g.powf(p) * tau.powf(sp - p))
                .sum();
            Ok(10.0 * c * big_b * tau * log1 + bias + 4.0 * (c * var).powf(1.0 / sp) * log1.sqrt())
        }
    }
}

/// `(Σ x^p)^{1/p} − (Σ x^q)^{1/q}`, non-negative for `0 < p ≤ q`.
pub fn power_mean_check(xs: &[f64], p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && p <= q && q.is_finite()) {
        return Err(invalid("p", format!("need 0 < p ≤ q, got p = {p}, q = {q}")));
    }
    if let Some(i) = xs.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(invalid("xs", format!("entry {i} is not positive")));
    }
    Ok(lp_norm(xs, p) - lp_norm(xs, q))
}

/// Monte-Carlo estimates for a truncated sample `X̂ = X min(1, τ/‖X‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationEstimate {
    /// `‖E X̂ − μ‖_⋆`.
    pub bias: f64,
    pub bias_stderr: f64,
    /// `E‖X̂ − E X̂‖_⋆²`.
    pub variance: f64,
    pub variance_stderr: f64,
    /// `G^𝔭 / τ^{𝔭−1}`.
    pub bias_bound: f64,
    /// `G^𝔭 τ^{2−𝔭}`.
    pub variance_bound: f64,
}

impl TruncationEstimate {
    /// Both estimates sit below their bounds plus three standard errors.
    pub fn within_bounds(&self) -> bool {
        self.bias <= self.bias_bound + 3.0 * self.bias_stderr
            && self.variance <= self.variance_bound + 3.0 * self.variance_stderr
    }
}

/// Estimates truncation bias and variance for samples with mean `mean` and
/// `E‖X‖^𝔭 ≤ g_moment` (the `𝔭`-th moment itself, `G^𝔭`).
pub fn truncation_bias_variance_mc<R, F>(
    mut sampler: F,
    mean: &DualVector,
    tau: f64,
    moment_index: f64,
    g_moment: f64,
    trials: usize,
    rng: &mut R,
) -> Result<TruncationEstimate>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> DualVector,
{
    if trials < MIN_TRUNCATION_TRIALS {
        return Err(invalid(
            "trials",
            format!("need at least {MIN_TRUNCATION_TRIALS}, got {trials}"),
        ));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid("tau", format!("must be finite and positive, got {tau}")));
    }
    let dim = mean.dim();
    let mut samples = Vec::with_capacity(trials * dim);
    let mut sum = vec![0.0; dim];
    for _ in 0..trials {
        let x = sampler(rng).clip(tau)?;
        if x.space() != mean.space() {
            return Err(Error::SpaceMismatch);
        }
        for (s, v) in sum.iter_mut().zip(x.as_slice()) {
            *s += v;
        }
        samples.extend_from_slice(x.as_slice());
    }
    let n = trials as f64;
    let centre: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let space = mean.space();
    let r = space.dual_exponent();
    let bias_vec: Vec<f64> = centre.iter().zip(mean.as_slice()).map(|(c, m)| c - m).collect();
    let bias = lp_norm(&bias_vec, r);
    let (mut sq_sum, mut sq_sq_sum, mut eucl_sum) = (0.0, 0.0, 0.0);
    let mut diff = vec![0.0; dim];
    for chunk in samples.chunks_exact(dim) {
        for ((d, x), c) in diff.iter_mut().zip(chunk).zip(&centre) {
            *d = x - c;
        }
        let sq = lp_norm(&diff, r).powi(2);
        sq_sum += sq;
        sq_sq_sum += sq * sq;
        eucl_sum += lp_norm(&diff, 2.0).powi(2);
    }
    let variance = sq_sum / n;
    let var_of_sq = (sq_sq_sum / n - variance * variance).max(0.0);
    Ok(TruncationEstimate {
        bias,
        // ‖·‖_r ≤ ‖·‖_2 for r ≥ 2, so the Euclidean spread bounds the error
        bias_stderr: (eucl_sum / n / n).sqrt(),
        variance,
        variance_stderr: (var_of_sq / n).sqrt(),
        bias_bound: g_moment / tau.powf(moment_index - 1.0),
        variance_bound: g_moment * tau.powf(2.0 - moment_index),
    })
}

/// Empirical coverage of a high-probability bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub trials: usize,
    pub covered: usize,
    pub coverage: f64,
    /// Wilson 95% interval for the coverage probability.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Target probability `1 − (stated failure probability)`.
    pub level: f64,
    pub pass: bool,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let phat = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (phat + z2 / (2.0 * n_f)) / denom;
    let half = z * (phat * (1.0 - phat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Runs `trials` independent streams; trial `i` draws from stream `i` under
/// `seed` and returns `(deviation, bound)`. A trial is covered when
/// `deviation ≤ bound`. Passes when the coverage is at least
/// `level − 1.96·√(level(1−level)/trials)`.
pub fn coverage_test<F>(trials: usize, level: f64, seed: u64, trial: F) -> Result<CoverageReport>
where
    F: Fn(&mut StreamRng) -> Result<(f64, f64)> + Sync,
{
    if trials < MIN_COVERAGE_TRIALS {
        return Err(invalid(
            "trials",
            format!("need at least {MIN_COVERAGE_TRIALS}, got {trials}"),
        ));
    }
    if !(level > 0.0 && level <= 1.0) {
        return Err(invalid("level", format!("must lie in (0, 1], got {level}")));
    }
    let run = |i: usize| -> Result<usize> {
        let (dev, bound) = trial(&mut stream_rng(seed, i as u64))?;
        Ok(usize::from(dev <= bound))
    };
    #[cfg(feature = "parallel")]
    let covered: usize = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(run).sum::<Result<usize>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let covered: usize = (0..trials).map(run).sum::<Result<usize>>()?;
    let n = trials as f64;
    let coverage = covered as f64 / n;
    let (ci_low, ci_high) = wilson_interval(covered, trials, Z95);
    let band = Z95 * (level * (1.0 - level) / n).sqrt();
    Ok(CoverageReport {
        trials,
        covered,
        coverage,
        ci_low,
        ci_high,
        level,
        pass: coverage >= level - band,
    })
}

/// Built-in coverage experiments, one per bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageLemma {
    /// 100 Rademacher steps, `R = σ_t = 1`; deviation is the largest prefix sum.
    FreedmanScalar,
    /// 100 steps in `ℝ⁵` with clipped-Pareto radii and uniform directions;
    /// deviation is the largest prefix norm.
    FreedmanHilbert,
    /// As above in the `ℓ_3` dual (`C = 2`).
    FreedmanBanach,
    /// Exponentially weighted truncated Pareto stream in `ℝ⁵`.
    TruncatedHilbert,
    /// The same stream in the `ℓ_3` dual.
    TruncatedBanach,
}

/// Stream length used by the built-in experiments.
pub const COVERAGE_STREAM_LEN: usize = 100;
const PARETO_TAIL: f64 = 1.8;
const RADIUS_CAP: f64 = 10.0;
const COVERAGE_DIM: usize = 5;
const TRUNCATION_TAU: f64 = 10.0;
const TRUNCATION_MOMENT: f64 = 1.5;
const TRUNCATION_ALPHA: f64 = 0.1;

impl CoverageLemma {
    pub const ALL: [CoverageLemma; 5] = [
        CoverageLemma::FreedmanScalar,
        CoverageLemma::FreedmanHilbert,
        CoverageLemma::FreedmanBanach,
        CoverageLemma::TruncatedHilbert,
        CoverageLemma::TruncatedBanach,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoverageLemma::FreedmanScalar => "freedman_scalar",
            CoverageLemma::FreedmanHilbert => "freedman_hilbert",
            CoverageLemma::FreedmanBanach => "freedman_banach",
            CoverageLemma::TruncatedHilbert => "truncated_hilbert",
            CoverageLemma::TruncatedBanach => "truncated_banach",
        }
    }

    /// Failure probability the bound claims at parameter `δ`.
    pub fn stated_failure(self, delta: f64) -> f64 {
        match self {
            CoverageLemma::FreedmanHilbert => 3.0 * delta,
            _ => delta,
        }
    }

    fn space(self) -> NormedSpace {
        match self {
            CoverageLemma::FreedmanBanach | CoverageLemma::TruncatedBanach => {
                NormedSpace::from_dual_exponent(COVERAGE_DIM, 3.0).expect("valid exponent")
            }
            _ => NormedSpace::euclidean(COVERAGE_DIM),
        }
    }

    /// Deviation and bound for one random stream.
    pub fn trial<R: Rng + ?Sized>(self, delta: f64, rng: &mut R) -> Result<(f64, f64)> {
        let k = COVERAGE_STREAM_LEN;
        match self {
            CoverageLemma::FreedmanScalar => {
                let bound = freedman_scalar_bound(1.0, &vec![1.0; k], delta)?;
                let mut sum = 0.0_f64;
                let mut max = f64::NEG_INFINITY;
                for _ in 0..k {
                    sum += if rng.random::<bool>() { 1.0 } else { -1.0 };
                    max = max.max(sum);
                }
                Ok((max, bound))
            }
            CoverageLemma::FreedmanHilbert | CoverageLemma::FreedmanBanach => {
                let space = self.space();
                let sigma = capped_pareto_second_moment(PARETO_TAIL, RADIUS_CAP).sqrt();
                let sigmas = vec![sigma; k];
                let bound = if self == CoverageLemma::FreedmanHilbert {
                    freedman_hilbert_bound(RADIUS_CAP, &sigmas, delta)?
                } else {
                    freedman_banach_bound(RADIUS_CAP, &sigmas, delta, space.smooth_c(), space.smooth_p())?
                };
                let pareto = Pareto::new(1.0, PARETO_TAIL).expect("valid Pareto");
                let mut sum = space.zero_dual();
                let mut max = 0.0_f64;
                for _ in 0..k {
                    let radius = pareto.sample(rng).min(RADIUS_CAP);
                    sum = sum.add(&random_direction(&space, radius, rng))?;
                    max = max.max(sum.norm());
                }
                Ok((max, bound))
            }
            CoverageLemma::TruncatedHilbert | CoverageLemma::TruncatedBanach => {
                let space = self.space();
                let spec = truncation_coverage_spec(&space, delta);
                let variant = if self == CoverageLemma::TruncatedHilbert {
                    TruncationVariant::Hilbert
                } else {
                    TruncationVariant::Banach
                };
                let bound = truncated_sum_bound(&spec, variant)?;
                let pareto = Pareto::new(1.0, PARETO_TAIL).expect("valid Pareto");
                let mut sum = space.zero_dual();
                for &b in &spec.weights {
                    let x = random_direction(&space, pareto.sample(rng), rng).clip(spec.tau)?;
                    sum = sum.lincomb(1.0, b, &x)?;
                }
                Ok((sum.norm(), bound))
            }
        }
    }
}

/// `E min(P, cap)²` for `P ~ Pareto(1, a)`.
pub fn capped_pareto_second_moment(a: f64, cap: f64) -> f64 {
    let tail = cap * cap * cap.powf(-a);
    let body = if (a - 2.0).abs() < 1e-12 {
        a * cap.ln()
    } else {
        a * (cap.powf(2.0 - a) - 1.0) / (2.0 - a)
    };
    body + tail
}

/// The weighted stream behind the truncated-sum coverage experiments:
/// `b_t = (1 − α)^{T−t}`, `τ = 10`, `𝔭 = 1.5`, `G_t^𝔭 = 6`.
pub fn truncation_coverage_spec(space: &NormedSpace, delta: f64) -> WeightedStreamSpec {
    let k = COVERAGE_STREAM_LEN;
    let g_moment = PARETO_TAIL / (PARETO_TAIL - TRUNCATION_MOMENT);
    WeightedStreamSpec {
        weights: (1..=k)
            .map(|t| (1.0 - TRUNCATION_ALPHA).powi((k - t) as i32))
            .collect(),
        moment_bounds: vec![g_moment.powf(1.0 / TRUNCATION_MOMENT); k],
        tau: TRUNCATION_TAU,
        moment_index: TRUNCATION_MOMENT,
        delta,
        smooth_c: space.smooth_c(),
    }
}

/// Symmetric random vector of dual norm exactly `radius`.
pub fn random_direction<R: Rng + ?Sized>(space: &NormedSpace, radius: f64, rng: &mut R) -> DualVector {
    let mut u: Vec<f64> = (0..space.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let norm = lp_norm(&u, space.dual_exponent());
    if norm == 0.0 {
        u[0] = radius;
    } else {
        for x in &mut u {
            *x *= radius / norm;
        }
    }
    space.dual(u).expect("finite by construction")
}

/// Runs the built-in experiment for `lemma` at parameter `δ`.
pub fn run_coverage(lemma: CoverageLemma, delta: f64, trials: usize, seed: u64) -> Result<CoverageReport> {
    let level = 1.0 - lemma.stated_failure(delta);
    if level <= 0.0 {
        return Err(invalid("delta", format!("stated failure probability exceeds 1 at δ = {delta}")));
    }
    coverage_test(trials, level, seed, |rng| lemma.trial(delta, rng))
}
