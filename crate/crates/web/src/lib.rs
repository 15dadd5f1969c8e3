//! Browser bindings: simulate a clipped optimizer run, inspect the duality
//! map of a 2-D dual ℓ_r ball, and chart truncation bias and variance.

use heavyclip::concentration::{truncation_bias_variance_mc, MIN_TRUNCATION_TRIALS};
use heavyclip::optim::warmup_policy;
use heavyclip::problems::NoiseModel;
use heavyclip::rng::{stream_rng, StreamRng, CALIBRATION_STREAM};
use heavyclip::{burn_in_certificate, run_trajectory, schedule, Algorithm, NormedSpace, Problem, WarmupMode};
use wasm_bindgen::prelude::*;

fn js<E: std::fmt::Display>(e: E) -> JsError {
    JsError::new(&e.to_string())
}

/// One seeded run on a 10-dimensional cosine-sum objective.
#[wasm_bindgen]
pub struct Simulation {
    objective: Vec<f64>,
    grad_norm: Vec<f64>,
    m_norm: Vec<f64>,
    tau: f64,
    eta: f64,
    burn_in: usize,
    clip_fraction: f64,
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(algo: &str, q: f64, p_moment: f64, tail: f64, horizon: usize, hold: bool, seed: u64) -> Result<Simulation, JsError> {
        let algorithm: Algorithm = algo.parse().map_err(js)?;
        let space = NormedSpace::new(10, q).map_err(js)?;
        let problem = Problem::cosine_sum(space, 1.0, vec![2.0; 10]).map_err(js)?;
        let mut noise = NoiseModel::new(p_moment, tail, 1.0).map_err(js)?;
        let cal = noise
            .calibrate(&problem, NoiseModel::MIN_CALIBRATION_SAMPLES, 1.5, &mut stream_rng(seed, CALIBRATION_STREAM))
            .map_err(js)?;
        let hp = schedule(horizon, 1.0, 1.0, p_moment, cal.g, 0.1, algorithm.order()).map_err(js)?;
        let cert = burn_in_certificate(
            &hp,
            problem.smoothness(),
            problem.second_order_smoothness(),
            problem.space().smooth_c(),
        );
        let mode = if hold { WarmupMode::Hold } else { WarmupMode::None };
        let etas = warmup_policy(&hp, &cert, mode);
        let traj = run_trajectory(&problem, &noise, &hp, algorithm, &etas, &mut stream_rng(seed, 0)).map_err(js)?;
        let clipped = traj.records.iter().filter(|r| r.clipped).count();
        Ok(Simulation {
            objective: traj.records.iter().map(|r| r.f).collect(),
            grad_norm: traj.records.iter().map(|r| r.grad_norm).collect(),
            m_norm: traj.records.iter().map(|r| r.m_norm).collect(),
            tau: hp.tau,
            eta: hp.eta,
            burn_in: cert.burn_in,
            clip_fraction: clipped as f64 / horizon as f64,
        })
    }

    pub fn objective(&self) -> Vec<f64> {
        self.objective.clone()
    }

    #[wasm_bindgen(js_name = gradNorm)]
    pub fn grad_norm(&self) -> Vec<f64> {
        self.grad_norm.clone()
    }

    #[wasm_bindgen(js_name = momentumNorm)]
    pub fn m_norm(&self) -> Vec<f64> {
        self.m_norm.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn tau(&self) -> f64 {
        self.tau
    }

    #[wasm_bindgen(getter)]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    #[wasm_bindgen(getter, js_name = burnIn)]
    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    #[wasm_bindgen(getter, js_name = clipFraction)]
    pub fn clip_fraction(&self) -> f64 {
        self.clip_fraction
    }
}

/// Boundary of the 2-D dual unit ball as `[x0, y0, x1, y1, ...]`.
#[wasm_bindgen(js_name = unitSphere)]
pub fn unit_sphere(q: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let space = NormedSpace::new(2, q).map_err(js)?;
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let th = std::f64::consts::TAU * i as f64 / points as f64;
        let v = space.dual(vec![th.cos(), th.sin()]).map_err(js)?;
        let n = v.norm();
        out.extend(v.as_slice().iter().map(|c| c / n));
    }
    Ok(out)
}

/// `[‖v‖_⋆, d_x, d_y, ⟨v, d(v)⟩, ‖d(v)‖]` for the dual vector `(x, y)`.
#[wasm_bindgen(js_name = dualityMap)]
pub fn duality_map(q: f64, x: f64, y: f64) -> Result<Vec<f64>, JsError> {
    let space = NormedSpace::new(2, q).map_err(js)?;
    let v = space.dual(vec![x, y]).map_err(js)?;
    let d = v.duality_map();
    let pairing = v.pair(&d).map_err(js)?;
    Ok(vec![v.norm(), d.as_slice()[0], d.as_slice()[1], pairing, d.norm()])
}

/// For each `τ`: `[bias, variance, bias_bound, variance_bound]` of clipping a
/// symmetric scalar Pareto draw. `trials` is raised to the estimator's minimum.
#[wasm_bindgen(js_name = truncationCurve)]
pub fn truncation_curve(tail: f64, p_moment: f64, taus: Vec<f64>, trials: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let space = NormedSpace::euclidean(1);
    let noise = NoiseModel::new(p_moment, tail, 1.0).map_err(js)?;
    let g_moment = noise.radius_moment(p_moment).ok_or_else(|| JsError::new("infinite moment"))?;
    let mean = space.zero_dual();
    let mut out = Vec::with_capacity(4 * taus.len());
    for (i, &tau) in taus.iter().enumerate() {
        let est = truncation_bias_variance_mc(
            |rng: &mut StreamRng| noise.sample_noise(&space, rng),
            &mean,
            tau,
            p_moment,
            g_moment,
            trials.max(MIN_TRUNCATION_TRIALS),
            &mut stream_rng(seed, i as u64),
        )
        .map_err(js)?;
        out.extend([est.bias, est.variance, est.bias_bound, est.variance_bound]);
    }
    Ok(out)
}
