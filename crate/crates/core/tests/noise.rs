use heavyclip::rng::stream_rng;
use heavyclip::{NoiseModel, NormedSpace, Problem};

#[test]
fn sample_mean_is_unbiased() {
    let space = NormedSpace::euclidean(3);
    let problem = Problem::cosine_sum(space, 1.0, vec![0.3, -1.2, 2.0]).unwrap();
    let noise = NoiseModel::new(1.5, 1.8, 1.0).unwrap();
    let w = problem.initial_point();
    let grad = problem.gradient(w).unwrap();
    let mut rng = stream_rng(17, 0);
    let n = 1_000_000;
    let mut sum = [0.0; 3];
    let mut moment = 0.0;
    for _ in 0..n {
        let g = noise.sample_gradient(&problem, w, &mut rng).unwrap();
        for (s, (x, m)) in sum.iter_mut().zip(g.as_slice().iter().zip(grad.as_slice())) {
            *s += x;
            moment += (x - m).abs().powf(1.5) / 3.0;
        }
    }
    let tol = 3.0 * (moment / n as f64).powf(1.0 / 1.5) * (n as f64).powf(-0.5 / 1.5);
    for (s, m) in sum.iter().zip(grad.as_slice()) {
        let mean = s / n as f64;
        assert!((mean - m).abs() <= tol, "{mean} vs {m} (tol {tol})");
    }
}

#[test]
fn radius_moment_matches_pareto_formula() {
    let noise = NoiseModel::new(1.5, 1.8, 1.0).unwrap();
    let space = NormedSpace::new(4, 1.5).unwrap();
    let mut rng = stream_rng(3, 0);
    let n = 10_000_000;
    let mut acc = 0.0;
    for i in 0..n {
        let r = if i % 10 == 0 {
            noise.sample_noise(&space, &mut rng).norm()
        } else {
            noise.sample_radius(&mut rng)
        };
        acc += r.powf(1.5);
    }
    let empirical = acc / n as f64;
    assert!((empirical - 6.0).abs() / 6.0 < 0.05, "{empirical}");
}

/// Fraction of seeds whose running second moment of the radius grows by more
/// than 20% between `n/10` and `n` samples, and fraction whose `k`-th moment
/// stays within 10%.
fn moment_growth(tail: f64, k: f64, n: usize, seeds: u64) -> (f64, f64) {
    let noise = NoiseModel::new(k, tail, 1.0).unwrap();
    let (mut growing, mut stable) = (0, 0);
    for seed in 0..seeds {
        let mut rng = stream_rng(seed, 0);
        let (mut sq, mut pm) = (0.0, 0.0);
        let (mut sq_tenth, mut pm_tenth) = (0.0, 0.0);
        for i in 0..n {
            let r = noise.sample_radius(&mut rng);
            sq += r * r;
            pm += r.powf(k);
            if i + 1 == n / 10 {
                sq_tenth = sq / (n / 10) as f64;
                pm_tenth = pm / (n / 10) as f64;
            }
        }
        let (sq, pm) = (sq / n as f64, pm / n as f64);
        growing += usize::from(sq / sq_tenth > 1.2);
        stable += usize::from((pm / pm_tenth - 1.0).abs() < 0.1);
    }
    (growing as f64 / seeds as f64, stable as f64 / seeds as f64)
}

#[test]
fn infinite_variance_is_visible() {
    // for a = 1.5 the growth event has probability about 0.69
    let (growing, stable) = moment_growth(1.5, 1.2, 1_000_000, 40);
    assert!(growing >= 0.5, "{growing}");
    assert!(stable >= 0.8, "{stable}");
    let (growing, stable) = moment_growth(3.0, 1.2, 1_000_000, 40);
    assert!(growing <= 0.1, "{growing}");
    assert_eq!(stable, 1.0);
}

#[test]
fn pure_noise_calibration() {
    let space = NormedSpace::euclidean(1);
    let problem = Problem::cosine_sum(space, 1.0, vec![0.0]).unwrap();
    let mut noise = NoiseModel::new(1.5, 1.8, 1.0).unwrap();
    let cal = noise.calibrate(&problem, 10_000_000, 1.5, &mut stream_rng(5, 0)).unwrap();
    let expected = 1.5 * 6f64.powf(1.0 / 1.5);
    assert!((cal.g - expected).abs() / expected < 0.1, "{} vs {expected}", cal.g);
    assert_eq!(noise.moment_bound().unwrap(), cal.g);
    assert_eq!(cal.gradient_moment, cal.noise_moment);
}
