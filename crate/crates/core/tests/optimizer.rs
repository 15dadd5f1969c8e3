use heavyclip::optim::{run_trajectory_observed, warmup_with_hold};
use heavyclip::rng::stream_rng;
use heavyclip::{run_trajectory, schedule, Algorithm, NoiseModel, NormedSpace, OptimizerState, Order, Problem};
use proptest::prelude::{prop, prop_assert, proptest};

fn cosine(q: f64) -> (Problem, NoiseModel) {
    let space = NormedSpace::new(5, q).unwrap();
    let problem = Problem::cosine_sum(space, 1.0, vec![0.5, -0.3, 1.0, 2.0, 0.1]).unwrap();
    let mut noise = NoiseModel::new(1.5, 1.8, 1.0).unwrap();
    noise.calibrate(&problem, 10_000, 1.5, &mut stream_rng(0, u64::MAX)).unwrap();
    (problem, noise)
}

#[test]
fn nigt_matches_hand_recursion() {
    let space = NormedSpace::euclidean(1);
    let problem = Problem::quadratic(space, vec![1.0], vec![0.0], vec![1.0]).unwrap();
    let noise = NoiseModel::new(2.0, 3.0, 0.0).unwrap();
    let mut hp = schedule(5, 1.0, 1.0, 2.0, 100.0, 0.1, Order::Second).unwrap();
    hp.alpha = 0.5;
    hp.beta = 0.5;
    hp.eta = 0.1;
    let traj = run_trajectory(&problem, &noise, &hp, Algorithm::Nigt, &[0.1; 5], &mut stream_rng(0, 0)).unwrap();

    let (mut w, mut w_prev, mut m) = (1.0f64, 1.0f64, 0.0f64);
    for rec in &traj.records {
        assert_eq!(rec.f, 0.5 * w * w);
        let x = w + 0.5 * (w - w_prev) / 0.5;
        m = 0.5 * m + 0.5 * x;
        assert!((rec.m_norm - m.abs()).abs() < 1e-15);
        w_prev = w;
        w -= 0.1 * m.signum();
    }
    assert!((traj.final_point.as_slice()[0] - w).abs() < 1e-15);
}

#[test]
fn nigt_without_momentum_is_nsgd() {
    let (problem, noise) = cosine(1.5);
    let mut hp = schedule(500, 1.0, 1.0, 1.5, noise.moment_bound().unwrap(), 0.1, Order::First).unwrap();
    hp.alpha = 1.0;
    hp.beta = 0.0;
    let etas = vec![hp.eta; 500];
    let a = run_trajectory(&problem, &noise, &hp, Algorithm::Nsgd, &etas, &mut stream_rng(4, 0)).unwrap();
    let b = run_trajectory(&problem, &noise, &hp, Algorithm::Nigt, &etas, &mut stream_rng(4, 0)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn same_seed_same_trajectory() {
    let (problem, noise) = cosine(1.25);
    let hp = schedule(300, 1.0, 1.0, 1.5, noise.moment_bound().unwrap(), 0.1, Order::Second).unwrap();
    let etas = vec![hp.eta; 300];
    let run = |seed| run_trajectory(&problem, &noise, &hp, Algorithm::Nigt, &etas, &mut stream_rng(seed, 0)).unwrap();
    let (a, b, c) = (run(9), run(9), run(10));
    assert_eq!(a, b);
    assert_ne!(a, c);
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.f.to_bits(), y.f.to_bits());
    }
}

#[test]
fn hold_freezes_iterate_but_not_momentum() {
    let (problem, noise) = cosine(2.0);
    let hp = schedule(50, 1.0, 1.0, 1.5, noise.moment_bound().unwrap(), 0.1, Order::First).unwrap();
    let etas = warmup_with_hold(&hp, 20, heavyclip::WarmupMode::Hold);
    let traj = run_trajectory(&problem, &noise, &hp, Algorithm::Nsgd, &etas, &mut stream_rng(1, 0)).unwrap();
    let f1 = traj.records[0].f;
    assert!(traj.records[..21].iter().all(|r| r.f == f1));
    assert_ne!(traj.records[21].f, f1);
    assert_ne!(traj.records[5].m_norm, traj.records[10].m_norm);
}

proptest! {
    #![proptest_config(proptest::test_runner::Config::with_cases(64))]

    #[test]
    fn step_length_and_momentum_ball(seed in 0u64..1000, q in 1.1f64..2.0, algo in prop::bool::ANY) {
        let (problem, noise) = cosine(q);
        let algo = if algo { Algorithm::Nigt } else { Algorithm::Nsgd };
        let hp = schedule(200, 1.0, 1.0, 1.5, noise.moment_bound().unwrap(), 0.1, algo.order()).unwrap();
        let etas = vec![hp.eta; 200];
        let mut bad = Vec::new();
        run_trajectory_observed(&problem, &noise, &hp, algo, &etas, &mut stream_rng(seed, 0), |obs| {
            let m = obs.state.momentum();
            if m.norm() > hp.tau * (1.0 + 1e-12) {
                bad.push(format!("t={} momentum {} > τ {}", obs.t, m.norm(), hp.tau));
            }
            if !m.is_zero() {
                let step = obs.state.w().sub(obs.w_before).unwrap().norm();
                if (step - obs.eta).abs() > 1e-12 * obs.eta.max(1.0) {
                    bad.push(format!("t={} step {} vs η {}", obs.t, step, obs.eta));
                }
            }
            if obs.info.clipped_sample.norm() > hp.tau * (1.0 + 1e-12) {
                bad.push(format!("t={} sample above τ", obs.t));
            }
        }).unwrap();
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }
}

#[test]
fn fresh_state_starts_at_step_one() {
    let space = NormedSpace::euclidean(2);
    let st = OptimizerState::new(space.primal(vec![1.0, 2.0]).unwrap());
    assert_eq!(st.t(), 1);
    assert!(st.momentum().is_zero());
    assert_eq!(st.w(), st.w_prev());
}
