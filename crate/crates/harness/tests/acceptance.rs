//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.

use std::time::Instant;

use heavyclip_harness::config::{RunConfig, Settings};
use heavyclip_harness::experiment::{rate_sweep, run, Summary};
use heavyclip_harness::verify::{verify, VerifyOptions, VerifyReport};

fn config(dir: &std::path::Path, overrides: &[(&str, &str, &str)]) -> RunConfig {
    let mut st = Settings::default();
    st.set("run", "out", dir.to_str().unwrap()).unwrap();
    for &(section, key, value) in overrides {
        st.set(section, key, value).unwrap();
    }
    RunConfig::from_settings(&st).unwrap()
}

fn report(n: usize, pass: bool, detail: String) -> bool {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn band(delta: f64, n: usize) -> f64 {
    1.96 * (delta * (1.0 - delta) / n as f64).sqrt()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn criterion_1() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        &[
            ("run", "algo", "nsgd"),
            ("run", "seeds", "20"),
            ("run", "t_grid", "1000,10000,100000"),
            ("noise", "tail", "1.8"),
            ("noise", "p_moment", "1.5"),
        ],
    );
    let start = Instant::now();
    let rep = rate_sweep(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let fit = rep.fits.iter().find(|f| f.metric == "avg_grad_norm").unwrap();
    report(
        1,
        (fit.slope + 0.2).abs() <= 0.12 && secs <= 300.0,
        format!("slope {:.4} ± {:.4}, target -0.20 ± 0.12, {secs:.1}s", fit.slope, fit.stderr),
    )
}

fn criterion_2() -> bool {
    let mut mins = Vec::new();
    for algo in ["nsgd", "nigt"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            dir.path(),
            &[
                ("run", "algo", algo),
                ("run", "seeds", "20"),
                ("run", "T", "100000"),
                ("noise", "p_moment", "2"),
                ("noise", "tail", "3"),
            ],
        );
        let rep = run(&cfg).unwrap();
        mins.push(mean(rep.summaries.iter().map(|s| s.min_grad_norm)));
    }
    report(
        2,
        mins[1] <= 1.1 * mins[0],
        format!("mean min ‖∇F‖: nigt {:.4e} vs nsgd {:.4e}", mins[1], mins[0]),
    )
}

fn criteria_3_to_5() -> [bool; 3] {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        &[
            ("run", "algo", "nsgd"),
            ("run", "seeds", "100"),
            ("run", "T", "10000"),
            ("noise", "tail", "1.8"),
            ("noise", "p_moment", "1.5"),
        ],
    );
    let rep = run(&cfg).unwrap();
    let n = rep.summaries.len();
    let allowed = cfg.delta + band(cfg.delta, n);
    let frac = |bad: fn(&Summary) -> bool| rep.summaries.iter().filter(|s| bad(s)).count() as f64 / n as f64;
    let active: usize = rep.summaries.iter().map(|s| s.descent_checked_steps).sum();
    let cert = &rep.certificate;
    let descent = frac(|s| s.descent_violations > 0);
    let eps = frac(|s| s.eps_hat_violations > 0);
    let last = frac(|s| s.last_iterate_gap > 1e-9);
    [
        report(
            3,
            descent <= allowed,
            format!(
                "violating fraction {descent:.3} ≤ {allowed:.3}; burn-in {}, {active} steps above m_threshold {:.4e} (τ = {:.4e})",
                cert.burn_in, cert.m_threshold, cert.tau
            ),
        ),
        report(
            4,
            eps <= allowed,
            format!("violating fraction {eps:.3} ≤ {allowed:.3}; eps_bound {:.4e}", cert.eps_bound),
        ),
        report(5, last <= allowed, format!("violating fraction {last:.3} ≤ {allowed:.3}")),
    ]
}

fn suite_criteria(rep: &VerifyReport, secs: f64) -> [bool; 4] {
    let group = |prefix: &str| -> (bool, usize, usize) {
        let checks: Vec<_> = rep.checks.iter().filter(|c| c.name.starts_with(prefix)).collect();
        assert!(!checks.is_empty(), "no checks named {prefix}");
        (
            checks.iter().all(|c| c.pass),
            checks.len(),
            checks.iter().map(|c| c.samples).sum(),
        )
    };
    let (s_ok, s_groups, s_samples) = group("s_sequence_majorant");
    let coverage: Vec<String> = rep
        .checks
        .iter()
        .filter(|c| c.name.starts_with("coverage["))
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    let (c_ok, c_groups, _) = group("coverage[");
    let (t_ok, _, t_samples) = group("truncation_bias_variance");
    let suites = [
        "duality_map",
        "smooth_norm",
        "clip",
        "one_step",
        "smooth_upper",
        "taylor_value",
        "taylor_gradient",
        "finite_difference",
    ];
    let mut zero = true;
    for name in suites {
        zero &= rep
            .checks
            .iter()
            .filter(|c| c.name.starts_with(name))
            .all(|c| c.violations == 0);
    }
    [
        report(6, s_ok, format!("{s_groups} stream families, {s_samples} streams, zero violations required")),
        report(7, c_ok && c_groups == 5, coverage.join("; ")),
        report(8, t_ok, format!("{t_samples} samples over 5 truncation levels")),
        report(
            9,
            zero && rep.passed && secs <= 600.0,
            format!("{} checks, {} failed, full verify {secs:.1}s", rep.checks.len(), rep.failures()),
        ),
    ]
}

#[test]
fn acceptance() {
    let mut results = vec![criterion_1(), criterion_2()];
    results.extend(criteria_3_to_5());

    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[]);
    let start = Instant::now();
    let rep = verify(&cfg, VerifyOptions::default()).unwrap();
    results.extend(suite_criteria(&rep, start.elapsed().as_secs_f64()));

    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
