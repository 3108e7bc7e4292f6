use std::path::Path;

use rayon::prelude::*;

use mma_core::conditions::classify_model;
use mma_core::config::{load_model, parse_model};
use mma_core::experiments::{mz_check, ExperimentOptions};
use mma_core::simulate::{SimOptions, Simulator};

const PATHS: u64 = 10_000;

/// Asymptotic Kolmogorov distribution tail `P(K > λ)`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let s: f64 = (1..=100).map(|k| {
        let k = k as f64;
        let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
        sign * (-2.0 * k * k * lambda * lambda).exp()
    }).sum();
    (2.0 * s).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> (f64, f64) {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_sf(lambda))
}

#[test]
fn ks_detects_a_shift_and_accepts_equal_samples() {
    let a: Vec<f64> = (0..2000).map(|i| (i as f64 + 0.5) / 2000.0).collect();
    let b: Vec<f64> = (0..2000).map(|i| (i as f64 + 0.25) / 2000.0).collect();
    let shifted: Vec<f64> = a.iter().map(|x| x + 0.1).collect();
    assert!(ks_two_sample(a.clone(), b).1 > 0.99);
    assert!(ks_two_sample(a, shifted).1 < 1e-6);
    assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-3);
}

fn increments_match(toml: &str) {
    let model = parse_model(toml).and_then(|s| s.build()).unwrap();
    let opts = SimOptions { t_max: 6.0, points_per_decade: 1, seed: 7, workers: 0 };
    let sim = Simulator::with_grid(&model, opts, vec![0.0, 1.0, 5.0, 6.0]).unwrap();
    let jumps: Vec<[f64; 4]> = (0..PATHS)
        .into_par_iter()
        .map(|id| {
            let p = sim.path(id).unwrap();
            std::array::from_fn(|i| p.past_jumps[i] + p.window_jumps[i])
        })
        .collect();
    let early: Vec<f64> = jumps.iter().map(|j| j[1] - j[0]).collect();
    let late: Vec<f64> = jumps.iter().map(|j| j[3] - j[2]).collect();
    let (d, p) = ks_two_sample(early, late);
    assert!(p > 0.01, "X*(6) − X*(5) and X*(1) differ in law: D = {d:.4}, p = {p:.4}");
}

#[test]
fn supou_increments_are_stationary() {
    increments_match(
        r#"
        [levy]
        family = "compound-poisson"
        rate = 2.0
        sign_mix = 1.0
        jumps = { dist = "exponential", rate = 1.0 }

        [mixing]
        family = "gamma-density"
        shape = 3.0
        rate = 1.0
        mass = 1.0

        [kernel]
        variant = "supou"
        "#,
    );
}

#[test]
fn trawl_increments_are_stationary() {
    increments_match(
        r#"
        [levy]
        family = "atom-list"
        atoms = [[1.0, 1.5], [-0.5, 0.5]]

        [mixing]
        family = "lebesgue"
        lo = 0.0
        hi = 1.0

        [kernel]
        variant = "trawl"
        psi = { form = "exponential", rate = 0.7 }
        "#,
    );
}

#[test]
fn running_max_stays_below_the_log_corrected_rate() {
    for file in ["supou-finite-variance.toml", "supou-pareto.toml", "supou-long-memory.toml"] {
        let m = load_model(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(file)).unwrap();
        let report = classify_model(&m.levy, &m.mixing, &m.kernel, m.b).unwrap();
        let opts = ExperimentOptions { n_paths: 200, t_max: 1e4, points_per_decade: 20, seed: 42, ..ExperimentOptions::default() };
        let r = mz_check(&m, &report, &opts).unwrap();
        let half = r.curve.len() / 2;
        let worst = r.curve[half..]
            .iter()
            .filter(|p| p.t > 1.0)
            .map(|p| p.median_running_max / (p.normalizer * p.t.ln()))
            .fold(0.0, f64::max);
        assert!(worst <= 1.25, "{file}: median M(t) / (t^(1/γ) log t) reaches {worst:.3}");
    }
}
