use nflbo::bayesopt::*;
use nflbo::gp::{GpHyperparams, GpModel};
use nflbo::{BoxDomain, FitnessFunction, RngStream};

fn quadratic() -> FitnessFunction {
    let d = BoxDomain::cube(1, 0.0, 1.0).unwrap();
    FitnessFunction::new(d, |x: &[f64]| -(x[0] - 0.7).powi(2))
}

fn config(init: usize, iterations: usize) -> BoConfig {
    BoConfig {
        init_design_size: init,
        iterations,
        ..BoConfig::default()
    }
}

#[test]
fn finds_smooth_one_d_optimum() {
    let cfg = config(5, 15);
    let mut hits = 0;
    for seed in 0..20 {
        let t = bo_run(&mut quadratic(), &cfg, &mut RngStream::new(seed)).unwrap();
        if (t.best_point().unwrap()[0] - 0.7).abs() <= 0.05 {
            hits += 1;
        }
    }
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn accounting_and_domain() {
    let cfg = config(4, 9);
    let d = BoxDomain::new(vec![-2.0, 0.0], vec![1.0, 3.0]).unwrap();
    let mut f = FitnessFunction::new(d.clone(), |x: &[f64]| {
        -(x[0] + 1.0).powi(2) - (x[1] - 2.0).powi(2)
    });
    let t = bo_run(&mut f, &cfg, &mut RngStream::new(3)).unwrap();
    assert_eq!(t.len(), 13);
    // The surrogate never touches the true fitness.
    assert_eq!(f.call_count(), 13);
    assert!(t
        .dataset
        .records()
        .iter()
        .all(|r| d.contains(&r.x) && !r.clamped));
    // The first four points are a Latin hypercube.
    for dim in 0..2 {
        let mut cells: Vec<usize> = t.dataset.records()[..4]
            .iter()
            .map(|r| ((r.x[dim] - d.lower()[dim]) / d.width(dim) * 4.0).floor() as usize)
            .collect();
        cells.sort();
        assert_eq!(cells, vec![0, 1, 2, 3]);
    }
}

#[test]
fn budget_shortfall_is_an_error() {
    let mut f = quadratic().with_budget(10);
    assert!(bo_run(&mut f, &config(5, 15), &mut RngStream::new(0)).is_err());
}

#[test]
fn constant_fitness() {
    let d = BoxDomain::cube(2, 0.0, 1.0).unwrap();
    let mut f = FitnessFunction::new(d, |_: &[f64]| 4.25);
    let t = bo_run(&mut f, &config(5, 10), &mut RngStream::new(1)).unwrap();
    assert_eq!(t.len(), 15);
    assert!(t.best_so_far.iter().all(|&b| b == 4.25));

    // No improvement is expected where the constant has been observed.
    let d = BoxDomain::cube(2, 0.0, 1.0).unwrap();
    let mut f = FitnessFunction::new(d, |_: &[f64]| 4.25);
    let cfg = config(5, 3);
    let mut bo = BayesOpt::new(cfg.clone()).unwrap();
    let t = nflbo::run_sampler(&mut bo, &mut f, &mut RngStream::new(1), Some(8)).unwrap();
    let model = bo.model().unwrap();
    for r in t.dataset.records().iter().take(7) {
        assert!(acquisition_value(model, &cfg, 4.25, &r.x) < 1e-9);
    }
}

#[test]
fn deterministic_runs() {
    let a = bo_run(&mut quadratic(), &config(3, 6), &mut RngStream::new(8)).unwrap();
    let b = bo_run(&mut quadratic(), &config(3, 6), &mut RngStream::new(8)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn lhs_three_d_strata() {
    let d = BoxDomain::new(vec![0.0, -1.0, 10.0], vec![1.0, 1.0, 20.0]).unwrap();
    let pts = latin_hypercube(10, &d, &mut RngStream::new(6));
    assert_eq!(pts.len(), 10);
    for dim in 0..3 {
        let mut cells: Vec<usize> = pts
            .iter()
            .map(|p| ((p[dim] - d.lower()[dim]) / d.width(dim) * 10.0).floor() as usize)
            .collect();
        cells.sort();
        assert_eq!(cells, (0..10).collect::<Vec<_>>());
    }
}

fn noiseless(xs: Vec<Vec<f64>>, ys: Vec<f64>, length: f64) -> GpModel {
    let hyper = GpHyperparams {
        length_scales: vec![length],
        signal_variance: 1.0,
        noise_variance: 0.0,
        prior_mean: 0.0,
    };
    GpModel::new(xs, ys, hyper, 0.0).unwrap()
}

#[test]
fn acquisition_avoids_the_only_sample() {
    let d = BoxDomain::cube(1, 0.0, 1.0).unwrap();
    let m = noiseless(vec![vec![0.5]], vec![0.0], 0.2);
    let cfg = BoConfig::default();
    assert!(acquisition_value(&m, &cfg, 0.0, &[0.5]) < 1e-9);
    let x = maximize_acquisition(&m, &d, &cfg, &mut RngStream::new(0));
    assert!((x[0] - 0.5).abs() > 0.05, "{x:?}");
    let again = maximize_acquisition(&m, &d, &cfg, &mut RngStream::new(0));
    assert_eq!(x, again);
}

#[test]
fn acquisition_maximum_matches_dense_grid() {
    let d = BoxDomain::cube(1, -1.0, 1.0).unwrap();
    let cfg = BoConfig::default();
    for (a, y, length) in [(0.5, 0.0, 0.3), (0.3, 1.0, 0.5), (0.7, -2.0, 0.2)] {
        let m = noiseless(vec![vec![-a], vec![a]], vec![y, y], length);
        let best = y;
        let x = maximize_acquisition(&m, &d, &cfg, &mut RngStream::new(1));
        let found = acquisition_value(&m, &cfg, best, &x);
        let n = 100_000;
        let grid_max = (0..n)
            .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
            .map(|g| acquisition_value(&m, &cfg, best, &[g]))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            (found - grid_max).abs() < 1e-6 * (1.0 + grid_max),
            "a={a}: found {found} grid {grid_max}"
        );
    }
}

#[test]
fn ei_matches_monte_carlo() {
    let mut pick = RngStream::new(77);
    let mut draws = RngStream::new(78);
    for _ in 0..20 {
        let mean = pick.uniform_in(-2.0, 2.0);
        let sd = pick.uniform_in(0.05, 2.0);
        let best = pick.uniform_in(-2.0, 2.0);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let imp = (mean + sd * draws.normal() - best).max(0.0);
            s += imp;
            s2 += imp * imp;
        }
        let mc = s / n as f64;
        let se = ((s2 / n as f64 - mc * mc) / n as f64).sqrt();
        let ei = expected_improvement(mean, sd * sd, best, 0.0);
        assert!(ei >= 0.0);
        assert!(
            (ei - mc).abs() < 3.0 * se + 1e-12,
            "mean {mean} sd {sd} best {best}: {ei} vs {mc} ± {se}"
        );
    }
}
