//! The four commands. Each returns the process exit status on success;
//! errors carry their own status (see [`CliError::exit_code`]).

use std::fmt::Write as _;

use nflbo::bayesopt::expected_improvement;
use nflbo::bench::{results_csv, run_experiment_with, summarize, ExperimentSummary, RunOptions};
use nflbo::gp::{gp_fit_xy, FitConfig, GpHyperparams, GpModel};
use nflbo::nflt::{builtin_policy, verify_on_class, SearchPolicy, Verdict};
use nflbo::{FitnessFunction, RngStream};
use serde::Serialize;

use crate::config::{BenchConfig, GpPlotConfig, NfltVerifyConfig, OptimizeConfig};
use crate::error::{CliError, CliResult, EXIT_COUNTEREXAMPLE, EXIT_OK};
use crate::evaluator::external_fitness;
use crate::output::{ensure_dir, out_file, write_atomic, write_json};

/// Writes `nflt_report.json`, `success.csv` and `config.json`. Exit status 1
/// when some policy's statistics differ from the first policy's.
pub fn nflt_verify(cfg: &NfltVerifyConfig) -> CliResult<i32> {
    if cfg.policies.len() < 2 {
        return Err(CliError::Config(
            "nflt-verify needs at least two policies".into(),
        ));
    }
    let shuffle_seed = cfg.shuffle_seed.unwrap_or(cfg.seed);
    let boxed: Vec<Box<dyn SearchPolicy>> = cfg
        .policies
        .iter()
        .map(|p| builtin_policy(p, shuffle_seed))
        .collect::<Result<_, _>>()?;
    let policies: Vec<&dyn SearchPolicy> = boxed.iter().map(|p| p.as_ref()).collect();
    let report = verify_on_class(&policies, cfg.class, cfg.m, cfg.r, cfg.k, cfg.cap)?;

    ensure_dir(&cfg.out)?;
    write_json(&out_file(&cfg.out, "config.json"), cfg)?;
    write_json(&out_file(&cfg.out, "nflt_report.json"), &report)?;
    let mut csv = String::from("policy,step,hits,fraction\n");
    for row in &report.success.rows {
        for (j, (h, f)) in row.hits.iter().zip(&row.fractions).enumerate() {
            let _ = writeln!(csv, "{},{},{},{:?}", row.policy, j + 1, h, f);
        }
    }
    write_atomic(&out_file(&cfg.out, "success.csv"), csv.as_bytes())?;

    match &report.verdict {
        Verdict::Equal => {
            println!(
                "EQUAL: {} policies, {} class m={} r={} ({} functions), k={}",
                report.policies.len(),
                cfg.class.name(),
                cfg.m,
                cfg.r,
                report.class.size,
                cfg.k
            );
            Ok(EXIT_OK)
        }
        Verdict::Counterexample(c) => {
            println!(
                "COUNTEREXAMPLE at step {}: {} vs {} differ in {} for {:?} ({} vs {})",
                c.step, c.policy_a, c.policy_b, c.statistic, c.trace, c.count_a, c.count_b
            );
            for row in &report.success.rows {
                println!(
                    "  {} step-1 success {}/{}",
                    row.policy, row.hits[0], report.success.class_size
                );
            }
            Ok(EXIT_COUNTEREXAMPLE)
        }
    }
}

#[derive(Serialize)]
struct OptimizeSummary<'a> {
    algorithm: &'a str,
    objective: String,
    dimension: usize,
    seed: u64,
    budget: usize,
    evaluations: usize,
    best: f64,
    best_x: Vec<f64>,
    threshold: Option<f64>,
    evals_to_threshold: Option<usize>,
    clamped: usize,
}

/// Writes `trace.csv`, `summary.json` and `config.json`.
pub fn optimize(cfg: &OptimizeConfig) -> CliResult<i32> {
    let mut cfg = cfg.clone();
    cfg.resolve()?;
    let spec = cfg.params.spec(&cfg.algorithm)?;
    let (mut f, objective, threshold): (FitnessFunction, String, Option<f64>) =
        match (&cfg.landscape, &cfg.evaluator) {
            (_, Some(e)) => (
                external_fitness(e)?,
                format!("external:{}", e.program),
                None,
            ),
            (Some(l), None) => {
                let land = l.build()?;
                (land.fitness(), land.name.clone(), Some(land.threshold))
            }
            (None, None) => unreachable!("resolve fills in a landscape"),
        };
    let dim = f.domain().dim();
    let mut rng = RngStream::new(cfg.seed);
    let trace = spec.run(&mut f, cfg.budget, &mut rng)?;

    let mut csv = String::from("iteration");
    for d in 0..dim {
        let _ = write!(csv, ",x{d}");
    }
    csv.push_str(",y,best_so_far\n");
    for (i, (r, b)) in trace
        .dataset
        .records()
        .iter()
        .zip(&trace.best_so_far)
        .enumerate()
    {
        let _ = write!(csv, "{}", i + 1);
        for v in &r.x {
            let _ = write!(csv, ",{v:?}");
        }
        let _ = writeln!(csv, ",{:?},{:?}", r.y, b);
    }
    let summary = OptimizeSummary {
        algorithm: spec.id(),
        objective,
        dimension: dim,
        seed: cfg.seed,
        budget: cfg.budget,
        evaluations: trace.len(),
        best: trace.final_best().unwrap_or(f64::NEG_INFINITY),
        best_x: trace.best_point().cloned().unwrap_or_default(),
        threshold,
        evals_to_threshold: threshold.and_then(|t| trace.evaluations_to_threshold(t)),
        clamped: trace.clamped_count(),
    };

    ensure_dir(&cfg.out)?;
    write_json(&out_file(&cfg.out, "config.json"), &cfg)?;
    write_atomic(&out_file(&cfg.out, "trace.csv"), csv.as_bytes())?;
    write_json(&out_file(&cfg.out, "summary.json"), &summary)?;
    println!(
        "{} on {}: best {} after {} evaluations",
        summary.algorithm, summary.objective, summary.best, summary.evaluations
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct BenchSummary<'a> {
    seeds: &'a [u64],
    #[serde(flatten)]
    summary: ExperimentSummary,
}

/// Writes `results.csv`, `summary.json` and `config.json`.
pub fn bench(cfg: &BenchConfig) -> CliResult<i32> {
    if cfg.runs == 0 {
        return Err(CliError::Config("runs must be at least 1".into()));
    }
    let specs = cfg
        .algorithms
        .iter()
        .map(|a| cfg.params.spec(a))
        .collect::<CliResult<Vec<_>>>()?;
    let landscapes = cfg
        .landscapes
        .iter()
        .map(|l| l.build())
        .collect::<CliResult<Vec<_>>>()?;
    let seeds: Vec<u64> = (0..cfg.runs)
        .map(|i| RngStream::derive_seed(cfg.seed, i))
        .collect();
    let options = RunOptions {
        jobs: cfg.jobs.max(1),
        stop_at_known_best: cfg.stop_at_known_best,
    };
    let rows = run_experiment_with(&specs, &landscapes, &seeds, cfg.budget, &options)?;
    let summary = summarize(&rows, cfg.budget, &cfg.baseline);

    ensure_dir(&cfg.out)?;
    write_json(&out_file(&cfg.out, "config.json"), cfg)?;
    write_atomic(
        &out_file(&cfg.out, "results.csv"),
        results_csv(&rows).as_bytes(),
    )?;
    for c in &summary.cells {
        println!(
            "{:>8} {:>10} d={} median evals {} ({}/{} reached threshold)",
            c.algorithm,
            c.landscape,
            c.dimension,
            c.median_evals.map_or(c.status.clone(), |m| m.to_string()),
            c.successes,
            c.runs
        );
    }
    for c in &summary.comparisons {
        println!(
            "{} vs {} on {} d={}: {} (p = {:.4})",
            c.algorithm, c.baseline, c.landscape, c.dimension, c.verdict, c.test.p_value
        );
    }
    write_json(
        &out_file(&cfg.out, "summary.json"),
        &BenchSummary {
            seeds: &seeds,
            summary,
        },
    )?;
    Ok(EXIT_OK)
}

fn read_rows(cfg: &GpPlotConfig) -> CliResult<Vec<Vec<f64>>> {
    let Some(path) = &cfg.data_file else {
        return Ok(cfg.data.clone());
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    CliError::Config(format!("{}: not a number: {s:?}", path.display()))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Serialize)]
struct PlotSummary {
    x_star: f64,
    ei_max: f64,
    best_observed: f64,
    hyperparameters: GpHyperparams,
}

/// Posterior mean, ±2σ band and EI on a uniform grid, written as
/// tab-separated `gp_plot.tsv` whose first line marks the EI maximizer.
pub fn gp_plotdata(cfg: &GpPlotConfig) -> CliResult<i32> {
    let rows = read_rows(cfg)?;
    if rows.is_empty() {
        return Err(CliError::Config(
            "gp-plotdata needs at least one observation".into(),
        ));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != 2) {
        return Err(CliError::Config(format!(
            "gp-plotdata takes 1-D data as [x, y] rows; found a row with {} values",
            bad.len()
        )));
    }
    if cfg.grid_points < 2 {
        return Err(CliError::Config("grid_points must be at least 2".into()));
    }
    let xs: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0]]).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let model = match &cfg.hyperparameters {
        Some(h) => {
            let hyper = GpHyperparams {
                length_scales: vec![h.length_scale],
                signal_variance: h.signal_variance,
                noise_variance: h.noise_variance,
                prior_mean: ys.iter().sum::<f64>() / ys.len() as f64,
            };
            GpModel::new(xs.clone(), ys.clone(), hyper, 0.0)?
        }
        None => gp_fit_xy(
            &xs,
            &ys,
            &FitConfig::default(),
            &mut RngStream::new(cfg.seed),
        )?,
    };

    let lo_data = xs.iter().map(|x| x[0]).fold(f64::INFINITY, f64::min);
    let hi_data = xs.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi_data > lo_data {
        0.1 * (hi_data - lo_data)
    } else {
        0.5
    };
    let lower = cfg.lower.unwrap_or(lo_data - pad);
    let upper = cfg.upper.unwrap_or(hi_data + pad);
    if !(lower < upper) {
        return Err(CliError::Config(format!(
            "empty grid range [{lower}, {upper}]"
        )));
    }
    let best = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let xi = cfg.xi.unwrap_or(0.01 * best.abs());

    let n = cfg.grid_points;
    let mut lines = Vec::with_capacity(n);
    let (mut x_star, mut ei_max) = (lower, f64::NEG_INFINITY);
    for i in 0..n {
        let x = if i + 1 == n {
            upper
        } else {
            lower + (upper - lower) * i as f64 / (n - 1) as f64
        };
        let p = model.posterior(&[x])?;
        let sd = p.std_dev();
        let ei = expected_improvement(p.mean, p.variance, best, xi);
        if ei > ei_max {
            ei_max = ei;
            x_star = x;
        }
        lines.push(format!(
            "{x:?}\t{:?}\t{:?}\t{:?}\t{ei:?}",
            p.mean,
            p.mean - 2.0 * sd,
            p.mean + 2.0 * sd
        ));
    }
    let mut text = format!("# x* = {x_star:?}\nx\tmean\tlower\tupper\tei\n");
    for l in lines {
        text.push_str(&l);
        text.push('\n');
    }

    ensure_dir(&cfg.out)?;
    write_json(&out_file(&cfg.out, "config.json"), cfg)?;
    write_atomic(&out_file(&cfg.out, "gp_plot.tsv"), text.as_bytes())?;
    write_json(
        &out_file(&cfg.out, "gp_plot.json"),
        &PlotSummary {
            x_star,
            ei_max,
            best_observed: best,
            hyperparameters: model.hyper().clone(),
        },
    )?;
    println!("x* = {x_star} (EI {ei_max})");
    Ok(EXIT_OK)
}
