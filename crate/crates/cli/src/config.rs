//! Command configurations. Every field has a default, so an empty JSON
//! object (or no file at all) is a valid configuration; command-line flags
//! override file values, and the effective configuration is written next to
//! the results.

use std::path::{Path, PathBuf};

use nflbo::bayesopt::BoConfig;
use nflbo::bench::{landscape_by_name, AlgorithmSpec, Landscape};
use nflbo::metaheuristics::{EsConfig, GaConfig, SaConfig};
use nflbo::nflt::{FunctionClass, DEFAULT_CLASS_CAP};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::evaluator::EvaluatorConfig;

fn default_out() -> PathBuf {
    PathBuf::from("nflbo-out")
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NfltVerifyConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub m: usize,
    pub r: u32,
    pub k: usize,
    pub class: FunctionClass,
    pub policies: Vec<String>,
    /// Seed of the `seeded-shuffle` policy; the master seed when absent.
    pub shuffle_seed: Option<u64>,
    pub cap: u64,
}

impl Default for NfltVerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: default_out(),
            m: 5,
            r: 3,
            k: 5,
            class: FunctionClass::Full,
            policies: vec![
                "lexicographic".into(),
                "reverse".into(),
                "seeded-shuffle".into(),
            ],
            shuffle_seed: None,
            cap: DEFAULT_CLASS_CAP,
        }
    }
}

/// Per-algorithm settings; only the section of the selected algorithm is used.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmParams {
    pub sa: SaConfig,
    pub ga: GaConfig,
    pub es: EsConfig,
    pub bo: BoConfig,
}

impl AlgorithmParams {
    pub fn spec(&self, id: &str) -> CliResult<AlgorithmSpec> {
        let spec = match id {
            "random" => AlgorithmSpec::Random,
            "sa" => AlgorithmSpec::Sa(self.sa.clone()),
            "ga" => AlgorithmSpec::Ga(self.ga.clone()),
            "es" => AlgorithmSpec::Es(self.es.clone()),
            "bo" => AlgorithmSpec::Bo(self.bo.clone()),
            other => AlgorithmSpec::from_id(other)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeConfig {
    pub name: String,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    /// Half-width of the needle peak (needle only).
    #[serde(default = "default_needle_width")]
    pub needle_width: f64,
    /// Overrides the landscape's default success threshold.
    #[serde(default)]
    pub threshold: Option<f64>,
}

fn default_dimension() -> usize {
    2
}

fn default_needle_width() -> f64 {
    0.05
}

impl LandscapeConfig {
    pub fn named(name: &str, dimension: usize) -> Self {
        Self {
            name: name.into(),
            dimension,
            needle_width: default_needle_width(),
            threshold: None,
        }
    }

    /// Parses `name` or `name:dimension`.
    pub fn parse(s: &str) -> CliResult<Self> {
        let (name, dim) = match s.split_once(':') {
            Some((n, d)) => (
                n,
                d.parse()
                    .map_err(|_| CliError::Config(format!("bad dimension in {s:?}")))?,
            ),
            None => (s, default_dimension()),
        };
        Ok(Self::named(name, dim))
    }

    pub fn build(&self) -> CliResult<Landscape> {
        let l = landscape_by_name(&self.name, self.dimension, self.needle_width)?;
        Ok(match self.threshold {
            Some(t) => l.with_threshold(t),
            None => l,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub algorithm: String,
    pub budget: usize,
    /// Built-in landscape; `sphere` in two dimensions when neither this nor
    /// `evaluator` is given.
    pub landscape: Option<LandscapeConfig>,
    pub evaluator: Option<EvaluatorConfig>,
    pub params: AlgorithmParams,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: default_out(),
            algorithm: "bo".into(),
            budget: 40,
            landscape: None,
            evaluator: None,
            params: AlgorithmParams::default(),
        }
    }
}

impl OptimizeConfig {
    /// Fills in the default landscape and checks for conflicts.
    pub fn resolve(&mut self) -> CliResult<()> {
        match (&self.landscape, &self.evaluator) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either a landscape or an evaluator, not both".into(),
                ))
            }
            (None, None) => self.landscape = Some(LandscapeConfig::named("sphere", 2)),
            _ => {}
        }
        if self.budget == 0 {
            return Err(CliError::Config("budget must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub algorithms: Vec<String>,
    pub landscapes: Vec<LandscapeConfig>,
    /// Number of runs per cell; run `i` uses the seed derived from the
    /// master seed and `i`, shared across algorithms so runs pair up.
    pub runs: u64,
    pub budget: usize,
    pub jobs: usize,
    pub stop_at_known_best: bool,
    /// Algorithm every other one is sign-tested against.
    pub baseline: String,
    pub params: AlgorithmParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: default_out(),
            algorithms: vec!["random".into(), "bo".into()],
            landscapes: vec![
                LandscapeConfig::named("sphere", 2),
                LandscapeConfig::named("needle", 2),
                LandscapeConfig::named("step", 2),
            ],
            runs: 20,
            budget: 60,
            jobs: 1,
            stop_at_known_best: true,
            baseline: "random".into(),
            params: AlgorithmParams::default(),
        }
    }
}

/// Fixed GP hyperparameters for plotting; fitted by maximum likelihood when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotHyperparams {
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpPlotConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Inline observations, one `[x, y]` pair per row.
    pub data: Vec<Vec<f64>>,
    /// CSV file with an `x,y` header; replaces `data` when given.
    pub data_file: Option<PathBuf>,
    pub grid_points: usize,
    /// Grid range; defaults to the data range padded by 10 % on each side.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub hyperparameters: Option<PlotHyperparams>,
    /// EI offset; `0.01·|best|` when absent.
    pub xi: Option<f64>,
}

impl Default for GpPlotConfig {
    fn default() -> Self {
        let xs = [0.05, 0.25, 0.45, 0.7, 0.95];
        Self {
            seed: 0,
            out: default_out(),
            data: xs
                .iter()
                .map(|&x: &f64| vec![x, (6.0 * x).sin() + 0.5 * x])
                .collect(),
            data_file: None,
            grid_points: 201,
            lower: None,
            upper: None,
            hyperparameters: None,
            xi: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(v: &T) {
        let s = serde_json::to_string(v).unwrap();
        let back: T = serde_json::from_str(&s).unwrap();
        assert_eq!(&back, v);
    }

    #[test]
    fn configs_round_trip() {
        round_trip(&NfltVerifyConfig::default());
        let mut o = OptimizeConfig::default();
        o.resolve().unwrap();
        round_trip(&o);
        round_trip(&BenchConfig::default());
        round_trip(&GpPlotConfig::default());
    }

    #[test]
    fn empty_object_is_default() {
        let c: BenchConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, BenchConfig::default());
        assert!(serde_json::from_str::<BenchConfig>(r#"{"budgett": 3}"#).is_err());
    }

    #[test]
    fn landscape_shorthand() {
        let l = LandscapeConfig::parse("needle:3").unwrap();
        assert_eq!((l.name.as_str(), l.dimension), ("needle", 3));
        assert_eq!(LandscapeConfig::parse("sphere").unwrap().dimension, 2);
        assert!(LandscapeConfig::parse("sphere:x").is_err());
    }

    #[test]
    fn unknown_algorithm() {
        let e = AlgorithmParams::default().spec("hill-climb").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn landscape_and_evaluator_conflict() {
        let mut o = OptimizeConfig {
            landscape: Some(LandscapeConfig::named("sphere", 2)),
            evaluator: Some(EvaluatorConfig {
                program: "true".into(),
                args: vec![],
                lower: vec![0.0],
                upper: vec![1.0],
                timeout_ms: 10,
            }),
            ..OptimizeConfig::default()
        };
        assert!(o.resolve().is_err());
    }
}
