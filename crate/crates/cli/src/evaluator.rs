//! Bridge to an external evaluator process.
//!
//! The child is started once per run and kept alive. For each evaluation the
//! bridge writes one line of space-separated coordinates to the child's
//! standard input and reads one line holding a single real number from its
//! standard output. A missing answer within the timeout, a closed stream, or
//! anything that is not a finite number is an evaluator failure.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use nflbo::{BoxDomain, EvaluatorError, FitnessFunction, Objective};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluatorConfig {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    10_000
}

impl EvaluatorConfig {
    pub fn domain(&self) -> CliResult<BoxDomain> {
        BoxDomain::new(self.lower.clone(), self.upper.clone()).map_err(CliError::from)
    }
}

pub struct ExternalEvaluator {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    dead: bool,
}

impl ExternalEvaluator {
    pub fn spawn(config: &EvaluatorConfig) -> CliResult<Self> {
        let mut child = Command::new(&config.program)
            .args(&config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| CliError::Evaluator(format!("cannot start {}: {e}", config.program)))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            lines: rx,
            timeout: Duration::from_millis(config.timeout_ms),
            dead: false,
        })
    }

    fn kill(&mut self) {
        self.dead = true;
        self.stdin = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        // Closing stdin lets a well-behaved child exit on its own.
        self.stdin = None;
        if !self.dead {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

/// One input line: coordinates in shortest round-trip form (exponent
/// notation for very small or large magnitudes), space separated.
pub fn format_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
    parts.join(" ")
}

pub fn parse_value(line: &str) -> Result<f64, EvaluatorError> {
    let t = line.trim();
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(EvaluatorError::Protocol(format!("non-finite value {v}"))),
        Err(_) => Err(EvaluatorError::Protocol(format!("not a number: {t:?}"))),
    }
}

impl Objective for ExternalEvaluator {
    fn value(&mut self, x: &[f64]) -> Result<f64, EvaluatorError> {
        if self.dead {
            return Err(EvaluatorError::Io("evaluator was terminated".into()));
        }
        let Some(stdin) = self.stdin.as_mut() else {
            return Err(EvaluatorError::Io("evaluator input closed".into()));
        };
        let line = format!("{}\n", format_point(x));
        if let Err(e) = stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()) {
            self.kill();
            return Err(EvaluatorError::Io(e.to_string()));
        }
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => parse_value(&reply),
            Ok(Err(e)) => {
                self.kill();
                Err(EvaluatorError::Io(e.to_string()))
            }
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                Err(EvaluatorError::Timeout {
                    millis: self.timeout.as_millis() as u64,
                })
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.kill();
                Err(EvaluatorError::Protocol(
                    "evaluator closed its output".into(),
                ))
            }
        }
    }
}

/// Fitness oracle backed by a fresh child process.
pub fn external_fitness(config: &EvaluatorConfig) -> CliResult<FitnessFunction> {
    let domain = config.domain()?;
    let child = ExternalEvaluator::spawn(config)?;
    Ok(FitnessFunction::new(domain, child))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_format_round_trips() {
        let x = [0.1, -2.5e-7, 3.0, 1.0 / 3.0];
        let line = format_point(&x);
        let back: Vec<f64> = line.split(' ').map(|s| s.parse().unwrap()).collect();
        assert_eq!(back, x);
        assert_eq!(format_point(&[1.0, -0.5, 2.5e-9]), "1.0 -0.5 2.5e-9");
    }

    #[test]
    fn value_parsing() {
        assert_eq!(parse_value(" -1.25\n").unwrap(), -1.25);
        assert!(matches!(
            parse_value("nan"),
            Err(EvaluatorError::Protocol(_))
        ));
        assert!(matches!(
            parse_value("inf"),
            Err(EvaluatorError::Protocol(_))
        ));
        assert!(matches!(
            parse_value("1 2"),
            Err(EvaluatorError::Protocol(_))
        ));
        assert!(matches!(parse_value(""), Err(EvaluatorError::Protocol(_))));
    }
}
