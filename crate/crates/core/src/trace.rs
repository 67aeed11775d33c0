use serde::{Deserialize, Serialize};

use crate::domain::Point;

/// One evaluated sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub x: Point,
    pub y: f64,
    /// The proposing algorithm asked for a point outside the box and the
    /// framework projected it back before evaluation.
    #[serde(default)]
    pub clamped: bool,
}

/// Evaluated samples in insertion order; the index is the iteration counter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<Record>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(xs: Vec<Point>, ys: Vec<f64>) -> Self {
        assert_eq!(xs.len(), ys.len(), "points and values differ in length");
        let records = xs
            .into_iter()
            .zip(ys)
            .map(|(x, y)| Record {
                x,
                y,
                clamped: false,
            })
            .collect();
        Self { records }
    }

    pub fn push(&mut self, x: Point, y: f64) {
        self.push_record(Record {
            x,
            y,
            clamped: false,
        });
    }

    pub fn push_record(&mut self, r: Record) {
        self.records.push(r);
    }

    /// Functional form of [`push`](Self::push).
    pub fn with_observation(mut self, x: Point, y: f64) -> Self {
        self.push(x, y);
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn points(&self) -> Vec<Point> {
        self.records.iter().map(|r| r.x.clone()).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.y).collect()
    }

    /// Records appended after the first `from` entries.
    pub fn tail(&self, from: usize) -> &[Record] {
        &self.records[from.min(self.records.len())..]
    }

    pub fn best(&self) -> Option<&Record> {
        self.records
            .iter()
            .fold(None, |best: Option<&Record>, r| match best {
                Some(b) if b.y >= r.y => Some(b),
                _ => Some(r),
            })
    }
}

/// Evaluation history of one run (maximization convention).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub dataset: Dataset,
    pub best_so_far: Vec<f64>,
    pub seed: u64,
}

impl RunTrace {
    pub fn new(seed: u64) -> Self {
        Self {
            dataset: Dataset::new(),
            best_so_far: Vec::new(),
            seed,
        }
    }

    pub fn from_dataset(dataset: Dataset, seed: u64) -> Self {
        let mut t = Self::new(seed);
        for r in dataset.records {
            t.push(r);
        }
        t
    }

    pub fn push(&mut self, r: Record) {
        let best = match self.best_so_far.last() {
            Some(&b) if !(r.y > b) => b,
            _ => r.y,
        };
        self.best_so_far.push(best);
        self.dataset.push_record(r);
    }

    pub fn len(&self) -> usize {
        self.dataset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dataset.is_empty()
    }

    pub fn final_best(&self) -> Option<f64> {
        self.best_so_far.last().copied()
    }

    pub fn best_point(&self) -> Option<&Point> {
        self.dataset.best().map(|r| &r.x)
    }

    /// 1-based number of evaluations until the running best first reaches
    /// `threshold`, or `None` if it never does.
    pub fn evaluations_to_threshold(&self, threshold: f64) -> Option<usize> {
        self.best_so_far
            .iter()
            .position(|&b| b >= threshold)
            .map(|i| i + 1)
    }

    pub fn clamped_count(&self) -> usize {
        self.dataset.records().iter().filter(|r| r.clamped).count()
    }
}
