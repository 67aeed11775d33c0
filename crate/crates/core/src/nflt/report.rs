use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Serialize, Serializer};

use super::{run_trace, FiniteProblem, FunctionClass, NfltError, Result, SearchPolicy};

/// Count of each observed value sequence of a fixed length over a class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceHistogram {
    len: usize,
    counts: BTreeMap<Vec<u32>, u64>,
}

impl TraceHistogram {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            counts: BTreeMap::new(),
        }
    }

    pub fn trace_len(&self) -> usize {
        self.len
    }

    pub fn add(&mut self, trace: &[u32]) {
        debug_assert_eq!(trace.len(), self.len);
        *self.counts.entry(trace.to_vec()).or_insert(0) += 1;
    }

    pub fn count(&self, trace: &[u32]) -> u64 {
        self.counts.get(trace).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, u64)> {
        self.counts.iter().map(|(k, v)| (k, *v))
    }

    /// Histogram of the first `len` entries of every trace.
    pub fn prefix(&self, len: usize) -> TraceHistogram {
        assert!(len <= self.len);
        let mut out = TraceHistogram::new(len);
        for (t, c) in &self.counts {
            *out.counts.entry(t[..len].to_vec()).or_insert(0) += c;
        }
        out
    }

    /// Adds another histogram's counts. Associative and commutative, so
    /// partitions of a class can be merged in any order.
    pub fn merge(&mut self, other: &TraceHistogram) {
        assert_eq!(
            self.len, other.len,
            "merging histograms of different lengths"
        );
        for (t, c) in &other.counts {
            *self.counts.entry(t.clone()).or_insert(0) += c;
        }
    }

    /// First trace (in lexicographic order) on which the two histograms disagree.
    pub fn first_difference(&self, other: &TraceHistogram) -> Option<(Vec<u32>, u64, u64)> {
        let mut keys: Vec<&Vec<u32>> = self.counts.keys().chain(other.counts.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().find_map(|k| {
            let (a, b) = (self.count(k), other.count(k));
            (a != b).then(|| (k.clone(), a, b))
        })
    }
}

impl Serialize for TraceHistogram {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let as_strings: BTreeMap<String, u64> = self
            .counts
            .iter()
            .map(|(k, v)| {
                let key = k.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
                (key, *v)
            })
            .collect();
        as_strings.serialize(s)
    }
}

fn check_class_nonempty(total: u64) -> Result<()> {
    if total == 0 {
        return Err(NfltError::InvalidArgument("empty function class".into()));
    }
    Ok(())
}

/// Histogram of length-`k` traces of `policy` over `class`.
pub fn performance_histogram(
    policy: &dyn SearchPolicy,
    k: usize,
    class: impl IntoIterator<Item = FiniteProblem>,
) -> Result<TraceHistogram> {
    let mut h = TraceHistogram::new(k);
    for f in class {
        h.add(&run_trace(policy, &f, k)?);
    }
    check_class_nonempty(h.total())?;
    Ok(h)
}

/// Everything one policy's runs over a class determine, per step `j = 1..=k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyStatistics {
    pub policy: String,
    pub class_size: u64,
    /// `histograms[j-1]`: distribution of `(y_1 .. y_j)`.
    pub histograms: Vec<TraceHistogram>,
    /// `value_at_step[j-1][y]`: number of functions with `y_j = y`.
    pub value_at_step: Vec<Vec<u64>>,
    /// `best_so_far[j-1][y]`: number of functions with `max(y_1 .. y_j) = y`.
    pub best_so_far: Vec<Vec<u64>>,
    /// `max_found[j-1]`: number of functions whose maximum value is among `y_1 .. y_j`.
    pub max_found: Vec<u64>,
}

pub fn policy_statistics(
    policy: &dyn SearchPolicy,
    class: FunctionClass,
    m: usize,
    r: u32,
    k: usize,
    cap: u64,
) -> Result<PolicyStatistics> {
    let mut full = TraceHistogram::new(k);
    let mut max_found = vec![0u64; k];
    let mut value_at_step = vec![vec![0u64; r as usize]; k];
    let mut best_so_far = vec![vec![0u64; r as usize]; k];
    for f in class.functions(m, r, cap)? {
        let trace = run_trace(policy, &f, k)?;
        let top = f.max_value();
        if let Some(first) = trace.iter().position(|&y| y == top) {
            for c in &mut max_found[first..] {
                *c += 1;
            }
        }
        let mut best = 0;
        for (j, &y) in trace.iter().enumerate() {
            best = best.max(y);
            value_at_step[j][y as usize] += 1;
            best_so_far[j][best as usize] += 1;
        }
        full.add(&trace);
    }
    let class_size = full.total();
    check_class_nonempty(class_size)?;
    let histograms = (1..=k).map(|j| full.prefix(j)).collect();
    Ok(PolicyStatistics {
        policy: policy.name(),
        class_size,
        histograms,
        value_at_step,
        best_so_far,
        max_found,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    /// 1-based step at which the statistics first differ.
    pub step: usize,
    pub policy_a: String,
    pub policy_b: String,
    pub statistic: String,
    pub trace: Vec<u32>,
    pub count_a: u64,
    pub count_b: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Equal,
    Counterexample(Counterexample),
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal)
    }
}

/// Per-policy success fractions: the share of the class on which the
/// function's maximum value has been observed within `j` steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessTable {
    pub class_size: u64,
    pub rows: Vec<SuccessRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessRow {
    pub policy: String,
    pub hits: Vec<u64>,
    pub fractions: Vec<f64>,
}

impl SuccessTable {
    pub fn hits(&self, policy: usize, step: usize) -> u64 {
        self.rows[policy].hits[step - 1]
    }

    pub fn fraction(&self, policy: usize, step: usize) -> f64 {
        self.rows[policy].fractions[step - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDescription {
    pub kind: FunctionClass,
    pub m: usize,
    pub r: u32,
    pub size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NfltReport {
    pub class: ClassDescription,
    pub k: usize,
    pub policies: Vec<String>,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub success: SuccessTable,
    pub statistics: Vec<PolicyStatistics>,
    pub wall_time_ms: f64,
}

fn success_table(stats: &[PolicyStatistics]) -> SuccessTable {
    let class_size = stats[0].class_size;
    let rows = stats
        .iter()
        .map(|s| SuccessRow {
            policy: s.policy.clone(),
            hits: s.max_found.clone(),
            fractions: s
                .max_found
                .iter()
                .map(|&h| h as f64 / class_size as f64)
                .collect(),
        })
        .collect();
    SuccessTable { class_size, rows }
}

fn compare(a: &PolicyStatistics, b: &PolicyStatistics) -> Option<Counterexample> {
    let make = |step: usize, statistic: &str, trace: Vec<u32>, ca: u64, cb: u64| Counterexample {
        step,
        policy_a: a.policy.clone(),
        policy_b: b.policy.clone(),
        statistic: statistic.into(),
        trace,
        count_a: ca,
        count_b: cb,
    };
    for j in 0..a.histograms.len() {
        if let Some((t, ca, cb)) = a.histograms[j].first_difference(&b.histograms[j]) {
            return Some(make(j + 1, "trace-histogram", t, ca, cb));
        }
        for (statistic, xs, ys) in [
            ("value-at-step", &a.value_at_step[j], &b.value_at_step[j]),
            ("best-so-far", &a.best_so_far[j], &b.best_so_far[j]),
        ] {
            if let Some(y) = (0..xs.len()).find(|&y| xs[y] != ys[y]) {
                return Some(make(j + 1, statistic, vec![y as u32], xs[y], ys[y]));
            }
        }
        if a.max_found[j] != b.max_found[j] {
            return Some(make(
                j + 1,
                "max-found",
                vec![],
                a.max_found[j],
                b.max_found[j],
            ));
        }
    }
    None
}

/// Runs every policy over `class` and checks whether all per-step
/// statistics coincide. Every policy is compared against the first.
pub fn verify_on_class(
    policies: &[&dyn SearchPolicy],
    class: FunctionClass,
    m: usize,
    r: u32,
    k: usize,
    cap: u64,
) -> Result<NfltReport> {
    if policies.len() < 2 {
        return Err(NfltError::InvalidArgument(
            "need at least two policies".into(),
        ));
    }
    let started = Instant::now();
    let statistics = policies
        .iter()
        .map(|p| policy_statistics(*p, class, m, r, k, cap))
        .collect::<Result<Vec<_>>>()?;
    let verdict = statistics[1..]
        .iter()
        .find_map(|s| compare(&statistics[0], s))
        .map_or(Verdict::Equal, Verdict::Counterexample);
    Ok(NfltReport {
        class: ClassDescription {
            kind: class,
            m,
            r,
            size: statistics[0].class_size,
        },
        k,
        policies: policies.iter().map(|p| p.name()).collect(),
        verdict,
        success: success_table(&statistics),
        statistics,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// [`verify_on_class`] over the full class `Y^X`.
pub fn verify_nflt(
    policies: &[&dyn SearchPolicy],
    m: usize,
    r: u32,
    k: usize,
    cap: u64,
) -> Result<NfltReport> {
    verify_on_class(policies, FunctionClass::Full, m, r, k, cap)
}

pub fn compare_on_class(
    policies: &[&dyn SearchPolicy],
    class: FunctionClass,
    m: usize,
    r: u32,
    k: usize,
    cap: u64,
) -> Result<SuccessTable> {
    if policies.is_empty() {
        return Err(NfltError::InvalidArgument("no policies".into()));
    }
    let statistics = policies
        .iter()
        .map(|p| policy_statistics(*p, class, m, r, k, cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(success_table(&statistics))
}
