use super::{FiniteProblem, NfltError, Result};
use crate::rng::RngStream;

/// A deterministic search strategy on `{0..m-1}`.
///
/// `observed` lists the `(x, y)` pairs seen so far in query order. The
/// returned index must not appear among them; [`run_trace`] rejects policies
/// that revisit.
pub trait SearchPolicy: Send + Sync {
    fn name(&self) -> String;
    fn next(&self, m: usize, observed: &[(usize, u32)]) -> usize;
}

/// Names accepted by [`builtin_policy`].
pub const BUILTIN_POLICIES: &[&str] = &[
    "lexicographic",
    "reverse",
    "middle-out",
    "seeded-shuffle",
    "greedy-neighbor",
];

fn first_unvisited(order: impl Iterator<Item = usize>, observed: &[(usize, u32)]) -> usize {
    let mut order = order;
    order
        .find(|i| !observed.iter().any(|(x, _)| x == i))
        .expect("policy asked for a point after exhausting the space")
}

/// Queries `0, 1, 2, ...`. Also called bottom-first.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lexicographic;

impl SearchPolicy for Lexicographic {
    fn name(&self) -> String {
        "lexicographic".into()
    }

    fn next(&self, m: usize, observed: &[(usize, u32)]) -> usize {
        first_unvisited(0..m, observed)
    }
}

/// Queries `m-1, m-2, ...`. Also called top-first.
#[derive(Debug, Clone, Copy, Default)]
pub struct Reverse;

impl SearchPolicy for Reverse {
    fn name(&self) -> String {
        "reverse".into()
    }

    fn next(&self, m: usize, observed: &[(usize, u32)]) -> usize {
        first_unvisited((0..m).rev(), observed)
    }
}

/// Starts at `m/2` and alternates outward: `c, c+1, c-1, c+2, c-2, ...`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MiddleOut;

impl SearchPolicy for MiddleOut {
    fn name(&self) -> String {
        "middle-out".into()
    }

    fn next(&self, m: usize, observed: &[(usize, u32)]) -> usize {
        let c = (m / 2) as isize;
        let order = (0..2 * m as isize)
            .map(move |s| {
                if s % 2 == 0 {
                    c - s / 2
                } else {
                    c + (s + 1) / 2
                }
            })
            .filter(move |&i| i >= 0 && (i as usize) < m)
            .map(|i| i as usize);
        first_unvisited(order, observed)
    }
}

/// A fixed pseudo-random visiting order drawn once from `seed`.
#[derive(Debug, Clone, Copy)]
pub struct SeededShuffle {
    pub seed: u64,
}

impl SearchPolicy for SeededShuffle {
    fn name(&self) -> String {
        format!("seeded-shuffle({})", self.seed)
    }

    fn next(&self, m: usize, observed: &[(usize, u32)]) -> usize {
        let order = RngStream::new(self.seed).permutation(m);
        first_unvisited(order.into_iter(), observed)
    }
}

/// Adaptive hill climber on the index line: starts in the middle, then
/// queries the unvisited index nearest to the best value seen so far
/// (earliest best on ties, right neighbour before left).
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyNeighbor;

impl SearchPolicy for GreedyNeighbor {
    fn name(&self) -> String {
        "greedy-neighbor".into()
    }

    fn next(&self, m: usize, observed: &[(usize, u32)]) -> usize {
        let Some(&(anchor, _)) = observed.iter().rev().max_by_key(|(_, y)| *y) else {
            return m / 2;
        };
        // `rev` + `max_by_key` returns the last maximum of the reversed list,
        // i.e. the earliest best observation.
        let anchor = anchor as isize;
        let order = (1..=m as isize)
            .flat_map(move |dist| [anchor + dist, anchor - dist])
            .filter(move |&i| i >= 0 && (i as usize) < m)
            .map(|i| i as usize);
        first_unvisited(order, observed)
    }
}

/// Instantiates a built-in policy by name; `seeded-shuffle` takes `shuffle_seed`.
pub fn builtin_policy(name: &str, shuffle_seed: u64) -> Result<Box<dyn SearchPolicy>> {
    Ok(match name {
        "lexicographic" | "bottom-first" => Box::new(Lexicographic),
        "reverse" | "top-first" => Box::new(Reverse),
        "middle-out" => Box::new(MiddleOut),
        "seeded-shuffle" => Box::new(SeededShuffle { seed: shuffle_seed }),
        "greedy-neighbor" => Box::new(GreedyNeighbor),
        other => {
            return Err(NfltError::InvalidArgument(format!(
                "unknown policy {other}"
            )))
        }
    })
}

/// Observed value indices of the first `k` queries of `policy` on `f`.
pub fn run_trace(policy: &dyn SearchPolicy, f: &FiniteProblem, k: usize) -> Result<Vec<u32>> {
    let m = f.m();
    if k == 0 || k > m {
        return Err(NfltError::InvalidArgument(format!(
            "horizon k = {k} must be in 1..={m}"
        )));
    }
    let mut observed: Vec<(usize, u32)> = Vec::with_capacity(k);
    for step in 0..k {
        let x = policy.next(m, &observed);
        if x >= m {
            return Err(NfltError::IndexOutOfRange {
                policy: policy.name(),
                index: x,
                m,
            });
        }
        if observed.iter().any(|(seen, _)| *seen == x) {
            return Err(NfltError::RevisitDetected {
                policy: policy.name(),
                step: step + 1,
                index: x,
            });
        }
        observed.push((x, f.value(x)));
    }
    Ok(observed.into_iter().map(|(_, y)| y).collect())
}
