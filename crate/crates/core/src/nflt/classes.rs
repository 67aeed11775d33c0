use serde::{Deserialize, Serialize};

use super::{NfltError, Result};

/// Default upper bound on the number of functions a class may enumerate.
pub const DEFAULT_CLASS_CAP: u64 = 10_000_000;

/// `f: {0..m-1} → {0..r-1}` stored as value indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteProblem {
    r: u32,
    values: Vec<u32>,
}

impl FiniteProblem {
    pub fn new(values: Vec<u32>, r: u32) -> Result<Self> {
        if values.is_empty() || r == 0 {
            return Err(NfltError::InvalidArgument(
                "m and r must be positive".into(),
            ));
        }
        if let Some(v) = values.iter().find(|&&v| v >= r) {
            return Err(NfltError::InvalidArgument(format!(
                "value {v} not below r = {r}"
            )));
        }
        Ok(Self { r, values })
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn value(&self, x: usize) -> u32 {
        self.values[x]
    }

    pub fn max_value(&self) -> u32 {
        *self.values.iter().max().expect("nonempty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionClass {
    /// All of `Y^X`.
    Full,
    /// Nondecreasing on the ordered domain.
    Monotone,
    Constant,
}

impl FunctionClass {
    pub fn name(&self) -> &'static str {
        match self {
            FunctionClass::Full => "full",
            FunctionClass::Monotone => "monotone",
            FunctionClass::Constant => "constant",
        }
    }

    pub fn functions(
        &self,
        m: usize,
        r: u32,
        cap: u64,
    ) -> Result<Box<dyn Iterator<Item = FiniteProblem> + Send>> {
        Ok(match self {
            FunctionClass::Full => Box::new(enumerate_functions(m, r, cap)?),
            FunctionClass::Monotone => Box::new(enumerate_monotone(m, r, cap)?),
            FunctionClass::Constant => Box::new(enumerate_constant(m, r, cap)?),
        })
    }
}

impl std::str::FromStr for FunctionClass {
    type Err = NfltError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(FunctionClass::Full),
            "monotone" => Ok(FunctionClass::Monotone),
            "constant" => Ok(FunctionClass::Constant),
            other => Err(NfltError::InvalidArgument(format!("unknown class {other}"))),
        }
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of functions in `class`, or `None` on overflow.
pub fn class_size(class: FunctionClass, m: usize, r: u32) -> Option<u128> {
    match class {
        FunctionClass::Full => (r as u128).checked_pow(u32::try_from(m).ok()?),
        FunctionClass::Monotone => binomial(m as u128 + r as u128 - 1, m as u128),
        FunctionClass::Constant => Some(r as u128),
    }
}

fn check(class: FunctionClass, m: usize, r: u32, cap: u64) -> Result<()> {
    if m == 0 || r == 0 {
        return Err(NfltError::InvalidArgument(
            "m and r must be positive".into(),
        ));
    }
    match class_size(class, m, r) {
        Some(n) if n <= cap as u128 => Ok(()),
        Some(n) => Err(NfltError::ClassTooLarge {
            size: n.to_string(),
            cap,
        }),
        None => Err(NfltError::ClassTooLarge {
            size: format!("{r}^{m}"),
            cap,
        }),
    }
}

/// All of `Y^X` in lexicographic order (index 0 most significant).
pub fn enumerate_functions(m: usize, r: u32, cap: u64) -> Result<FullClassIter> {
    check(FunctionClass::Full, m, r, cap)?;
    Ok(FullClassIter {
        r,
        next: Some(vec![0; m]),
    })
}

pub struct FullClassIter {
    r: u32,
    next: Option<Vec<u32>>,
}

impl Iterator for FullClassIter {
    type Item = FiniteProblem;

    fn next(&mut self) -> Option<FiniteProblem> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for v in succ.iter_mut().rev() {
            if *v + 1 < self.r {
                *v += 1;
                carried = false;
                break;
            }
            *v = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(FiniteProblem {
            r: self.r,
            values: current,
        })
    }
}

/// Nondecreasing functions in lexicographic order.
pub fn enumerate_monotone(m: usize, r: u32, cap: u64) -> Result<MonotoneClassIter> {
    check(FunctionClass::Monotone, m, r, cap)?;
    Ok(MonotoneClassIter {
        r,
        next: Some(vec![0; m]),
    })
}

pub struct MonotoneClassIter {
    r: u32,
    next: Option<Vec<u32>>,
}

impl Iterator for MonotoneClassIter {
    type Item = FiniteProblem;

    fn next(&mut self) -> Option<FiniteProblem> {
        let current = self.next.take()?;
        if let Some(i) = current.iter().rposition(|&v| v + 1 < self.r) {
            let mut succ = current.clone();
            let bumped = succ[i] + 1;
            for v in &mut succ[i..] {
                *v = bumped;
            }
            self.next = Some(succ);
        }
        Some(FiniteProblem {
            r: self.r,
            values: current,
        })
    }
}

pub fn enumerate_constant(
    m: usize,
    r: u32,
    cap: u64,
) -> Result<impl Iterator<Item = FiniteProblem> + Send> {
    check(FunctionClass::Constant, m, r, cap)?;
    Ok((0..r).map(move |y| FiniteProblem {
        r,
        values: vec![y; m],
    }))
}
