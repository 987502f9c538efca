use serde::{Deserialize, Serialize};

use super::{Alphabets, Axes, Joint, Real};
use crate::error::{MmacError, Result};

/// Largest number of items any exhaustive enumeration is allowed to visit.
pub const ENUMERATION_BUDGET: u128 = 100_000_000;

/// A type (empirical distribution) with denominator `n` over a flat alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Composition {
    pub counts: Vec<usize>,
    pub n: usize,
}

impl Composition {
    pub fn new(counts: Vec<usize>) -> Self {
        let n = counts.iter().sum();
        Self { counts, n }
    }

    pub fn to_probs<T: Real>(&self) -> Vec<T> {
        let n = T::from_usize(self.n).unwrap();
        self.counts
            .iter()
            .map(|&c| T::from_usize(c).unwrap() / n)
            .collect()
    }

    /// Largest absolute deviation between `counts / n` and `dist`.
    pub fn max_deviation<T: Real>(&self, dist: &[T]) -> T {
        self.to_probs::<T>()
            .iter()
            .zip(dist)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }
}

/// A joint type on `X1 x X2 x Y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointType {
    pub alphabets: Alphabets,
    pub counts: Vec<usize>,
    pub n: usize,
}

impl JointType {
    pub fn new(alphabets: Alphabets, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != alphabets.cells() {
            return Err(MmacError::InvalidDistribution(format!(
                "expected {} counts, got {}",
                alphabets.cells(),
                counts.len()
            )));
        }
        let n = counts.iter().sum();
        if n == 0 {
            return Err(MmacError::InvalidDistribution("type with n = 0".into()));
        }
        Ok(Self {
            alphabets,
            counts,
            n,
        })
    }

    pub fn to_joint<T: Real>(&self) -> Joint<T> {
        Joint::from_raw(
            self.alphabets,
            Composition::new(self.counts.clone()).to_probs(),
        )
    }

    pub fn marginal_counts(&self, axes: Axes) -> Vec<usize> {
        marginal_counts(self.alphabets, &self.counts, axes)
    }
}

pub(crate) fn marginal_counts(alphabets: Alphabets, counts: &[usize], axes: Axes) -> Vec<usize> {
    let mut out = vec![0; alphabets.group_count(axes)];
    for (cell, &c) in counts.iter().enumerate() {
        out[alphabets.group_of(axes, cell)] += c;
    }
    out
}

/// Quantizes `dist` to a type with denominator `n` by largest-remainder
/// rounding (ties to the lowest index), then repairs any support point that
/// rounded to zero by moving a unit from the entry with the largest excess.
///
/// Whenever `n * min_support_prob >= 1` the result keeps the support and
/// deviates from `dist` by at most `1/n` in every entry.
pub fn closest_type<T: Real>(dist: &[T], n: usize) -> Result<Composition> {
    super::check_distribution(dist)?;
    let support = dist.iter().filter(|&&p| p > T::zero()).count();
    if n < support || n == 0 {
        return Err(MmacError::InfeasibleSupport { n, support });
    }
    let nf = T::from_usize(n).unwrap();
    let scaled: Vec<T> = dist.iter().map(|&p| p * nf).collect();
    let mut counts: Vec<usize> = scaled
        .iter()
        .map(|&s| s.floor().to_usize().unwrap_or(0))
        .collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..dist.len()).filter(|&i| dist[i] > T::zero()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut leftover = n.saturating_sub(assigned);
    for &i in order.iter().cycle() {
        if leftover == 0 {
            break;
        }
        counts[i] += 1;
        leftover -= 1;
    }
    while let Some(z) = (0..dist.len()).find(|&i| dist[i] > T::zero() && counts[i] == 0) {
        let donor = (0..dist.len())
            .filter(|&i| counts[i] >= 2)
            .max_by(|&a, &b| {
                let ea = T::from_usize(counts[a]).unwrap() - scaled[a];
                let eb = T::from_usize(counts[b]).unwrap() - scaled[b];
                ea.partial_cmp(&eb).unwrap().then(b.cmp(&a))
            })
            .ok_or(MmacError::InfeasibleSupport { n, support })?;
        counts[donor] -= 1;
        counts[z] = 1;
    }
    Ok(Composition { counts, n })
}

/// `C(n + c - 1, c - 1)`, saturating at `u128::MAX`.
pub fn count_compositions(n: usize, c: usize) -> u128 {
    if c == 0 {
        return u128::from(n == 0);
    }
    let k = (c - 1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = match acc.checked_mul(n as u128 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// All compositions of `n` into `c` nonnegative parts, in lexicographic order.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<usize>>,
}

impl Compositions {
    pub fn new(n: usize, c: usize) -> Self {
        let current = if c == 0 {
            None
        } else {
            let mut v = vec![0; c];
            v[c - 1] = n;
            Some(v)
        };
        Self { current }
    }
}

impl Iterator for Compositions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let c = out.len();
        let mut next = out.clone();
        let last_nonzero = (0..c).rev().find(|&i| next[i] > 0);
        let pivot = match last_nonzero {
            Some(j) if j == c - 1 && c >= 2 => Some(c - 2),
            Some(j) if j > 0 && j < c - 1 => Some(j - 1),
            _ => None,
        };
        if let Some(k) = pivot {
            let suffix: usize = next[k + 1..].iter().sum();
            next[k] += 1;
            for v in &mut next[k + 1..] {
                *v = 0;
            }
            next[c - 1] = suffix - 1;
            self.current = Some(next);
        }
        Some(out)
    }
}

/// Every joint type with denominator `n` that passes `predicate`.
pub fn enumerate_joint_types<F>(
    alphabets: Alphabets,
    n: usize,
    predicate: F,
) -> Result<impl Iterator<Item = JointType>>
where
    F: Fn(&JointType) -> bool,
{
    let needed = count_compositions(n, alphabets.cells());
    if needed > ENUMERATION_BUDGET {
        return Err(MmacError::BudgetExceeded {
            needed,
            budget: ENUMERATION_BUDGET,
        });
    }
    Ok(Compositions::new(n, alphabets.cells())
        .map(move |counts| JointType {
            alphabets,
            counts,
            n,
        })
        .filter(move |t| predicate(t)))
}

/// Visits every count vector with total `n` whose marginals on the given
/// axes equal the given counts. Visits are in lexicographic order. Returns the
/// number of visited vectors, or `BudgetExceeded` once more than `budget`
/// search nodes have been expanded.
pub fn enumerate_with_marginals<F>(
    alphabets: Alphabets,
    n: usize,
    marginals: &[(Axes, Vec<usize>)],
    budget: u128,
    mut visit: F,
) -> Result<u64>
where
    F: FnMut(&[usize]),
{
    let cells = alphabets.cells();
    for (axes, target) in marginals {
        if target.len() != alphabets.group_count(*axes) || target.iter().sum::<usize>() != n {
            return Ok(0);
        }
    }
    let group: Vec<Vec<usize>> = marginals
        .iter()
        .map(|(axes, _)| (0..cells).map(|c| alphabets.group_of(*axes, c)).collect())
        .collect();
    let mut last_in_group = vec![vec![false; cells]; marginals.len()];
    for (k, g) in group.iter().enumerate() {
        let mut seen = vec![false; alphabets.group_count(marginals[k].0)];
        for cell in (0..cells).rev() {
            if !seen[g[cell]] {
                seen[g[cell]] = true;
                last_in_group[k][cell] = true;
            }
        }
    }
    let mut state = Search {
        cells,
        group,
        last_in_group,
        remaining: marginals.iter().map(|(_, t)| t.clone()).collect(),
        counts: vec![0; cells],
        nodes: 0,
        budget,
        visited: 0,
    };
    state.descend(0, n, &mut visit)?;
    Ok(state.visited)
}

struct Search {
    cells: usize,
    group: Vec<Vec<usize>>,
    last_in_group: Vec<Vec<bool>>,
    remaining: Vec<Vec<usize>>,
    counts: Vec<usize>,
    nodes: u128,
    budget: u128,
    visited: u64,
}

impl Search {
    fn descend<F: FnMut(&[usize])>(
        &mut self,
        cell: usize,
        left: usize,
        visit: &mut F,
    ) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(MmacError::BudgetExceeded {
                needed: self.nodes,
                budget: self.budget,
            });
        }
        if cell == self.cells {
            if left == 0 {
                self.visited += 1;
                visit(&self.counts);
            }
            return Ok(());
        }
        let mut lo = 0;
        let mut hi = left;
        for k in 0..self.group.len() {
            let rem = self.remaining[k][self.group[k][cell]];
            hi = hi.min(rem);
            if self.last_in_group[k][cell] {
                lo = lo.max(rem);
            }
        }
        if cell + 1 == self.cells {
            lo = lo.max(left);
        }
        if lo > hi {
            return Ok(());
        }
        for v in lo..=hi {
            self.counts[cell] = v;
            for k in 0..self.group.len() {
                let g = self.group[k][cell];
                self.remaining[k][g] -= v;
            }
            let r = self.descend(cell + 1, left - v, visit);
            for k in 0..self.group.len() {
                let g = self.group[k][cell];
                self.remaining[k][g] += v;
            }
            r?;
        }
        self.counts[cell] = 0;
        Ok(())
    }
}

/// `ln(n! / prod(k_i!))` for `n = sum(k_i)`.
pub fn log_multinomial(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    ln_factorial(n) - counts.iter().map(|&k| ln_factorial(k)).sum::<f64>()
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Exact multinomial coefficient; `None` on overflow.
pub fn multinomial(counts: &[usize]) -> Option<u128> {
    let mut acc: u128 = 1;
    let mut total: u128 = 0;
    for &k in counts {
        for i in 1..=k as u128 {
            total += 1;
            acc = acc.checked_mul(total)? / i;
        }
    }
    Some(acc)
}
