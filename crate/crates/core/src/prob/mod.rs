//! Finite probability distributions over `X1 x X2 x Y`, information measures
//! and type-class combinatorics.
//!
//! Distributions are dense and stored flat in row-major `(x1, x2, y)` order.
//! All information quantities are in nats and use `0 log 0 = 0`.

mod channel;
mod info;
mod types;

pub(crate) use types::marginal_counts;

pub use channel::{ChannelSpec, InputDistribution};
pub use info::{entropy, kl_divergence, metric_expectation};
pub use types::{
    closest_type, count_compositions, enumerate_joint_types, enumerate_with_marginals,
    log_multinomial, multinomial, Composition, Compositions, JointType, ENUMERATION_BUDGET,
};

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{MmacError, Result};

/// Scalar type the probability core is written against.
pub trait Real: Float + FromPrimitive + Sum + Debug + Send + Sync + 'static {
    /// Tolerance used when checking that a distribution sums to one.
    fn normalization_tol(cells: usize) -> Self;
}

impl Real for f64 {
    fn normalization_tol(cells: usize) -> Self {
        1e-12_f64.max(8.0 * f64::EPSILON * cells as f64)
    }
}

impl Real for f32 {
    fn normalization_tol(cells: usize) -> Self {
        8.0 * f32::EPSILON * cells.max(1) as f32
    }
}

/// Alphabet sizes of the two inputs and the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabets {
    pub x1: usize,
    pub x2: usize,
    pub y: usize,
}

impl Alphabets {
    pub fn new(x1: usize, x2: usize, y: usize) -> Result<Self> {
        if x1 == 0 || x2 == 0 || y == 0 {
            return Err(MmacError::InvalidDistribution(format!(
                "alphabet sizes must be positive, got ({x1}, {x2}, {y})"
            )));
        }
        Ok(Self { x1, x2, y })
    }

    pub fn cells(&self) -> usize {
        self.x1 * self.x2 * self.y
    }

    pub fn index(&self, x1: usize, x2: usize, y: usize) -> usize {
        (x1 * self.x2 + x2) * self.y + y
    }

    pub fn coords(&self, cell: usize) -> (usize, usize, usize) {
        let y = cell % self.y;
        let rest = cell / self.y;
        (rest / self.x2, rest % self.x2, y)
    }

    fn size_of(&self, axis: usize) -> usize {
        match axis {
            0 => self.x1,
            1 => self.x2,
            _ => self.y,
        }
    }

    /// Number of cells of the marginal over `axes`.
    pub fn group_count(&self, axes: Axes) -> usize {
        (0..3)
            .filter(|&a| axes.contains_axis(a))
            .map(|a| self.size_of(a))
            .product()
    }

    /// Index of the marginal cell that `cell` projects onto.
    pub fn group_of(&self, axes: Axes, cell: usize) -> usize {
        let (x1, x2, y) = self.coords(cell);
        let coords = [x1, x2, y];
        let mut g = 0;
        for a in 0..3 {
            if axes.contains_axis(a) {
                g = g * self.size_of(a) + coords[a];
            }
        }
        g
    }

    /// Cells grouped by the marginal cell they project onto.
    pub fn groups(&self, axes: Axes) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.group_count(axes)];
        for cell in 0..self.cells() {
            groups[self.group_of(axes, cell)].push(cell);
        }
        groups
    }
}

/// Subset of the coordinates `(X1, X2, Y)` selecting a marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Axes(u8);

impl Axes {
    pub const NONE: Axes = Axes(0);
    pub const X1: Axes = Axes(1);
    pub const X2: Axes = Axes(2);
    pub const Y: Axes = Axes(4);
    pub const X1X2: Axes = Axes(3);
    pub const X1Y: Axes = Axes(5);
    pub const X2Y: Axes = Axes(6);
    pub const ALL: Axes = Axes(7);

    pub fn union(self, other: Axes) -> Axes {
        Axes(self.0 | other.0)
    }

    pub fn contains_axis(self, axis: usize) -> bool {
        self.0 & (1 << axis) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// True when every coordinate of `other` is also in `self`.
    pub fn contains(self, other: Axes) -> bool {
        self.0 & other.0 == other.0
    }
}

impl std::ops::BitOr for Axes {
    type Output = Axes;
    fn bitor(self, rhs: Axes) -> Axes {
        self.union(rhs)
    }
}

/// Checks that `probs` is a probability vector (nonnegative, sums to one).
pub fn check_distribution<T: Real>(probs: &[T]) -> Result<()> {
    if probs.is_empty() {
        return Err(MmacError::InvalidDistribution("empty distribution".into()));
    }
    if let Some(i) = probs
        .iter()
        .position(|&p| !(p >= T::zero()) || !p.is_finite())
    {
        return Err(MmacError::InvalidDistribution(format!(
            "entry {i} is negative or not finite: {:?}",
            probs[i]
        )));
    }
    let total: T = probs.iter().copied().sum();
    if (total - T::one()).abs() > T::normalization_tol(probs.len()) {
        return Err(MmacError::InvalidDistribution(format!(
            "entries sum to {total:?}"
        )));
    }
    Ok(())
}

/// A probability distribution on `X1 x X2 x Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint<T> {
    alphabets: Alphabets,
    probs: Vec<T>,
}

impl<T: Real> Joint<T> {
    pub fn new(alphabets: Alphabets, probs: Vec<T>) -> Result<Self> {
        if probs.len() != alphabets.cells() {
            return Err(MmacError::InvalidDistribution(format!(
                "expected {} cells, got {}",
                alphabets.cells(),
                probs.len()
            )));
        }
        check_distribution(&probs)?;
        Ok(Self { alphabets, probs })
    }

    /// Builds a joint distribution without validation. Callers guarantee the
    /// invariants (used for solver iterates that are feasible up to tolerance).
    pub(crate) fn from_raw(alphabets: Alphabets, probs: Vec<T>) -> Self {
        debug_assert_eq!(probs.len(), alphabets.cells());
        Self { alphabets, probs }
    }

    pub fn uniform(alphabets: Alphabets) -> Self {
        let c = alphabets.cells();
        let p = T::one() / T::from_usize(c).unwrap();
        Self::from_raw(alphabets, vec![p; c])
    }

    /// `Q(x1, x2) W(y | x1, x2)` for an input distribution on `X1 x X2`
    /// (row-major) and a channel stored flat in `(x1, x2, y)` order.
    pub fn from_input_and_channel(
        alphabets: Alphabets,
        input: &[T],
        channel: &[T],
    ) -> Result<Self> {
        if input.len() != alphabets.x1 * alphabets.x2 || channel.len() != alphabets.cells() {
            return Err(MmacError::InvalidDistribution(
                "input or channel has the wrong shape".into(),
            ));
        }
        let probs = (0..alphabets.cells())
            .map(|c| input[c / alphabets.y] * channel[c])
            .collect();
        Self::new(alphabets, probs)
    }

    pub fn alphabets(&self) -> Alphabets {
        self.alphabets
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn get(&self, x1: usize, x2: usize, y: usize) -> T {
        self.probs[self.alphabets.index(x1, x2, y)]
    }

    pub fn marginal(&self, axes: Axes) -> Vec<T> {
        let mut out = vec![T::zero(); self.alphabets.group_count(axes)];
        for (cell, &p) in self.probs.iter().enumerate() {
            out[self.alphabets.group_of(axes, cell)] = out[self.alphabets.group_of(axes, cell)] + p;
        }
        out
    }

    pub fn entropy_of(&self, axes: Axes) -> T {
        if axes.is_empty() {
            return T::zero();
        }
        entropy(&self.marginal(axes))
    }

    /// `I(A; B | C)` for disjoint coordinate sets.
    pub fn conditional_mutual_info(&self, a: Axes, b: Axes, given: Axes) -> T {
        let v = self.entropy_of(a | given) + self.entropy_of(b | given)
            - self.entropy_of(a | b | given)
            - self.entropy_of(given);
        v.max(T::zero())
    }

    pub fn mutual_info(&self, a: Axes, b: Axes) -> T {
        self.conditional_mutual_info(a, b, Axes::NONE)
    }

    /// `I(X1; X2, Y)`.
    pub fn mutual_info_x1_vs_x2y(&self) -> T {
        self.mutual_info(Axes::X1, Axes::X2Y)
    }

    /// `I(X2; X1, Y)`.
    pub fn mutual_info_x2_vs_x1y(&self) -> T {
        self.mutual_info(Axes::X2, Axes::X1Y)
    }

    /// `I(X1; Y)`.
    pub fn mutual_info_x1_y(&self) -> T {
        self.mutual_info(Axes::X1, Axes::Y)
    }

    /// `I(X2; Y)`.
    pub fn mutual_info_x2_y(&self) -> T {
        self.mutual_info(Axes::X2, Axes::Y)
    }

    /// `I(X2; Y | X1)`.
    pub fn mutual_info_x2_y_given_x1(&self) -> T {
        self.conditional_mutual_info(Axes::X2, Axes::Y, Axes::X1)
    }

    /// `I(X1, X2; Y)`.
    pub fn mutual_info_x1x2_y(&self) -> T {
        self.mutual_info(Axes::X1X2, Axes::Y)
    }

    /// Product of the `a`-marginal and the `b`-marginal, where `a` and `b`
    /// partition the coordinates.
    pub fn product_of_marginals(&self, a: Axes) -> Self {
        let b = Axes(Axes::ALL.0 & !a.0);
        let ma = self.marginal(a);
        let mb = self.marginal(b);
        let probs = (0..self.alphabets.cells())
            .map(|c| ma[self.alphabets.group_of(a, c)] * mb[self.alphabets.group_of(b, c)])
            .collect();
        Self::from_raw(self.alphabets, probs)
    }

    /// Relabels symbols: `perm_x1[x1]` etc. give the new labels.
    pub fn relabel(&self, perm_x1: &[usize], perm_x2: &[usize], perm_y: &[usize]) -> Self {
        let a = self.alphabets;
        let mut probs = vec![T::zero(); a.cells()];
        for (cell, &p) in self.probs.iter().enumerate() {
            let (x1, x2, y) = a.coords(cell);
            probs[a.index(perm_x1[x1], perm_x2[x2], perm_y[y])] = p;
        }
        Self::from_raw(a, probs)
    }

    pub fn kl_to(&self, other: &Self) -> T {
        kl_divergence(&self.probs, &other.probs)
    }
}
