use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::prob::{Alphabets, Axes};

/// A decision variable: one cell of one distribution block, or a
/// nonnegative auxiliary scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    Cell { block: usize, cell: usize },
    Aux(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct EntropyTerm {
    pub block: usize,
    pub axes: Axes,
    pub coef: f64,
}

/// A real function of the decision variables built from marginal entropies,
/// linear terms and a constant.
///
/// Mutual informations, KL divergences to product references and metric
/// expectations are all expressible this way. Convexity is the caller's
/// responsibility: minimized objectives and `<=` constraints must be convex on
/// the affine slice cut out by the equality constraints.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Functional {
    pub(crate) entropies: Vec<EntropyTerm>,
    pub(crate) linear: Vec<(Var, f64)>,
    pub(crate) constant: f64,
}

impl Functional {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    /// `H(marginal of block on axes)`.
    pub fn entropy(block: usize, axes: Axes) -> Self {
        Self {
            entropies: vec![EntropyTerm {
                block,
                axes,
                coef: 1.0,
            }],
            ..Self::default()
        }
    }

    /// `I(A; B | C)` of one block.
    pub fn mutual_info(block: usize, a: Axes, b: Axes, given: Axes) -> Self {
        let mut f = Self::entropy(block, a | given)
            .plus(&Self::entropy(block, b | given))
            .plus(&Self::entropy(block, a | b | given).scaled(-1.0));
        if !given.is_empty() {
            f = f.plus(&Self::entropy(block, given).scaled(-1.0));
        }
        f
    }

    /// `sum_cells values[cell] * P(cell)` for one block. Infinite values are
    /// allowed and force the corresponding cells to zero where needed.
    pub fn expectation(block: usize, values: &[f64]) -> Self {
        Self {
            linear: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(cell, &v)| (Var::Cell { block, cell }, v))
                .collect(),
            ..Self::default()
        }
    }

    /// `D(P || R_A x P_B)` where `R_A` is a fixed reference on `axes` and `P_B`
    /// is the block's own marginal on the complementary axes.
    pub fn kl_to_product(
        block: usize,
        alphabets: Alphabets,
        axes: Axes,
        reference: &[f64],
    ) -> Self {
        let complement = complement(axes);
        let log_ref: Vec<f64> = (0..alphabets.cells())
            .map(|c| -reference[alphabets.group_of(axes, c)].ln())
            .collect();
        Self::entropy(block, Axes::ALL)
            .scaled(-1.0)
            .plus(&Self::entropy(block, complement))
            .plus(&Self::expectation(block, &log_ref))
    }

    pub fn aux(index: usize) -> Self {
        Self {
            linear: vec![(Var::Aux(index), 1.0)],
            ..Self::default()
        }
    }

    pub fn plus(mut self, other: &Functional) -> Self {
        self.entropies.extend(other.entropies.iter().cloned());
        self.linear.extend(other.linear.iter().copied());
        self.constant += other.constant;
        self
    }

    pub fn minus(self, other: &Functional) -> Self {
        self.plus(&other.clone().scaled(-1.0))
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for e in &mut self.entropies {
            e.coef *= s;
        }
        for (_, c) in &mut self.linear {
            *c *= s;
        }
        self.constant *= s;
        self
    }

    pub fn add_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub(crate) fn max_block(&self) -> Option<usize> {
        let e = self.entropies.iter().map(|e| e.block);
        let l = self.linear.iter().filter_map(|(v, _)| match v {
            Var::Cell { block, .. } => Some(*block),
            Var::Aux(_) => None,
        });
        e.chain(l).max()
    }

    pub(crate) fn max_aux(&self) -> Option<usize> {
        self.linear
            .iter()
            .filter_map(|(v, _)| match v {
                Var::Aux(i) => Some(*i),
                Var::Cell { .. } => None,
            })
            .max()
    }

    pub(crate) fn has_entropy(&self) -> bool {
        self.entropies.iter().any(|e| e.coef != 0.0)
    }

    /// Value at a full variable vector, with `0 * inf = 0` for linear terms.
    pub fn value(&self, layout: &Layout, z: &[f64]) -> f64 {
        let mut v = self.constant;
        for (var, c) in &self.linear {
            let x = z[layout.index(*var)];
            if x != 0.0 {
                v += c * x;
            }
        }
        for e in &self.entropies {
            for group in layout.groups(e.block, e.axes) {
                let u: f64 = group.iter().map(|&i| z[i]).sum();
                if u > 0.0 {
                    v -= e.coef * u * u.ln();
                }
            }
        }
        v
    }

    /// Value, gradient and Hessian with respect to the full variable vector.
    /// Entropy groups with zero mass contribute nothing (their cells are fixed).
    pub(crate) fn derivatives(
        &self,
        layout: &Layout,
        z: &[f64],
    ) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = layout.len();
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        let mut v = self.constant;
        for (var, c) in &self.linear {
            let i = layout.index(*var);
            if z[i] != 0.0 {
                v += c * z[i];
            }
            if c.is_finite() {
                grad[i] += c;
            }
        }
        for e in &self.entropies {
            for group in layout.groups(e.block, e.axes) {
                let u: f64 = group.iter().map(|&i| z[i]).sum();
                if u <= 0.0 {
                    continue;
                }
                let lu = u.ln();
                v -= e.coef * u * lu;
                let g = -e.coef * (lu + 1.0);
                let h = -e.coef / u;
                for &i in &group {
                    grad[i] += g;
                    for &j in &group {
                        hess[(i, j)] += h;
                    }
                }
            }
        }
        (v, grad, hess)
    }
}

pub(crate) fn complement(axes: Axes) -> Axes {
    let mut out = Axes::NONE;
    for (a, bit) in [(0, Axes::X1), (1, Axes::X2), (2, Axes::Y)] {
        if !axes.contains_axis(a) {
            out = out | bit;
        }
    }
    out
}

/// Flat layout of all variables: `blocks` joint distributions followed by
/// `aux` scalars.
#[derive(Debug, Clone)]
pub struct Layout {
    pub alphabets: Alphabets,
    pub blocks: usize,
    pub aux: usize,
    group_cache: Vec<(Axes, Vec<Vec<usize>>)>,
}

impl Layout {
    pub fn new(alphabets: Alphabets, blocks: usize, aux: usize) -> Self {
        let all = [
            Axes::X1,
            Axes::X2,
            Axes::Y,
            Axes::X1X2,
            Axes::X1Y,
            Axes::X2Y,
            Axes::ALL,
        ];
        let group_cache = all.iter().map(|&a| (a, alphabets.groups(a))).collect();
        Self {
            alphabets,
            blocks,
            aux,
            group_cache,
        }
    }

    pub fn len(&self) -> usize {
        self.blocks * self.alphabets.cells() + self.aux
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, var: Var) -> usize {
        match var {
            Var::Cell { block, cell } => block * self.alphabets.cells() + cell,
            Var::Aux(i) => self.blocks * self.alphabets.cells() + i,
        }
    }

    pub fn block_range(&self, block: usize) -> std::ops::Range<usize> {
        let c = self.alphabets.cells();
        block * c..(block + 1) * c
    }

    /// Variable indices grouped by the marginal cell of `axes` in `block`.
    pub fn groups(&self, block: usize, axes: Axes) -> impl Iterator<Item = Vec<usize>> + '_ {
        let offset = block * self.alphabets.cells();
        let groups = &self
            .group_cache
            .iter()
            .find(|(a, _)| *a == axes)
            .expect("nonempty axes")
            .1;
        groups
            .iter()
            .map(move |g| g.iter().map(|&c| c + offset).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Joint;

    fn random_joint(a: Alphabets, seed: u64) -> Joint<f64> {
        let mut s = seed;
        let raw: Vec<f64> = (0..a.cells())
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) + 0.01
            })
            .collect();
        let t: f64 = raw.iter().sum();
        Joint::new(a, raw.iter().map(|v| v / t).collect()).unwrap()
    }

    #[test]
    fn mutual_info_functional_matches_direct() {
        let a = Alphabets::new(2, 2, 3).unwrap();
        let layout = Layout::new(a, 1, 0);
        let p = random_joint(a, 7);
        let f = Functional::mutual_info(0, Axes::X2, Axes::Y, Axes::X1);
        assert!((f.value(&layout, p.probs()) - p.mutual_info_x2_y_given_x1()).abs() < 1e-12);
        let g = Functional::mutual_info(0, Axes::X1, Axes::X2Y, Axes::NONE);
        assert!((g.value(&layout, p.probs()) - p.mutual_info_x1_vs_x2y()).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let a = Alphabets::new(2, 2, 3).unwrap();
        let layout = Layout::new(a, 1, 0);
        let p = random_joint(a, 3);
        let f = Functional::mutual_info(0, Axes::X1, Axes::X2Y, Axes::NONE)
            .plus(&Functional::expectation(0, &[0.3; 12]));
        let z = p.probs().to_vec();
        let (_, g, h) = f.derivatives(&layout, &z);
        let eps = 1e-6;
        for i in 0..12 {
            let mut zp = z.clone();
            zp[i] += eps;
            let mut zm = z.clone();
            zm[i] -= eps;
            let fd = (f.value(&layout, &zp) - f.value(&layout, &zm)) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-7, "grad {i}");
            let (_, gp, _) = f.derivatives(&layout, &zp);
            let (_, gm, _) = f.derivatives(&layout, &zm);
            for j in 0..12 {
                let fdh = (gp[j] - gm[j]) / (2.0 * eps);
                assert!((fdh - h[(j, i)]).abs() < 1e-5, "hess {i} {j}");
            }
        }
    }

    #[test]
    fn kl_to_product_matches_divergence() {
        let a = Alphabets::new(2, 2, 3).unwrap();
        let layout = Layout::new(a, 1, 0);
        let p = random_joint(a, 11);
        let r = vec![0.1, 0.2, 0.3, 0.4];
        let f = Functional::kl_to_product(0, a, Axes::X1X2, &r);
        let py = p.marginal(Axes::Y);
        let reference: Vec<f64> = (0..12).map(|c| r[c / 3] * py[c % 3]).collect();
        let direct = crate::prob::kl_divergence(p.probs(), &reference);
        assert!((f.value(&layout, p.probs()) - direct).abs() < 1e-12);
    }
}
