//! Brute-force reference optimizer over joint types of a fixed denominator.
//!
//! Every block ranges over all count vectors with total `d` whose marginals
//! match the constraint targets after quantization by [`closest_type`];
//! couplings are imposed as exact integer equalities between blocks. A single
//! auxiliary scalar, if present, is eliminated in closed form since every
//! functional is affine in it.

mod sandwich;

pub use sandwich::{
    round_to_grid, sandwich_suite, BracketConstant, SandwichCheck, SandwichOptions, SandwichStatus,
    SUM_RATE_R1,
};

use serde::{Deserialize, Serialize};

use crate::error::{MmacError, Result};
use crate::prob::{
    closest_type, count_compositions, enumerate_with_marginals, Alphabets, Axes, JointType,
    ENUMERATION_BUDGET,
};
use crate::solver::{ConstraintSet, Functional, Layout, Sense, Var};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    /// Optimal type of block 0.
    pub arg_type: JointType,
    /// Optimal types of all blocks.
    pub arg_types: Vec<JointType>,
    pub aux: Vec<f64>,
    pub grid_denominator: usize,
    pub evaluated_count: u64,
}

struct Setup<'a> {
    objective: &'a Functional,
    cs: &'a ConstraintSet,
    alphabets: Alphabets,
    d: usize,
    layout: Layout,
    targets: Vec<Vec<(Axes, Vec<usize>)>>,
    sign: f64,
}

struct Search {
    z: Vec<f64>,
    counts: Vec<Vec<usize>>,
    best: Option<(f64, Vec<Vec<usize>>, f64)>,
    evaluated: u64,
    nodes: u128,
}

/// Rounding allowance for inequality checks, so that a type sitting exactly
/// on a constraint boundary is not rejected by summation-order noise.
fn slack(threshold: f64) -> f64 {
    if threshold.is_finite() {
        1e-12 * (1.0 + threshold.abs())
    } else {
        0.0
    }
}

fn aux_coef(f: &Functional) -> f64 {
    f.linear
        .iter()
        .filter(|(v, _)| matches!(v, Var::Aux(_)))
        .map(|(_, c)| c)
        .sum()
}

impl Setup<'_> {
    fn feasible_point(&self, z: &mut [f64]) -> Option<f64> {
        let cells = self.alphabets.cells();
        for lin in &self.cs.linear_inequalities {
            let block = &z[lin.block * cells..(lin.block + 1) * cells];
            let v: f64 = lin
                .coeffs
                .iter()
                .zip(block)
                .filter(|(_, &p)| p != 0.0)
                .map(|(c, p)| c * p)
                .sum();
            let ok = match lin.sense {
                Sense::Le => v <= lin.threshold + slack(lin.threshold),
                Sense::Ge => v >= lin.threshold - slack(lin.threshold),
            };
            if !ok {
                return None;
            }
        }
        for mi in &self.cs.mi_inequalities {
            let v = Functional::mutual_info(mi.block, mi.a, mi.b, mi.given).value(&self.layout, z);
            if v > mi.threshold + slack(mi.threshold) {
                return None;
            }
        }
        // Interval of admissible values of the auxiliary scalar.
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        for fi in &self.cs.functional_inequalities {
            let a = aux_coef(&fi.functional);
            if self.cs.aux > 0 {
                z[self.layout.index(Var::Aux(0))] = 0.0;
            }
            let g = fi.functional.value(&self.layout, z);
            let (a, g, b) = match fi.sense {
                Sense::Le => (a, g, fi.threshold),
                Sense::Ge => (-a, -g, -fi.threshold),
            };
            // g + a t <= b
            if a == 0.0 {
                if g > b + slack(b) {
                    return None;
                }
            } else if a > 0.0 {
                hi = hi.min((b - g) / a);
            } else {
                lo = lo.max((b - g) / a);
            }
        }
        if lo > hi + slack(hi) {
            return None;
        }
        if self.cs.aux == 0 {
            return Some(0.0);
        }
        let c = self.sign * aux_coef(self.objective);
        let t = if c < 0.0 { hi } else { lo.min(hi) };
        t.is_finite().then_some(t)
    }

    fn descend(&self, block: usize, s: &mut Search) -> Result<()> {
        let cells = self.alphabets.cells();
        if block == self.cs.blocks {
            s.evaluated += 1;
            let mut z = s.z.clone();
            let Some(t) = self.feasible_point(&mut z) else {
                return Ok(());
            };
            if self.cs.aux > 0 {
                z[self.layout.index(Var::Aux(0))] = t;
            }
            let v = self.sign * self.objective.value(&self.layout, &z);
            if v.is_nan() {
                return Ok(());
            }
            if s.best.as_ref().is_none_or(|b| v < b.0) {
                s.best = Some((v, s.counts.clone(), t));
            }
            return Ok(());
        }
        let mut marginals = self.targets[block].clone();
        for c in &self.cs.couplings {
            let other = if c.second == block && c.first < block {
                c.first
            } else if c.first == block && c.second < block {
                c.second
            } else {
                continue;
            };
            let fixed = crate::prob::marginal_counts(self.alphabets, &s.counts[other], c.axes);
            marginals.push((c.axes, fixed));
        }
        if marginals.is_empty() {
            let needed = count_compositions(self.d, cells);
            if needed > ENUMERATION_BUDGET {
                return Err(MmacError::BudgetExceeded {
                    needed,
                    budget: ENUMERATION_BUDGET,
                });
            }
        }
        let d = self.d as f64;
        let mut failure = None;
        let budget = ENUMERATION_BUDGET.saturating_sub(s.nodes);
        let visited =
            enumerate_with_marginals(self.alphabets, self.d, &marginals, budget, |counts| {
                if failure.is_some() {
                    return;
                }
                if s.evaluated >= ENUMERATION_BUDGET as u64 {
                    failure = Some(MmacError::BudgetExceeded {
                        needed: u128::from(s.evaluated) + 1,
                        budget: ENUMERATION_BUDGET,
                    });
                    return;
                }
                for (cell, &k) in counts.iter().enumerate() {
                    s.z[block * cells + cell] = k as f64 / d;
                }
                s.counts[block] = counts.to_vec();
                if let Err(e) = self.descend(block + 1, s) {
                    failure = Some(e);
                }
            })?;
        s.nodes += u128::from(visited);
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(())
    }
}

fn optimize(
    objective: &Functional,
    constraints: &ConstraintSet,
    alphabets: Alphabets,
    d: usize,
    sign: f64,
) -> Result<OracleResult> {
    if d == 0 || constraints.blocks == 0 {
        return Err(MmacError::InvalidConfig(
            "denominator and block count must be positive".into(),
        ));
    }
    if constraints.aux > 1 {
        return Err(MmacError::Unsupported(
            "the oracle eliminates at most one auxiliary scalar".into(),
        ));
    }
    let mut targets = vec![Vec::new(); constraints.blocks];
    for m in &constraints.marginal_equalities {
        let q = closest_type(&m.target, d)?;
        targets[m.block].push((m.axes, q.counts));
    }
    let setup = Setup {
        objective,
        cs: constraints,
        alphabets,
        d,
        layout: Layout::new(alphabets, constraints.blocks, constraints.aux),
        targets,
        sign,
    };
    let mut search = Search {
        z: vec![0.0; setup.layout.len()],
        counts: vec![Vec::new(); constraints.blocks],
        best: None,
        evaluated: 0,
        nodes: 0,
    };
    setup.descend(0, &mut search)?;
    let (value, counts, t) = search.best.ok_or(MmacError::EmptyFeasibleSet)?;
    let arg_types = counts
        .into_iter()
        .map(|c| JointType::new(alphabets, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleResult {
        value: sign * value,
        arg_type: arg_types[0].clone(),
        arg_types,
        aux: if constraints.aux > 0 { vec![t] } else { vec![] },
        grid_denominator: d,
        evaluated_count: search.evaluated,
    })
}

/// Exact minimum of `objective` over all denominator-`d` types meeting the
/// constraints; ties resolve to the lexicographically first type.
pub fn grid_minimize(
    objective: &Functional,
    constraints: &ConstraintSet,
    alphabets: Alphabets,
    d: usize,
) -> Result<OracleResult> {
    optimize(objective, constraints, alphabets, d, 1.0)
}

/// Exact maximum, mirroring [`grid_minimize`].
pub fn grid_maximize(
    objective: &Functional,
    constraints: &ConstraintSet,
    alphabets: Alphabets,
    d: usize,
) -> Result<OracleResult> {
    optimize(objective, constraints, alphabets, d, -1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Alphabets {
        Alphabets::new(1, 1, 2).unwrap()
    }

    #[test]
    fn two_cells_at_denominator_two() {
        let obj = Functional::expectation(0, &[1.0, 3.0]);
        let r = grid_minimize(&obj, &ConstraintSet::new(1), tiny(), 2).unwrap();
        assert_eq!(r.evaluated_count, 3);
        assert_eq!(r.arg_type.counts, vec![2, 0]);
        assert_eq!(r.value, 1.0);
        let r = grid_maximize(&obj, &ConstraintSet::new(1), tiny(), 2).unwrap();
        assert_eq!(r.arg_type.counts, vec![0, 2]);
        assert_eq!(r.value, 3.0);
    }

    #[test]
    fn conflicting_marginals_are_empty() {
        let a = Alphabets::new(2, 2, 2).unwrap();
        let cs = ConstraintSet::new(1)
            .marginal(0, Axes::X1, vec![1.0, 0.0])
            .marginal(0, Axes::X1Y, vec![0.0, 0.0, 0.5, 0.5]);
        let r = grid_minimize(&Functional::zero(), &cs, a, 4);
        assert_eq!(r.unwrap_err(), MmacError::EmptyFeasibleSet);
    }

    #[test]
    fn aux_is_eliminated_at_its_lower_end() {
        let a = tiny();
        let cs = ConstraintSet::new(1)
            .with_aux(1)
            .marginal(0, Axes::Y, vec![0.5, 0.5])
            .functional(
                Functional::entropy(0, Axes::Y).minus(&Functional::aux(0)),
                Sense::Le,
                0.1,
            );
        let r = grid_minimize(&Functional::aux(0), &cs, a, 4).unwrap();
        assert!((r.value - (2f64.ln() - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn coupled_blocks_share_the_marginal() {
        let a = Alphabets::new(2, 2, 2).unwrap();
        let cs = ConstraintSet::new(2)
            .marginal(0, Axes::X1, vec![0.5, 0.5])
            .couple(0, 1, Axes::X1Y);
        let obj = Functional::entropy(0, Axes::ALL).plus(&Functional::entropy(1, Axes::ALL));
        let r = grid_maximize(&obj, &cs, a, 4).unwrap();
        assert_eq!(
            r.arg_types[0].marginal_counts(Axes::X1Y),
            r.arg_types[1].marginal_counts(Axes::X1Y)
        );
    }

    #[test]
    fn oversized_grids_are_refused() {
        let a = Alphabets::new(3, 3, 3).unwrap();
        assert!(matches!(
            grid_minimize(&Functional::zero(), &ConstraintSet::new(1), a, 40),
            Err(MmacError::BudgetExceeded { .. })
        ));
    }
}
