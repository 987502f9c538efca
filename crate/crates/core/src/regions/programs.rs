//! Constructors for every convex program behind the rate bounds, so that
//! other optimizers can be run on exactly the same instances.
//!
//! Thresholds are explicit arguments; `e_p` denotes the metric expectation
//! `E_p[ln q]` and `threshold` the value of `F` at the given rate.

use crate::error::Result;
use crate::prob::{Alphabets, Axes, ChannelSpec};
use crate::solver::{
    maximize_concave, minimize, ConstraintSet, Functional, Sense, SolveReport, Tolerances,
};
use crate::JointDist;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexProgram {
    pub objective: Functional,
    pub constraints: ConstraintSet,
    /// `true` for a concave maximization, `false` for a convex minimization.
    pub maximize: bool,
}

impl ConvexProgram {
    fn min(objective: Functional, constraints: ConstraintSet) -> Self {
        Self {
            objective,
            constraints,
            maximize: false,
        }
    }

    pub fn solve(&self, alphabets: Alphabets, tol: Tolerances) -> Result<SolveReport> {
        if self.maximize {
            maximize_concave(&self.objective, &self.constraints, alphabets, tol)
        } else {
            minimize(&self.objective, &self.constraints, alphabets, tol)
        }
    }
}

fn i1(block: usize) -> Functional {
    Functional::mutual_info(block, Axes::X1, Axes::X2Y, Axes::NONE)
}

fn i2(block: usize) -> Functional {
    Functional::mutual_info(block, Axes::X2, Axes::X1Y, Axes::NONE)
}

fn i2_given_x1(block: usize) -> Functional {
    Functional::mutual_info(block, Axes::X2, Axes::Y, Axes::X1)
}

fn log_q(spec: &ChannelSpec) -> Vec<f64> {
    spec.log_metric().to_vec()
}

/// User-2 bound shared by the successive and maximum-metric decoders.
pub fn user2(spec: &ChannelSpec, p: &JointDist, e_p: f64) -> ConvexProgram {
    let cs = ConstraintSet::new(1)
        .marginal(0, Axes::X2, p.marginal(Axes::X2))
        .marginal(0, Axes::X1Y, p.marginal(Axes::X1Y))
        .linear(0, log_q(spec), Sense::Ge, e_p);
    ConvexProgram::min(i2(0), cs)
}

/// Inner maximization defining the threshold at rate `r2`.
pub fn inner(spec: &ChannelSpec, p: &JointDist, r2: f64) -> ConvexProgram {
    let cs = ConstraintSet::new(1)
        .marginal(0, Axes::X1Y, p.marginal(Axes::X1Y))
        .marginal(0, Axes::X2, p.marginal(Axes::X2))
        .mi_at_most(0, Axes::X2, Axes::X1Y, Axes::NONE, r2);
    ConvexProgram {
        objective: Functional::expectation(0, spec.log_metric())
            .minus(&i2(0))
            .add_constant(r2),
        constraints: cs,
        maximize: true,
    }
}

/// Single-user `R1` condition; with `threshold = e_p` it is also the
/// maximum-metric user-1 condition.
pub fn single_user(spec: &ChannelSpec, p: &JointDist, threshold: f64) -> ConvexProgram {
    let cs = ConstraintSet::new(1)
        .marginal(0, Axes::X1, p.marginal(Axes::X1))
        .marginal(0, Axes::X2Y, p.marginal(Axes::X2Y))
        .linear(0, log_q(spec), Sense::Ge, threshold);
    ConvexProgram::min(i1(0), cs)
}

fn pair(p: &JointDist) -> ConstraintSet {
    ConstraintSet::new(2)
        .marginal(0, Axes::X1, p.marginal(Axes::X1))
        .marginal(0, Axes::X2Y, p.marginal(Axes::X2Y))
        .marginal(1, Axes::X2, p.marginal(Axes::X2))
        .couple(0, 1, Axes::X1Y)
}

/// `R1` condition over competing user-2 codewords with information below `r2`.
pub fn below_rate(spec: &ChannelSpec, p: &JointDist, r2: f64, threshold: f64) -> ConvexProgram {
    let cs = pair(p)
        .mi_at_most(1, Axes::X2, Axes::X1Y, Axes::NONE, r2)
        .functional(
            Functional::expectation(1, spec.log_metric()).minus(&i2(1)),
            Sense::Ge,
            threshold - r2,
        );
    ConvexProgram::min(i1(0), cs)
}

/// `R1` condition over competing user-2 codewords with information above `r2`.
pub fn above_rate(spec: &ChannelSpec, p: &JointDist, r2: f64, threshold: f64) -> ConvexProgram {
    let cs = pair(p)
        .with_aux(1)
        .linear(1, log_q(spec), Sense::Ge, threshold)
        .functional(i2(1).minus(&Functional::aux(0)), Sense::Le, r2);
    ConvexProgram::min(i1(0).plus(&Functional::aux(0)), cs)
}

/// Maximum-metric sum-rate condition of the standard MAC at `(r1, r2)`.
pub fn sum_rate(spec: &ChannelSpec, p: &JointDist, e_p: f64, r1: f64, r2: f64) -> ConvexProgram {
    let a = spec.alphabets();
    let q1 = p.marginal(Axes::X1);
    let q2 = p.marginal(Axes::X2);
    let reference: Vec<f64> = q1
        .iter()
        .flat_map(|&u| q2.iter().map(move |&v| u * v))
        .collect();
    let cs = ConstraintSet::new(1)
        .marginal(0, Axes::X1, q1)
        .marginal(0, Axes::X2, q2)
        .marginal(0, Axes::Y, p.marginal(Axes::Y))
        .linear(0, log_q(spec), Sense::Ge, e_p)
        .mi_at_most(0, Axes::X1, Axes::Y, Axes::NONE, r1)
        .mi_at_most(0, Axes::X2, Axes::Y, Axes::NONE, r2);
    ConvexProgram::min(Functional::kl_to_product(0, a, Axes::X1X2, &reference), cs)
}

/// Cognitive user-2 bound.
pub fn cognitive_user2(spec: &ChannelSpec, p: &JointDist, e_p: f64) -> ConvexProgram {
    let cs = ConstraintSet::new(1)
        .marginal(0, Axes::X1X2, p.marginal(Axes::X1X2))
        .marginal(0, Axes::X1Y, p.marginal(Axes::X1Y))
        .linear(0, log_q(spec), Sense::Ge, e_p);
    ConvexProgram::min(i2_given_x1(0), cs)
}

/// Cognitive inner maximization; the inner set keeps the `X1 Y` and `X1 X2`
/// marginals of `p`.
pub fn cognitive_inner(spec: &ChannelSpec, p: &JointDist, r2: f64) -> ConvexProgram {
    let cs = ConstraintSet::new(1)
        .marginal(0, Axes::X1Y, p.marginal(Axes::X1Y))
        .marginal(0, Axes::X1X2, p.marginal(Axes::X1X2))
        .mi_at_most(0, Axes::X2, Axes::Y, Axes::X1, r2);
    ConvexProgram {
        objective: Functional::expectation(0, spec.log_metric())
            .minus(&i2_given_x1(0))
            .add_constant(r2),
        constraints: cs,
        maximize: true,
    }
}

fn cognitive_base(p: &JointDist) -> ConstraintSet {
    ConstraintSet::new(1)
        .marginal(0, Axes::X1X2, p.marginal(Axes::X1X2))
        .marginal(0, Axes::Y, p.marginal(Axes::Y))
}

fn i1_y(block: usize) -> Functional {
    Functional::mutual_info(block, Axes::X1, Axes::Y, Axes::NONE)
}

pub fn cognitive_below_rate(
    spec: &ChannelSpec,
    p: &JointDist,
    r2: f64,
    threshold: f64,
) -> ConvexProgram {
    let cs = cognitive_base(p)
        .mi_at_most(0, Axes::X2, Axes::Y, Axes::X1, r2)
        .functional(
            Functional::expectation(0, spec.log_metric()).minus(&i2_given_x1(0)),
            Sense::Ge,
            threshold - r2,
        );
    ConvexProgram::min(i1_y(0), cs)
}

pub fn cognitive_above_rate(
    spec: &ChannelSpec,
    p: &JointDist,
    r2: f64,
    threshold: f64,
) -> ConvexProgram {
    let cs = cognitive_base(p)
        .with_aux(1)
        .linear(0, log_q(spec), Sense::Ge, threshold)
        .functional(i2_given_x1(0).minus(&Functional::aux(0)), Sense::Le, r2);
    ConvexProgram::min(i1_y(0).plus(&Functional::aux(0)), cs)
}

/// Maximum-metric sum-rate condition of the cognitive MAC at `r1`.
pub fn cognitive_sum_rate(spec: &ChannelSpec, p: &JointDist, e_p: f64, r1: f64) -> ConvexProgram {
    let cs = cognitive_base(p)
        .linear(0, log_q(spec), Sense::Ge, e_p)
        .mi_at_most(0, Axes::X1, Axes::Y, Axes::NONE, r1);
    ConvexProgram::min(
        Functional::mutual_info(0, Axes::X1X2, Axes::Y, Axes::NONE),
        cs,
    )
}
