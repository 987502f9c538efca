//! Convex programs over joint distributions on `X1 x X2 x Y`.
//!
//! A program has one or more distribution blocks (plus optional nonnegative
//! auxiliary scalars), linear equality constraints on marginals, and convex
//! inequality constraints. It is solved by a primal log-barrier Newton method
//! on the affine slice cut out by the equalities: the equalities are
//! eliminated through an explicit null-space basis, cells that every feasible
//! point must leave empty are removed up front, and a two-stage phase-1
//! program finds a strictly feasible start or certifies infeasibility.

mod functional;
mod newton;

pub use functional::{Functional, Layout, Var};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{MmacError, Result};
use crate::prob::{Alphabets, Axes, Joint};
use newton::{solve_barrier, BarrierParams, BarrierProblem};

/// Objectives are functionals of the decision variables.
pub type Objective = Functional;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEquality {
    pub block: usize,
    pub axes: Axes,
    pub target: Vec<f64>,
}

/// Equal marginals of two blocks on `axes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub first: usize,
    pub second: usize,
    pub axes: Axes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearInequality {
    pub block: usize,
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub threshold: f64,
}

/// `I(A; B | C) <= threshold` on one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiInequality {
    pub block: usize,
    pub a: Axes,
    pub b: Axes,
    pub given: Axes,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalInequality {
    pub functional: Functional,
    pub sense: Sense,
    pub threshold: f64,
}

/// Feasible set of a program. Every block is implicitly a probability
/// distribution and every auxiliary scalar is nonnegative.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub blocks: usize,
    pub aux: usize,
    pub marginal_equalities: Vec<MarginalEquality>,
    pub couplings: Vec<Coupling>,
    pub linear_inequalities: Vec<LinearInequality>,
    pub mi_inequalities: Vec<MiInequality>,
    pub functional_inequalities: Vec<FunctionalInequality>,
}

impl ConstraintSet {
    pub fn new(blocks: usize) -> Self {
        Self {
            blocks,
            ..Self::default()
        }
    }

    pub fn with_aux(mut self, aux: usize) -> Self {
        self.aux = aux;
        self
    }

    pub fn marginal(mut self, block: usize, axes: Axes, target: Vec<f64>) -> Self {
        self.marginal_equalities.push(MarginalEquality {
            block,
            axes,
            target,
        });
        self
    }

    pub fn couple(mut self, first: usize, second: usize, axes: Axes) -> Self {
        self.couplings.push(Coupling {
            first,
            second,
            axes,
        });
        self
    }

    pub fn linear(mut self, block: usize, coeffs: Vec<f64>, sense: Sense, threshold: f64) -> Self {
        self.linear_inequalities.push(LinearInequality {
            block,
            coeffs,
            sense,
            threshold,
        });
        self
    }

    pub fn mi_at_most(
        mut self,
        block: usize,
        a: Axes,
        b: Axes,
        given: Axes,
        threshold: f64,
    ) -> Self {
        self.mi_inequalities.push(MiInequality {
            block,
            a,
            b,
            given,
            threshold,
        });
        self
    }

    pub fn functional(mut self, functional: Functional, sense: Sense, threshold: f64) -> Self {
        self.functional_inequalities.push(FunctionalInequality {
            functional,
            sense,
            threshold,
        });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest constraint violation (sup norm) accepted as feasible.
    pub feas_tol: f64,
    /// Largest certified suboptimality accepted as converged.
    pub opt_tol: f64,
    pub max_newton: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            opt_tol: 1e-6,
            max_newton: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Optimal value (`+inf` for an infeasible minimization, `-inf` for an
    /// infeasible maximization).
    pub value: f64,
    /// Optimizer's first block.
    pub argmin: Joint<f64>,
    pub blocks: Vec<Joint<f64>>,
    pub aux: Vec<f64>,
    /// Certified duality gap of the final barrier iterate.
    pub kkt_residual: f64,
    pub feasibility_residual: f64,
    pub status: SolveStatus,
    pub newton_steps: usize,
}

impl SolveReport {
    pub fn is_converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn is_infeasible(&self) -> bool {
        self.status == SolveStatus::Infeasible
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Joint<f64>),
    Infeasible,
}

/// Minimizes a convex objective over the constraint set.
pub fn minimize(
    objective: &Objective,
    constraints: &ConstraintSet,
    alphabets: Alphabets,
    tol: Tolerances,
) -> Result<SolveReport> {
    Program::build(objective, constraints, alphabets, tol)?.solve()
}

/// Maximizes a concave objective over the constraint set.
pub fn maximize_concave(
    objective: &Objective,
    constraints: &ConstraintSet,
    alphabets: Alphabets,
    tol: Tolerances,
) -> Result<SolveReport> {
    let mut report = minimize(&objective.clone().scaled(-1.0), constraints, alphabets, tol)?;
    report.value = -report.value;
    Ok(report)
}

/// Finds a point satisfying every constraint, or reports that none exists.
pub fn feasibility_check(constraints: &ConstraintSet, alphabets: Alphabets) -> Result<Feasibility> {
    let tol = Tolerances::default();
    let program = Program::build(&Functional::zero(), constraints, alphabets, tol)?;
    Ok(match program.start()? {
        Start::Interior { slice, w, .. } => {
            Feasibility::Feasible(program.block(&slice.point(&w), 0))
        }
        Start::Vertex { z, .. } => Feasibility::Feasible(program.block(&z, 0)),
        Start::Infeasible => Feasibility::Infeasible,
    })
}

struct Row {
    terms: Vec<(usize, f64)>,
    rhs: f64,
}

struct Program {
    layout: Layout,
    objective: Functional,
    rows: Vec<Row>,
    /// Convex functions required to be `<= 0`.
    ineqs: Vec<Functional>,
    fixed: Vec<bool>,
    tol: Tolerances,
    infeasible: bool,
}

struct Slice {
    z0: DVector<f64>,
    basis: DMatrix<f64>,
    free: Vec<usize>,
}

impl Slice {
    fn point(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.z0 + &self.basis * w
    }
}

enum Start {
    /// Strictly feasible point `w` on a slice with positive dimension;
    /// `relax` is the slack granted to the inequalities.
    Interior {
        slice: Slice,
        w: DVector<f64>,
        relax: f64,
        steps: usize,
    },
    /// The equalities pin down a single point.
    Vertex { z: DVector<f64>, steps: usize },
    /// No point satisfies the constraints within tolerance.
    Infeasible,
}

fn normalize(f: Functional, sense: Sense, threshold: f64) -> Functional {
    match sense {
        Sense::Le => f.add_constant(-threshold),
        Sense::Ge => f.scaled(-1.0).add_constant(threshold),
    }
}

fn marginalize_target(alphabets: Alphabets, from: Axes, target: &[f64], to: Axes) -> Vec<f64> {
    let mut out = vec![0.0; alphabets.group_count(to)];
    let mut seen = vec![false; target.len()];
    for cell in 0..alphabets.cells() {
        let g = alphabets.group_of(from, cell);
        if !seen[g] {
            seen[g] = true;
            out[alphabets.group_of(to, cell)] += target[g];
        }
    }
    out
}

/// For `I(A;B|C) <= 0` with the `AC` and `BC` marginals fixed, the only
/// feasible `ABC` marginal is `P_AC P_BC / P_C`; returns it as an equality.
fn pin_independent(
    alphabets: Alphabets,
    marginals: &[MarginalEquality],
    mi: &MiInequality,
) -> Option<MarginalEquality> {
    let ac = mi.a | mi.given;
    let bc = mi.b | mi.given;
    let find = |want: Axes| {
        marginals
            .iter()
            .find(|m| m.block == mi.block && m.axes.contains(want))
            .map(|m| marginalize_target(alphabets, m.axes, &m.target, want))
    };
    let t_ac = find(ac)?;
    let t_bc = find(bc)?;
    let t_c = if mi.given.is_empty() {
        vec![1.0]
    } else {
        marginalize_target(alphabets, ac, &t_ac, mi.given)
    };
    let abc = ac | bc;
    let mut target = vec![0.0; alphabets.group_count(abc)];
    for cell in 0..alphabets.cells() {
        let c = if mi.given.is_empty() {
            0
        } else {
            alphabets.group_of(mi.given, cell)
        };
        let v = if t_c[c] > 0.0 {
            t_ac[alphabets.group_of(ac, cell)] * t_bc[alphabets.group_of(bc, cell)] / t_c[c]
        } else {
            0.0
        };
        target[alphabets.group_of(abc, cell)] = v;
    }
    Some(MarginalEquality {
        block: mi.block,
        axes: abc,
        target,
    })
}

impl Program {
    fn build(
        objective: &Functional,
        cs: &ConstraintSet,
        alphabets: Alphabets,
        tol: Tolerances,
    ) -> Result<Self> {
        if cs.blocks == 0 {
            return Err(MmacError::Unsupported(
                "program without distribution blocks".into(),
            ));
        }
        let cells = alphabets.cells();
        let block_ok = |b: usize| -> Result<()> {
            if b >= cs.blocks {
                Err(MmacError::Unsupported(format!("block {b} out of range")))
            } else {
                Ok(())
            }
        };
        let check_functional = |f: &Functional| -> Result<()> {
            if let Some(b) = f.max_block() {
                block_ok(b)?;
            }
            match f.max_aux() {
                Some(a) if a >= cs.aux => {
                    Err(MmacError::Unsupported(format!("aux {a} out of range")))
                }
                _ => Ok(()),
            }
        };
        check_functional(objective)?;
        let layout = Layout::new(alphabets, cs.blocks, cs.aux);
        let mut infeasible = false;
        let mut rows = Vec::new();
        for b in 0..cs.blocks {
            rows.push(Row {
                terms: layout.block_range(b).map(|i| (i, 1.0)).collect(),
                rhs: 1.0,
            });
        }
        let mut marginals = cs.marginal_equalities.clone();
        for eq in &marginals {
            block_ok(eq.block)?;
            if eq.target.len() != alphabets.group_count(eq.axes) || eq.axes.is_empty() {
                return Err(MmacError::Unsupported(format!(
                    "marginal target on {:?} has {} entries",
                    eq.axes,
                    eq.target.len()
                )));
            }
        }
        let mut ineqs = Vec::new();
        for mi in &cs.mi_inequalities {
            block_ok(mi.block)?;
            match pin_independent(alphabets, &marginals, mi) {
                Some(_) if mi.threshold < -tol.feas_tol => infeasible = true,
                Some(eq) if mi.threshold <= 1e-13 => marginals.push(eq),
                _ => ineqs.push(
                    Functional::mutual_info(mi.block, mi.a, mi.b, mi.given)
                        .add_constant(-mi.threshold),
                ),
            }
        }
        for eq in &marginals {
            if eq.target.iter().any(|&v| !(v >= 0.0) || !v.is_finite())
                || (eq.target.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                infeasible = true;
            }
            for (g, group) in layout.groups(eq.block, eq.axes).enumerate() {
                rows.push(Row {
                    terms: group.into_iter().map(|i| (i, 1.0)).collect(),
                    rhs: eq.target[g],
                });
            }
        }
        for c in &cs.couplings {
            block_ok(c.first)?;
            block_ok(c.second)?;
            let a: Vec<_> = layout.groups(c.first, c.axes).collect();
            let b: Vec<_> = layout.groups(c.second, c.axes).collect();
            for (ga, gb) in a.into_iter().zip(b) {
                let mut terms: Vec<(usize, f64)> = ga.into_iter().map(|i| (i, 1.0)).collect();
                terms.extend(gb.into_iter().map(|i| (i, -1.0)));
                rows.push(Row { terms, rhs: 0.0 });
            }
        }
        for li in &cs.linear_inequalities {
            block_ok(li.block)?;
            if li.coeffs.len() != cells {
                return Err(MmacError::Unsupported(
                    "linear inequality has the wrong length".into(),
                ));
            }
            let f = Functional::expectation(li.block, &li.coeffs);
            ineqs.push(normalize(f, li.sense, li.threshold));
        }
        for fi in &cs.functional_inequalities {
            check_functional(&fi.functional)?;
            ineqs.push(normalize(fi.functional.clone(), fi.sense, fi.threshold));
        }
        let mut program = Self {
            fixed: vec![false; layout.len()],
            layout,
            objective: objective.clone(),
            rows,
            ineqs,
            tol,
            infeasible,
        };
        program.propagate_zeros()?;
        Ok(program)
    }

    /// Fixes to zero every variable that some constraint forces to zero.
    fn propagate_zeros(&mut self) -> Result<()> {
        for f in std::iter::once(&self.objective).chain(&self.ineqs) {
            for &(var, c) in &f.linear {
                if c == f64::NEG_INFINITY {
                    return Err(MmacError::Unsupported(
                        "a coefficient of -inf makes the program unbounded or nonconvex".into(),
                    ));
                }
                if c == f64::INFINITY {
                    self.fixed[self.layout.index(var)] = true;
                }
            }
        }
        loop {
            let mut changed = false;
            for row in &self.rows {
                let live: Vec<(usize, f64)> = row
                    .terms
                    .iter()
                    .copied()
                    .filter(|&(i, c)| !self.fixed[i] && c != 0.0)
                    .collect();
                if live.is_empty() {
                    if row.rhs.abs() > 1e-12 {
                        self.infeasible = true;
                    }
                    continue;
                }
                let all_pos = live.iter().all(|&(_, c)| c > 0.0);
                let all_neg = live.iter().all(|&(_, c)| c < 0.0);
                if (all_pos && row.rhs <= 1e-15) || (all_neg && row.rhs >= -1e-15) {
                    if row.rhs.abs() > 1e-15 {
                        self.infeasible = true;
                    }
                    for (i, _) in live {
                        self.fixed[i] = true;
                    }
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Particular solution and null-space basis of the equalities restricted
    /// to the free variables; `None` when the equalities are inconsistent.
    fn slice(&self, fixed: &[bool]) -> Option<Slice> {
        let n = self.layout.len();
        let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
        let mut col = vec![usize::MAX; n];
        for (k, &i) in free.iter().enumerate() {
            col[i] = k;
        }
        let nf = free.len();
        let mut z0 = DVector::zeros(n);
        if nf == 0 {
            let ok = self.rows.iter().all(|r| r.rhs.abs() <= 1e-9);
            return ok.then(|| Slice {
                z0,
                basis: DMatrix::zeros(n, 0),
                free,
            });
        }
        let m = self.rows.len().max(nf);
        let mut a = DMatrix::zeros(m, nf);
        let mut b = DVector::zeros(m);
        for (r, row) in self.rows.iter().enumerate() {
            for &(i, c) in &row.terms {
                if !fixed[i] {
                    a[(r, col[i])] += c;
                }
            }
            b[r] = row.rhs;
        }
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let cut = 1e-10 * smax.max(1.0);
        let particular = svd.solve(&b, cut).ok()?;
        if (&a * &particular - &b).amax() > 1e-9 {
            return None;
        }
        let v_t = svd.v_t.as_ref()?;
        let null: Vec<usize> = (0..nf).filter(|&k| svd.singular_values[k] <= cut).collect();
        let mut basis = DMatrix::zeros(n, null.len());
        for (j, &k) in null.iter().enumerate() {
            for (c, &i) in free.iter().enumerate() {
                basis[(i, j)] = v_t[(k, c)];
            }
        }
        for (c, &i) in free.iter().enumerate() {
            z0[i] = particular[c];
        }
        Some(Slice { z0, basis, free })
    }

    fn block(&self, z: &DVector<f64>, b: usize) -> Joint<f64> {
        let probs = self.layout.block_range(b).map(|i| z[i].max(0.0)).collect();
        Joint::from_raw(self.layout.alphabets, probs)
    }

    /// Phase 1: a point in the relative interior of the positivity
    /// constraints, then strictly inside the (possibly relaxed) inequalities.
    fn start(&self) -> Result<Start> {
        if self.infeasible {
            return Ok(Start::Infeasible);
        }
        let mut fixed = self.fixed.clone();
        let mut steps = 0;
        for _ in 0..8 {
            let Some(slice) = self.slice(&fixed) else {
                return Ok(Start::Infeasible);
            };
            let k = slice.basis.ncols();
            if k == 0 {
                if slice.free.iter().any(|&i| slice.z0[i] < -self.tol.feas_tol) {
                    return Ok(Start::Infeasible);
                }
                let z = slice.z0.map(|v| v.max(0.0));
                let worst = self.worst_violation(&z);
                return Ok(if worst <= self.tol.feas_tol {
                    Start::Vertex { z, steps }
                } else {
                    Start::Infeasible
                });
            }
            let stage = Stage::new(self, &slice, StageKind::Positivity);
            let lowest = slice
                .free
                .iter()
                .map(|&i| slice.z0[i])
                .fold(f64::INFINITY, f64::min);
            let mut x0 = DVector::zeros(k + 1);
            x0[k] = (-lowest).max(-1.0) + 1.0;
            let run = solve_barrier(&stage, x0, stage.params(1e-12));
            steps += run.newton_steps;
            let w = run.x.rows(0, k).into_owned();
            if run.x[k] < -1e-9 {
                return Ok(self.inequality_start(slice, w, steps));
            }
            let z = slice.point(&w);
            let mut tightened = false;
            for &i in &slice.free {
                if z[i] < 1e-7 {
                    fixed[i] = true;
                    tightened = true;
                }
            }
            if !tightened {
                return Ok(Start::Infeasible);
            }
        }
        Ok(Start::Infeasible)
    }

    fn inequality_start(&self, slice: Slice, w: DVector<f64>, mut steps: usize) -> Start {
        let k = slice.basis.ncols();
        let z = slice.point(&w);
        let worst = self
            .ineqs
            .iter()
            .map(|g| g.value(&self.layout, z.as_slice()))
            .fold(f64::NEG_INFINITY, f64::max);
        if self.ineqs.is_empty() || worst < -1e-6 {
            return Start::Interior {
                slice,
                w,
                relax: 0.0,
                steps,
            };
        }
        let stage = Stage::new(self, &slice, StageKind::Inequalities);
        let mut x0 = DVector::zeros(k + 1);
        x0.rows_mut(0, k).copy_from(&w);
        x0[k] = worst.max(-1.0) + 1.0;
        let run = solve_barrier(&stage, x0, stage.params(1e-12));
        steps += run.newton_steps;
        let s = run.x[k];
        let w = run.x.rows(0, k).into_owned();
        if s < -1e-10 {
            return Start::Interior {
                slice,
                w,
                relax: 0.0,
                steps,
            };
        }
        let relax = s.max(0.0) + 1e-10;
        if relax <= self.tol.feas_tol {
            Start::Interior {
                slice,
                w,
                relax,
                steps,
            }
        } else {
            Start::Infeasible
        }
    }

    fn worst_violation(&self, z: &DVector<f64>) -> f64 {
        let eq = self
            .rows
            .iter()
            .map(|r| {
                let lhs: f64 = r.terms.iter().map(|&(i, c)| c * z[i]).sum();
                (lhs - r.rhs).abs()
            })
            .fold(0.0, f64::max);
        let ineq = self
            .ineqs
            .iter()
            .map(|g| g.value(&self.layout, z.as_slice()))
            .fold(0.0, f64::max);
        let neg = z.iter().map(|&v| -v).fold(0.0, f64::max);
        eq.max(ineq).max(neg)
    }

    fn solve(&self) -> Result<SolveReport> {
        let (z, gap, newton_steps, centered) = match self.start()? {
            Start::Infeasible => return Ok(self.infeasible_report()),
            Start::Vertex { z, steps } => (z, 0.0, steps, true),
            Start::Interior {
                slice,
                w,
                relax,
                steps,
            } => {
                let stage = Stage::new(self, &slice, StageKind::Objective { relax });
                let mut params = stage.params((self.tol.opt_tol * 1e-3).max(1e-11));
                params.max_newton = self.tol.max_newton;
                let run = solve_barrier(&stage, w, params);
                (
                    slice.point(&run.x),
                    run.gap,
                    steps + run.newton_steps,
                    run.centered,
                )
            }
        };
        let value = self.objective.value(&self.layout, z.as_slice());
        let feasibility_residual = self.worst_violation(&z);
        let status = if centered
            && value.is_finite()
            && feasibility_residual <= self.tol.feas_tol
            && gap <= self.tol.opt_tol
        {
            SolveStatus::Converged
        } else {
            SolveStatus::MaxIterations
        };
        let blocks: Vec<_> = (0..self.layout.blocks).map(|b| self.block(&z, b)).collect();
        let aux_start = self.layout.blocks * self.layout.alphabets.cells();
        Ok(SolveReport {
            value,
            argmin: blocks[0].clone(),
            blocks,
            aux: (0..self.layout.aux)
                .map(|j| z[aux_start + j].max(0.0))
                .collect(),
            kkt_residual: gap,
            feasibility_residual,
            status,
            newton_steps,
        })
    }

    fn infeasible_report(&self) -> SolveReport {
        let blocks = vec![Joint::uniform(self.layout.alphabets); self.layout.blocks];
        SolveReport {
            value: f64::INFINITY,
            argmin: blocks[0].clone(),
            blocks,
            aux: vec![0.0; self.layout.aux],
            kkt_residual: f64::INFINITY,
            feasibility_residual: f64::INFINITY,
            status: SolveStatus::Infeasible,
            newton_steps: 0,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum StageKind {
    /// min s s.t. z_i > -s, s > -1.
    Positivity,
    /// min s s.t. z_i > 0, g_j(z) < s, s > -1.
    Inequalities,
    /// min f(z) s.t. z_i > 0, g_j(z) < relax.
    Objective { relax: f64 },
}

const AUX_CAP: f64 = 1e3;

struct Stage<'a> {
    program: &'a Program,
    slice: &'a Slice,
    kind: StageKind,
    k: usize,
}

impl<'a> Stage<'a> {
    fn new(program: &'a Program, slice: &'a Slice, kind: StageKind) -> Self {
        Self {
            program,
            slice,
            kind,
            k: slice.basis.ncols(),
        }
    }

    fn has_slack(&self) -> bool {
        !matches!(self.kind, StageKind::Objective { .. })
    }

    /// Free auxiliary variables, which phase 1 keeps below `AUX_CAP` so that
    /// its barrier stays bounded below.
    fn capped(&self) -> impl Iterator<Item = usize> + '_ {
        let first_aux = self.program.layout.blocks * self.program.layout.alphabets.cells();
        self.slice
            .free
            .iter()
            .copied()
            .filter(move |&i| self.has_slack() && i >= first_aux)
    }

    fn params(&self, gap: f64) -> BarrierParams {
        BarrierParams {
            gap,
            max_newton: self.program.tol.max_newton,
            ..BarrierParams::default()
        }
    }

    fn split(&self, x: &DVector<f64>) -> (DVector<f64>, f64) {
        let w = x.rows(0, self.k).into_owned();
        let s = if self.has_slack() { x[self.k] } else { 0.0 };
        (self.slice.point(&w), s)
    }

    fn uses_ineqs(&self) -> bool {
        self.kind != StageKind::Positivity
    }

    fn ineq_shift(&self, s: f64) -> f64 {
        match self.kind {
            StageKind::Objective { relax } => relax,
            _ => s,
        }
    }

    fn positivity_shift(&self, s: f64) -> f64 {
        if self.kind == StageKind::Positivity {
            s
        } else {
            0.0
        }
    }

    /// Gradient of a full-space function pulled back to `x`.
    fn pull(&self, g: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        out.rows_mut(0, self.k)
            .copy_from(&(self.slice.basis.transpose() * g));
        out
    }

    fn pull_hessian(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let b = &self.slice.basis;
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        out.view_mut((0, 0), (self.k, self.k))
            .copy_from(&(b.transpose() * h * b));
        out
    }
}

impl BarrierProblem for Stage<'_> {
    fn dim(&self) -> usize {
        self.k + usize::from(self.has_slack())
    }

    fn barrier_terms(&self) -> usize {
        let ineqs = if self.uses_ineqs() {
            self.program.ineqs.len()
        } else {
            0
        };
        self.slice.free.len() + ineqs + usize::from(self.has_slack()) + self.capped().count()
    }

    fn value(&self, x: &DVector<f64>, t: f64) -> Option<f64> {
        let (z, s) = self.split(x);
        let layout = &self.program.layout;
        let mut phi = match self.kind {
            StageKind::Objective { .. } => t * self.program.objective.value(layout, z.as_slice()),
            _ => t * s,
        };
        let ps = self.positivity_shift(s);
        for &i in &self.slice.free {
            let slack = z[i] + ps;
            if !(slack > 0.0) {
                return None;
            }
            phi -= slack.ln();
        }
        if self.uses_ineqs() {
            let shift = self.ineq_shift(s);
            for g in &self.program.ineqs {
                let slack = shift - g.value(layout, z.as_slice());
                if !(slack > 0.0) {
                    return None;
                }
                phi -= slack.ln();
            }
        }
        for i in self.capped() {
            let slack = AUX_CAP - z[i];
            if !(slack > 0.0) {
                return None;
            }
            phi -= slack.ln();
        }
        if self.has_slack() {
            let slack = s + 1.0;
            if !(slack > 0.0) {
                return None;
            }
            phi -= slack.ln();
        }
        phi.is_finite().then_some(phi)
    }

    fn derivatives(&self, x: &DVector<f64>, t: f64) -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
        let (z, s) = self.split(x);
        let layout = &self.program.layout;
        let d = self.dim();
        let (mut phi, mut grad, mut hess) = match self.kind {
            StageKind::Objective { .. } => {
                let (v, g, h) = self.program.objective.derivatives(layout, z.as_slice());
                (t * v, self.pull(&g) * t, self.pull_hessian(&h) * t)
            }
            _ => {
                let mut g = DVector::zeros(d);
                g[self.k] = t;
                (t * s, g, DMatrix::zeros(d, d))
            }
        };
        let ps = self.positivity_shift(s);
        let b = &self.slice.basis;
        for &i in &self.slice.free {
            let slack = z[i] + ps;
            if !(slack > 0.0) {
                return None;
            }
            phi -= slack.ln();
            let mut dh = DVector::zeros(d);
            for j in 0..self.k {
                dh[j] = b[(i, j)];
            }
            if self.kind == StageKind::Positivity {
                dh[self.k] = 1.0;
            }
            grad -= &dh / slack;
            hess += &dh * dh.transpose() / (slack * slack);
        }
        if self.uses_ineqs() {
            let shift = self.ineq_shift(s);
            for g in &self.program.ineqs {
                let (v, gz, hz) = g.derivatives(layout, z.as_slice());
                let slack = shift - v;
                if !(slack > 0.0) {
                    return None;
                }
                phi -= slack.ln();
                let mut dh = self.pull(&gz);
                if self.has_slack() {
                    dh[self.k] = -1.0;
                }
                grad += &dh / slack;
                hess += &dh * dh.transpose() / (slack * slack);
                if g.has_entropy() {
                    hess += self.pull_hessian(&hz) / slack;
                }
            }
        }
        for i in self.capped() {
            let slack = AUX_CAP - z[i];
            if !(slack > 0.0) {
                return None;
            }
            phi -= slack.ln();
            let mut dh = DVector::zeros(d);
            for j in 0..self.k {
                dh[j] = b[(i, j)];
            }
            grad += &dh / slack;
            hess += &dh * dh.transpose() / (slack * slack);
        }
        if self.has_slack() {
            let slack = s + 1.0;
            if !(slack > 0.0) {
                return None;
            }
            phi -= slack.ln();
            grad[self.k] -= 1.0 / slack;
            hess[(self.k, self.k)] += 1.0 / (slack * slack);
        }
        phi.is_finite().then_some((phi, grad, hess))
    }

    fn done(&self, x: &DVector<f64>) -> bool {
        self.kind == StageKind::Inequalities && x[self.k] < -1e-6
    }
}
