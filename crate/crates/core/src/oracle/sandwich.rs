//! Solver-versus-grid comparison on every program behind the rate regions.
//!
//! Both optimizers see the same instance: the true joint rounded to the grid
//! denominator `d`, and for the `R1` conditions the threshold computed on the
//! grid. A minimum passes when `solver <= grid + opt_tol` and
//! `grid <= solver + eps`; maxima mirror this. `eps(d) = C ln(d) / d`.

use serde::{Deserialize, Serialize};

use super::{grid_maximize, grid_minimize};
use crate::error::{MmacError, Result};
use crate::prob::{metric_expectation, ChannelSpec};
use crate::regions::programs::{self, ConvexProgram};
use crate::solver::Tolerances;
use crate::JointDist;

/// `R1` at which the maximum-metric sum-rate programs are checked.
pub const SUM_RATE_R1: f64 = 0.2;

/// Bracket constant `C`, either shared by all programs or per family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketConstant {
    Uniform(f64),
    PerFamily,
}

impl BracketConstant {
    /// Per-family constants, measured on the bundled configurations at
    /// `d` in {8, 12, 16} and rounded up.
    pub fn family(program: &str) -> f64 {
        match program {
            "inner" => 3.5,
            "single_user" | "below_rate" | "above_rate" => 2.0,
            _ => 0.75,
        }
    }

    pub fn epsilon(self, program: &str, d: usize) -> f64 {
        let c = match self {
            Self::Uniform(c) => c,
            Self::PerFamily => Self::family(program),
        };
        c * (d as f64).ln() / d as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SandwichStatus {
    Pass,
    Fail,
    /// No grid type is feasible although the continuous program is.
    GridEmpty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub program: String,
    /// `None` for programs that do not depend on `R2`.
    pub r2: Option<f64>,
    pub maximize: bool,
    pub solver: f64,
    /// `None` when no grid type is feasible.
    pub grid: Option<f64>,
    pub epsilon: f64,
    /// Whether the solver is no worse than the grid, up to `opt_tol`.
    pub one_sided: bool,
    pub status: SandwichStatus,
}

/// Largest-remainder rounding of every cell of `p` to multiples of `1/d`.
pub fn round_to_grid(p: &JointDist, d: usize) -> Result<JointDist> {
    if d == 0 {
        return Err(MmacError::InvalidConfig(
            "grid denominator must be positive".into(),
        ));
    }
    let scaled: Vec<f64> = p.probs().iter().map(|x| x * d as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let mut order: Vec<usize> = (0..scaled.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let left = d.saturating_sub(counts.iter().sum::<usize>());
    for &i in order.iter().take(left) {
        counts[i] += 1;
    }
    JointDist::new(
        p.alphabets(),
        counts.iter().map(|&k| k as f64 / d as f64).collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichOptions {
    pub denominator: usize,
    pub r2_values: Vec<f64>,
    pub bracket: BracketConstant,
    /// Tolerances handed to the solver.
    pub solver: Tolerances,
    /// Allowance of the one-sided check.
    pub slack: f64,
}

impl SandwichOptions {
    pub fn new(denominator: usize, r2_values: &[f64], bracket: BracketConstant) -> Self {
        let solver = Tolerances::default();
        Self {
            denominator,
            r2_values: r2_values.to_vec(),
            bracket,
            solver,
            slack: solver.opt_tol,
        }
    }
}

struct Runner<'a> {
    spec: &'a ChannelSpec,
    opts: &'a SandwichOptions,
    checks: Vec<SandwichCheck>,
}

impl Runner<'_> {
    /// Solves `program` both ways and records the comparison; returns the grid value.
    fn check(
        &mut self,
        name: &str,
        r2: Option<f64>,
        program: ConvexProgram,
    ) -> Result<Option<f64>> {
        let a = self.spec.alphabets();
        let d = self.opts.denominator;
        let solver = program.solve(a, self.opts.solver)?.value;
        let grid = if program.maximize {
            grid_maximize(&program.objective, &program.constraints, a, d)
        } else {
            grid_minimize(&program.objective, &program.constraints, a, d)
        };
        let grid = match grid {
            Ok(r) => Some(r.value),
            Err(MmacError::EmptyFeasibleSet) => None,
            Err(e) => return Err(e),
        };
        let epsilon = self.opts.bracket.epsilon(name, d);
        let opt = self.opts.slack;
        let (one_sided, status) = match grid {
            Some(g) => {
                let (lo, hi) = if program.maximize {
                    (g, solver)
                } else {
                    (solver, g)
                };
                let one_sided = lo <= hi + opt;
                let within = hi <= lo + epsilon;
                let status = if one_sided && within {
                    SandwichStatus::Pass
                } else {
                    SandwichStatus::Fail
                };
                (one_sided, status)
            }
            None if solver.is_infinite() => (true, SandwichStatus::Pass),
            None => (true, SandwichStatus::GridEmpty),
        };
        self.checks.push(SandwichCheck {
            program: name.to_string(),
            r2,
            maximize: program.maximize,
            solver,
            grid,
            epsilon,
            one_sided,
            status,
        });
        Ok(grid)
    }
}

/// Runs the comparison for every program at each rate in `opts.r2_values`.
pub fn sandwich_suite(spec: &ChannelSpec, opts: &SandwichOptions) -> Result<Vec<SandwichCheck>> {
    let p = round_to_grid(&spec.true_joint(), opts.denominator)?;
    let e_p = metric_expectation(&p, spec)?;
    let mut run = Runner {
        spec,
        opts,
        checks: Vec::new(),
    };
    let cognitive = spec.is_cognitive();
    if cognitive {
        run.check("user2", None, programs::cognitive_user2(spec, &p, e_p))?;
        run.check(
            "sum_rate",
            None,
            programs::cognitive_sum_rate(spec, &p, e_p, SUM_RATE_R1),
        )?;
    } else {
        run.check("user2", None, programs::user2(spec, &p, e_p))?;
        run.check(
            "max_metric_user1",
            None,
            programs::single_user(spec, &p, e_p),
        )?;
    }
    for &r2 in &opts.r2_values {
        let inner = if cognitive {
            programs::cognitive_inner(spec, &p, r2)
        } else {
            programs::inner(spec, &p, r2)
        };
        let inner = run.check("inner", Some(r2), inner)?;
        let threshold = inner.map_or(e_p, |g| g.max(e_p));
        if cognitive {
            if r2 > 0.0 {
                run.check(
                    "below_rate",
                    Some(r2),
                    programs::cognitive_below_rate(spec, &p, r2, threshold),
                )?;
            }
            run.check(
                "above_rate",
                Some(r2),
                programs::cognitive_above_rate(spec, &p, r2, threshold),
            )?;
        } else {
            run.check(
                "single_user",
                Some(r2),
                programs::single_user(spec, &p, threshold),
            )?;
            if r2 > 0.0 {
                run.check(
                    "below_rate",
                    Some(r2),
                    programs::below_rate(spec, &p, r2, threshold),
                )?;
            }
            run.check(
                "above_rate",
                Some(r2),
                programs::above_rate(spec, &p, r2, threshold),
            )?;
            run.check(
                "sum_rate",
                Some(r2),
                programs::sum_rate(spec, &p, e_p, SUM_RATE_R1, r2),
            )?;
        }
    }
    Ok(run.checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabets;

    #[test]
    fn rounding_keeps_the_total() {
        let a = Alphabets::new(1, 1, 3).unwrap();
        let p = JointDist::new(a, vec![0.2, 0.3, 0.5]).unwrap();
        let r = round_to_grid(&p, 4).unwrap();
        assert_eq!(r.probs(), &[0.25, 0.25, 0.5]);
    }

    #[test]
    fn uniform_bracket_matches_the_formula() {
        let e = BracketConstant::Uniform(0.5).epsilon("inner", 16);
        assert!((e - 0.5 * 16f64.ln() / 16.0).abs() < 1e-15);
        assert!(BracketConstant::PerFamily.epsilon("inner", 16) > e);
    }
}
