//! Random-coding error exponents of the successive decoder.
//!
//! Each exponent is an outer minimization over joint distributions `P` with
//! the input marginals of the ensemble of `D(P || Q x W) + [inner(P) - R]^+`,
//! where the inner term is a rate bound evaluated at `P`. The outer problem
//! is not convex, so it is solved exhaustively over the joint types of a
//! fixed denominator, plus the true joint `Q x W` itself, with optional local
//! refinement. Types are visited in increasing order of divergence and the
//! search stops once the divergence alone exceeds the best value found.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MmacError, Result};
use crate::prob::{
    closest_type, enumerate_with_marginals, Axes, ChannelSpec, JointType, ENUMERATION_BUDGET,
};
use crate::regions::{cognitive_r1_bound, r1_bound_standard_at, r2_bound_at, Certificate, MacKind};
use crate::solver::Tolerances;
use crate::JointDist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentQuery {
    pub spec: ChannelSpec,
    pub mac_kind: MacKind,
    pub r1: f64,
    pub r2: f64,
    pub outer_grid_denominator: usize,
    #[serde(default)]
    pub refine: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExponentQuery {
    pub fn new(
        spec: &ChannelSpec,
        mac_kind: MacKind,
        r1: f64,
        r2: f64,
        outer_grid_denominator: usize,
    ) -> Self {
        Self {
            spec: spec.clone(),
            mac_kind,
            r1,
            r2,
            outer_grid_denominator,
            refine: false,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_refine(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub value: f64,
    pub outer_argmin: JointDist,
    /// Grid type attaining the value; `None` when the true joint or a refined
    /// point did.
    pub outer_type: Option<JointType>,
    pub divergence: f64,
    pub inner_value: f64,
    pub grid_denominator: usize,
    /// Number of outer points whose inner bound was computed.
    pub evaluated: usize,
    /// Number of grid types satisfying the marginal constraints.
    pub grid_size: usize,
    pub certificates: Vec<Certificate>,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Type1Standard,
    Type2Standard,
    Type1Cognitive,
}

struct Eval {
    value: f64,
    divergence: f64,
    inner: f64,
    certificates: Vec<Certificate>,
}

/// `D(P || Q12 x W)` with the reference built from the ensemble's input.
fn divergence(spec: &ChannelSpec, input: &[f64], p: &[f64]) -> f64 {
    let y = spec.alphabets().y;
    let w = spec.channel();
    let mut d = 0.0;
    for (c, &pc) in p.iter().enumerate() {
        if pc > 0.0 {
            let r = input[c / y] * w[c];
            if r <= 0.0 {
                return f64::INFINITY;
            }
            d += pc * (pc / r).ln();
        }
    }
    d.max(0.0)
}

struct Problem<'a> {
    spec: &'a ChannelSpec,
    kind: Kind,
    r1: f64,
    r2: f64,
    tol: Tolerances,
    input: Vec<f64>,
}

impl Problem<'_> {
    fn inner(&self, p: &JointDist) -> Result<(f64, Vec<Certificate>)> {
        match self.kind {
            Kind::Type1Standard => {
                let b = r1_bound_standard_at(self.spec, p, self.r2, self.tol)?;
                Ok((b.value, b.certificates))
            }
            Kind::Type1Cognitive => {
                let b = cognitive_r1_bound(self.spec, p, self.r2, self.tol)?;
                Ok((b.value, b.certificates))
            }
            Kind::Type2Standard => {
                let r = r2_bound_at(self.spec, p, self.tol)?;
                Ok((r.value.max(0.0), vec![Certificate::new("user2", r)]))
            }
        }
    }

    fn rate(&self) -> f64 {
        match self.kind {
            Kind::Type2Standard => self.r2,
            _ => self.r1,
        }
    }

    fn evaluate(&self, p: &JointDist, divergence: f64) -> Result<Eval> {
        let (inner, certificates) = self.inner(p)?;
        Ok(Eval {
            value: divergence + (inner - self.rate()).max(0.0),
            divergence,
            inner,
            certificates,
        })
    }

    fn marginal_axes(&self) -> Vec<Axes> {
        match self.kind {
            Kind::Type1Cognitive => vec![Axes::X1X2],
            _ => vec![Axes::X1, Axes::X2],
        }
    }

    /// Coordinate moves that keep the constrained marginals fixed.
    fn moves(&self) -> Vec<Vec<(usize, f64)>> {
        let a = self.spec.alphabets();
        let mut out = Vec::new();
        for x1 in 0..a.x1 {
            for x2 in 0..a.x2 {
                for y in 0..a.y {
                    for y2 in 0..a.y {
                        if y != y2 {
                            out.push(vec![(a.index(x1, x2, y), 1.0), (a.index(x1, x2, y2), -1.0)]);
                        }
                    }
                }
            }
        }
        if self.kind != Kind::Type1Cognitive {
            for x1 in 0..a.x1 {
                for x1b in 0..a.x1 {
                    for x2 in 0..a.x2 {
                        for x2b in 0..a.x2 {
                            if x1 == x1b || x2 == x2b {
                                continue;
                            }
                            for y in 0..a.y {
                                for y2 in 0..a.y {
                                    out.push(vec![
                                        (a.index(x1, x2, y), 1.0),
                                        (a.index(x1b, x2b, y2), 1.0),
                                        (a.index(x1, x2b, y), -1.0),
                                        (a.index(x1b, x2, y2), -1.0),
                                    ]);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn run(query: &ExponentQuery, kind: Kind) -> Result<ExponentReport> {
    let spec = &query.spec;
    match (kind, spec.is_cognitive()) {
        (Kind::Type1Cognitive, false) => {
            return Err(MmacError::InvalidConfig(
                "cognitive exponent needs a joint input q12".into(),
            ))
        }
        (Kind::Type1Standard | Kind::Type2Standard, true) => {
            return Err(MmacError::InvalidConfig(
                "standard exponent needs independent inputs q1, q2".into(),
            ))
        }
        _ => {}
    }
    if !(query.r1 >= 0.0 && query.r2 >= 0.0) {
        return Err(MmacError::InvalidConfig("rates must be nonnegative".into()));
    }
    let a = spec.alphabets();
    let d = query.outer_grid_denominator;
    if d < a.x1 * a.x2 {
        return Err(MmacError::InvalidConfig(format!(
            "outer grid denominator {d} is below |X1||X2| = {}",
            a.x1 * a.x2
        )));
    }
    let problem = Problem {
        spec,
        kind,
        r1: query.r1,
        r2: query.r2,
        tol: query.tolerances,
        input: spec.input_joint(),
    };

    let truth = spec.true_joint();
    let anchor = problem.evaluate(&truth, 0.0)?;
    let mut best = (anchor, truth.clone(), None::<JointType>);
    let mut evaluated = 1;

    let targets: Vec<(Axes, Vec<usize>)> = problem
        .marginal_axes()
        .into_iter()
        .map(|axes| Ok((axes, closest_type(&truth.marginal(axes), d)?.counts)))
        .collect::<Result<_>>()?;
    let mut grid: Vec<(f64, Vec<usize>)> = Vec::new();
    enumerate_with_marginals(a, d, &targets, ENUMERATION_BUDGET, |counts| {
        let p: Vec<f64> = counts.iter().map(|&k| k as f64 / d as f64).collect();
        let div = divergence(spec, &problem.input, &p);
        if div.is_finite() {
            grid.push((div, counts.to_vec()));
        }
    })?;
    let grid_size = grid.len();
    grid.sort_by(|x, y| x.0.total_cmp(&y.0));

    const CHUNK: usize = 32;
    let mut next = 0;
    while next < grid.len() && grid[next].0 < best.0.value {
        let end = (next + CHUNK).min(grid.len());
        let batch: Vec<_> = grid[next..end]
            .par_iter()
            .map(|(div, counts)| {
                if *div >= best.0.value {
                    return Ok(None);
                }
                let t = JointType::new(a, counts.clone())?;
                let p = t.to_joint::<f64>();
                problem.evaluate(&p, *div).map(|e| Some((e, p, t)))
            })
            .collect();
        for r in batch {
            if let Some((e, p, t)) = r? {
                evaluated += 1;
                if e.value < best.0.value {
                    best = (e, p, Some(t));
                }
            }
        }
        next = end;
    }

    if query.refine {
        let (e, p, refined) = refine(&problem, best.0, best.1, 0.5 / d as f64, &mut evaluated)?;
        best = (e, p, if refined { None } else { best.2 });
    }

    let (eval, p, t) = best;
    Ok(ExponentReport {
        value: eval.value.max(0.0),
        outer_argmin: p,
        outer_type: t,
        divergence: eval.divergence,
        inner_value: eval.inner,
        grid_denominator: d,
        evaluated,
        grid_size,
        certificates: eval.certificates,
    })
}

/// Pattern search along marginal-preserving moves; never increases the value.
fn refine(
    problem: &Problem,
    mut best: Eval,
    mut p: JointDist,
    mut step: f64,
    evaluated: &mut usize,
) -> Result<(Eval, JointDist, bool)> {
    let moves = problem.moves();
    let mut moved = false;
    while step >= 1e-4 {
        let mut improved = false;
        for mv in &moves {
            let mut probs = p.probs().to_vec();
            let mut ok = true;
            for &(c, s) in mv {
                probs[c] += s * step;
                if probs[c] < 0.0 {
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
            let div = divergence(problem.spec, &problem.input, &probs);
            if !(div < best.value) {
                continue;
            }
            let cand = JointDist::new(p.alphabets(), probs)?;
            let e = problem.evaluate(&cand, div)?;
            *evaluated += 1;
            if e.value < best.value - 1e-12 {
                best = e;
                p = cand;
                improved = true;
                moved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((best, p, moved))
}

/// Exponent of user 1's error under successive decoding, standard MAC.
pub fn exponent_type1_standard(query: &ExponentQuery) -> Result<ExponentReport> {
    run(query, Kind::Type1Standard)
}

/// Exponent of user 2's error, standard MAC.
pub fn exponent_type2_standard(query: &ExponentQuery) -> Result<ExponentReport> {
    run(query, Kind::Type2Standard)
}

/// Exponent of user 1's error under successive decoding, cognitive MAC.
pub fn exponent_type1_cognitive(query: &ExponentQuery) -> Result<ExponentReport> {
    run(query, Kind::Type1Cognitive)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> ChannelSpec {
        ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, false).unwrap()
    }

    #[test]
    fn vanishes_above_the_bound() {
        let q = ExponentQuery::new(&fig1(), MacKind::Standard, 1.0, 0.1, 4);
        let r = exponent_type1_standard(&q).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.outer_type.is_none());
    }

    #[test]
    fn user2_exponent_is_positive_below_its_bound() {
        let q = ExponentQuery::new(&fig1(), MacKind::Standard, 0.0, 0.2, 4);
        let r = exponent_type2_standard(&q).unwrap();
        assert!(r.value > 0.0);
        let (r2_max, _) =
            crate::regions::r2_bound_standard(&fig1(), Tolerances::default()).unwrap();
        assert!(r.value <= r2_max - 0.2 + 1e-6);
    }

    #[test]
    fn kinds_must_match_the_inputs() {
        let q = ExponentQuery::new(&fig1(), MacKind::Cognitive, 0.1, 0.1, 4);
        assert!(exponent_type1_cognitive(&q).is_err());
    }

    #[test]
    fn divergence_of_the_truth_is_zero() {
        let s = fig1();
        let p = s.true_joint();
        assert!(divergence(&s, &s.input_joint(), p.probs()).abs() < 1e-15);
    }
}
