//! Achievable rate regions: successive decoding (standard and cognitive MAC),
//! maximum-metric decoding, and boundary tracing over an `R2` grid.

mod cognitive;
mod curve;
pub mod programs;
mod standard;

pub use cognitive::{
    cognitive_r1_bound, cognitive_r2_bound, cognitive_region_maxmetric,
    cognitive_region_successive, f_under_cognitive, somekh_baruch_r1,
};
pub use curve::{concave_envelope, trace_region};
pub use standard::{
    f_under, lapidoth_r1, lapidoth_region, r1_bound_standard, r1_bound_standard_at, r2_bound_at,
    r2_bound_standard,
};

use serde::{Deserialize, Serialize};

use crate::error::{MmacError, Result};
use crate::prob::ChannelSpec;
use crate::solver::{SolveReport, SolveStatus, Tolerances};
use crate::JointDist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacKind {
    Standard,
    Cognitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Successive,
    MaxMetric,
    MatchedMl,
}

/// The rate condition that attains the `R1` bound at a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    /// Single-user condition: user 2's codeword is decoded correctly.
    SingleUser,
    /// Competing user-2 codewords with information below `R2`.
    BelowRate,
    /// Competing user-2 codewords with information above `R2`.
    AboveRate,
    /// Maximum-metric sum-rate condition.
    SumRate,
    /// Every condition is vacuous.
    Unbounded,
    /// Point raised by the concave envelope.
    TimeSharing,
}

impl Binding {
    pub fn as_str(self) -> &'static str {
        match self {
            Binding::SingleUser => "single_user",
            Binding::BelowRate => "below_rate",
            Binding::AboveRate => "above_rate",
            Binding::SumRate => "sum_rate",
            Binding::Unbounded => "unbounded",
            Binding::TimeSharing => "time_sharing",
        }
    }
}

/// A solved program behind a region value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub condition: String,
    pub value: f64,
    pub report: SolveReport,
}

impl Certificate {
    pub(crate) fn new(condition: &str, report: SolveReport) -> Self {
        Self {
            condition: condition.to_string(),
            value: report.value,
            report,
        }
    }
}

/// The lower threshold on the metric expectation used by the `R1` conditions:
/// the larger of `E_P[log q]` and the best value over the inner set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FValues {
    pub f_under: f64,
    pub metric_at_p: f64,
    /// Inner concave maximum, `-inf` when the inner set is empty.
    pub inner_max: f64,
    pub witness: Option<JointDist>,
    pub report: SolveReport,
}

/// The `R1` bound at one `R2`, with the value of every condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R1Bound {
    pub value: f64,
    pub binding: Binding,
    pub f: Option<FValues>,
    pub certificates: Vec<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub r2: f64,
    pub r1_max: f64,
    pub binding: Binding,
    pub certificates: Vec<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegionCurve {
    pub mac_kind: MacKind,
    pub decoder_kind: DecoderKind,
    /// Largest achievable `R2`; the curve ends there.
    pub r2_max: f64,
    pub points: Vec<RegionPoint>,
}

impl RateRegionCurve {
    /// Largest `R1` at `r2` by linear interpolation between points, zero
    /// beyond `r2_max`.
    pub fn r1_at(&self, r2: f64) -> f64 {
        if r2 > self.r2_max + 1e-12 || self.points.is_empty() {
            return 0.0;
        }
        let pts = &self.points;
        if r2 <= pts[0].r2 {
            return pts[0].r1_max;
        }
        for w in pts.windows(2) {
            if r2 <= w[1].r2 {
                let span = w[1].r2 - w[0].r2;
                if span <= 0.0 {
                    return w[1].r1_max;
                }
                let s = (r2 - w[0].r2) / span;
                return w[0].r1_max + s * (w[1].r1_max - w[0].r1_max);
            }
        }
        pts[pts.len() - 1].r1_max
    }

    /// Largest `R1 + R2` over the points.
    pub fn max_sum_rate(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.r1_max + p.r2)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionQuery {
    pub spec: ChannelSpec,
    pub mac_kind: MacKind,
    pub decoder_kind: DecoderKind,
    pub r2_grid: Vec<f64>,
    #[serde(default)]
    pub convex_hull: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RegionQuery {
    pub fn new(
        spec: &ChannelSpec,
        mac_kind: MacKind,
        decoder_kind: DecoderKind,
        r2_grid: Vec<f64>,
    ) -> Self {
        Self {
            spec: spec.clone(),
            mac_kind,
            decoder_kind,
            r2_grid,
            convex_hull: false,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_convex_hull(mut self, on: bool) -> Self {
        self.convex_hull = on;
        self
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }
}

/// Evenly spaced grid `0, step, 2 step, ...` up to and including `max`.
pub fn uniform_grid(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

pub(crate) fn checked(report: SolveReport, context: &str) -> Result<SolveReport> {
    match report.status {
        SolveStatus::Converged | SolveStatus::Infeasible => Ok(report),
        status => Err(MmacError::Solver {
            context: context.to_string(),
            status,
        }),
    }
}

/// Smallest value among `(binding, value)` candidates; ties go to the first.
pub(crate) fn arg_min(candidates: &[(Binding, f64)]) -> (Binding, f64) {
    candidates
        .iter()
        .copied()
        .fold((Binding::Unbounded, f64::INFINITY), |best, c| {
            if c.1 < best.1 {
                c
            } else {
                best
            }
        })
}
