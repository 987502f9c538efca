use anyhow::Result;
use mmac::exponents::{exponent_type1_cognitive, exponent_type1_standard, ExponentQuery};
use mmac::oracle::{sandwich_suite, BracketConstant, SandwichOptions, SandwichStatus};
use mmac::regions::{
    trace_region, uniform_grid, DecoderKind, MacKind, RateRegionCurve, RegionQuery,
};
use mmac::solver::{SolveStatus, Tolerances};
use mmac::ChannelSpec;
use serde::Serialize;

use super::{mac_kind, simulate::identity_checks, Metadata};
use crate::output::{fmt_float, Csv};
use crate::{Outcome, RunOptions};

pub const HEADER: [&str; 4] = ["suite", "check", "detail", "status"];

/// Agreement required between curves that should coincide.
pub const CURVE_TOL: f64 = 1e-3;
const REGION_STEP: f64 = 0.05;
const EXPONENT_MARGIN: f64 = 0.02;
const EXPONENT_DENOMINATOR: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    GridEmpty,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::GridEmpty => "grid-empty",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub suite: &'static str,
    pub check: String,
    pub detail: String,
    pub status: Status,
}

struct Table {
    rows: Vec<CheckRow>,
}

impl Table {
    fn push(
        &mut self,
        suite: &'static str,
        check: impl Into<String>,
        detail: impl Into<String>,
        ok: bool,
    ) {
        self.rows.push(CheckRow {
            suite,
            check: check.into(),
            detail: detail.into(),
            status: Status::from_bool(ok),
        });
    }
}

fn sandwich(spec: &ChannelSpec, opts: &RunOptions, t: &mut Table) -> Result<()> {
    let task = &opts.config.validate;
    for &d in &task.denominators {
        let mut o = SandwichOptions::new(d, &task.r2, BracketConstant::PerFamily);
        o.solver = opts.solver;
        for c in sandwich_suite(spec, &o)? {
            let r2 = c.r2.map_or(String::new(), |r| format!(" r2={r}"));
            let grid = c.grid.map_or("empty".to_string(), fmt_float);
            t.rows.push(CheckRow {
                suite: "sandwich",
                check: format!("d={d} {}{r2}", c.program),
                detail: format!(
                    "solver {} grid {grid} eps {}",
                    fmt_float(c.solver),
                    fmt_float(c.epsilon)
                ),
                status: match c.status {
                    SandwichStatus::Pass => Status::Pass,
                    SandwichStatus::Fail => Status::Fail,
                    SandwichStatus::GridEmpty => Status::GridEmpty,
                },
            });
        }
    }
    Ok(())
}

fn curve(spec: &ChannelSpec, decoder: DecoderKind, solver: Tolerances) -> Result<RateRegionCurve> {
    let grid = uniform_grid((spec.alphabets().x2 as f64).ln(), REGION_STEP);
    Ok(trace_region(
        &RegionQuery::new(spec, mac_kind(spec), decoder, grid).with_tolerances(solver),
    )?)
}

fn max_gap(a: &RateRegionCurve, b: &RateRegionCurve) -> f64 {
    a.points
        .iter()
        .map(|p| (p.r1_max - b.r1_at(p.r2)).abs())
        .fold(0.0, f64::max)
}

fn regions(spec: &ChannelSpec, opts: &RunOptions, t: &mut Table) -> Result<Vec<RateRegionCurve>> {
    let nominal = Tolerances::default();
    let s = curve(spec, DecoderKind::Successive, opts.solver)?;
    let m = curve(spec, DecoderKind::MaxMetric, opts.solver)?;
    for c in [&s, &m] {
        let name = format!("{:?}", c.decoder_kind);
        let negative = c.points.iter().filter(|p| p.r1_max < 0.0).count();
        t.push(
            "region",
            format!("{name} nonnegative"),
            format!("{negative} negative points"),
            negative == 0,
        );
        let rises = c
            .points
            .windows(2)
            .filter(|w| w[1].r1_max > w[0].r1_max + 1e-6)
            .count();
        t.push(
            "region",
            format!("{name} nonincreasing"),
            format!("{rises} increases"),
            rises == 0,
        );
        let mut bad = 0;
        for cert in c.points.iter().flat_map(|p| &p.certificates) {
            let r = &cert.report;
            let ok = match r.status {
                SolveStatus::Converged => {
                    r.kkt_residual <= nominal.opt_tol && r.feasibility_residual <= nominal.feas_tol
                }
                SolveStatus::Infeasible => true,
                _ => false,
            };
            bad += usize::from(!ok);
        }
        t.push(
            "region",
            format!("{name} certificates"),
            format!("{bad} outside tolerance"),
            bad == 0,
        );
    }
    let gap0 = (s.points[0].r1_max - m.points[0].r1_max).abs();
    t.push(
        "region",
        "zero-rate agreement",
        format!("gap {}", fmt_float(gap0)),
        gap0 <= CURVE_TOL,
    );
    if spec.metric() == spec.channel() {
        let gap = max_gap(&s, &m).max(max_gap(&m, &s));
        t.push(
            "region",
            "matched collapse",
            format!("max gap {}", fmt_float(gap)),
            gap <= CURVE_TOL,
        );
    }
    let scaled: Vec<f64> = spec.metric().iter().map(|q| 2.5 * q.powf(1.7)).collect();
    let other = curve(
        &spec.with_metric(scaled)?,
        DecoderKind::MaxMetric,
        opts.solver,
    )?;
    let gap = max_gap(&m, &other);
    t.push(
        "region",
        "max-metric rescaling invariance",
        format!("max gap {}", fmt_float(gap)),
        gap <= CURVE_TOL,
    );
    Ok(vec![s, m])
}

fn simulation(spec: &ChannelSpec, opts: &RunOptions, t: &mut Table) -> Result<()> {
    let task = &opts.config.validate;
    let checks = identity_checks(spec, task.exact_n, 2, 2, opts.seed, task.codebooks)?;
    let genie = checks.iter().filter(|c| !c.genie_identity()).count();
    let half = checks.iter().filter(|c| !c.half_inequality()).count();
    let n = task.exact_n;
    t.push(
        "simulate",
        format!("genie identity n={n}"),
        format!("{genie} of {} codebooks violate", checks.len()),
        genie == 0,
    );
    t.push(
        "simulate",
        format!("ML half inequality n={n}"),
        format!("{half} of {} codebooks violate", checks.len()),
        half == 0,
    );
    Ok(())
}

fn exponents(
    spec: &ChannelSpec,
    opts: &RunOptions,
    successive: &RateRegionCurve,
    t: &mut Table,
) -> Result<()> {
    let kind = mac_kind(spec);
    let e1 = |r1: f64, r2: f64| -> Result<f64> {
        let mut q = ExponentQuery::new(spec, kind, r1, r2, EXPONENT_DENOMINATOR);
        q.tolerances = opts.solver;
        Ok(match kind {
            MacKind::Standard => exponent_type1_standard(&q)?.value,
            MacKind::Cognitive => exponent_type1_cognitive(&q)?.value,
        })
    };
    for r2 in [0.0, 0.1] {
        let boundary = successive.r1_at(r2);
        if boundary > 2.0 * EXPONENT_MARGIN {
            let inside = e1(boundary - EXPONENT_MARGIN, r2)?;
            t.push(
                "exponent",
                format!("positive inside r2={r2}"),
                format!("E = {}", fmt_float(inside)),
                inside > 0.0,
            );
        }
        let outside = e1(boundary + EXPONENT_MARGIN, r2)?;
        t.push(
            "exponent",
            format!("zero outside r2={r2}"),
            format!("E = {}", fmt_float(outside)),
            outside == 0.0,
        );
    }
    Ok(())
}

/// Runs every check and returns the table rows.
pub fn checks(opts: &RunOptions) -> Result<Vec<CheckRow>> {
    let spec = opts.config.channel_spec()?;
    let mut t = Table { rows: Vec::new() };
    sandwich(&spec, opts, &mut t)?;
    let curves = regions(&spec, opts, &mut t)?;
    simulation(&spec, opts, &mut t)?;
    exponents(&spec, opts, &curves[0], &mut t)?;
    Ok(t.rows)
}

pub fn run(opts: &RunOptions) -> Result<Outcome> {
    let spec = opts.config.channel_spec()?;
    let rows = checks(opts)?;
    let failures = rows.iter().filter(|r| r.status == Status::Fail).count();
    let width = rows.iter().map(|r| r.check.len()).max().unwrap_or(0);
    let mut summary = String::new();
    for r in &rows {
        summary.push_str(&format!(
            "{:<9} {:<width$}  {:<10}  {}\n",
            r.suite,
            r.check,
            r.status.as_str(),
            r.detail
        ));
    }
    summary.push_str(&format!("{} checks, {failures} failed", rows.len()));

    let mut files = Vec::new();
    if opts.out.is_some() {
        let out = opts.out_dir()?;
        let mut csv = Csv::new(&HEADER)?;
        for r in &rows {
            csv.row([
                r.suite,
                r.check.as_str(),
                r.detail.as_str(),
                r.status.as_str(),
            ])?;
        }
        let names = ["validate.csv", "metadata.json"];
        files.push(out.write(names[0], &csv.into_string()?)?);
        files.push(out.write_json(
            names[1],
            &Metadata::new("validate", opts, &spec, &names, &rows),
        )?);
    }
    Ok(Outcome {
        files,
        passed: failures == 0,
        summary,
    })
}
