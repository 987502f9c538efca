use anyhow::{ensure, Result};
use mmac::regions::{trace_region, uniform_grid, RateRegionCurve, RegionQuery};
use serde::Serialize;

use super::{mac_kind, Metadata};
use crate::output::{fmt_float, Csv};
use crate::{Outcome, RunOptions};

pub const HEADER: [&str; 4] = ["decoder", "r2", "r1_max", "binding"];

#[derive(Serialize)]
struct ConditionSummary {
    condition: String,
    value: f64,
    status: String,
    kkt_residual: f64,
    feasibility_residual: f64,
    newton_steps: usize,
}

#[derive(Serialize)]
struct PointSummary {
    r2: f64,
    r1_max: f64,
    binding: &'static str,
    conditions: Vec<ConditionSummary>,
}

#[derive(Serialize)]
struct CurveSummary {
    decoder: String,
    r2_max: f64,
    max_sum_rate: f64,
    points: Vec<PointSummary>,
}

#[derive(Serialize)]
struct Details {
    r2_step: f64,
    r2_upper: f64,
    convex_hull: bool,
}

fn decoder_name(c: &RateRegionCurve) -> String {
    serde_json::to_value(c.decoder_kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Traces every requested region boundary.
pub fn curves(opts: &RunOptions) -> Result<Vec<RateRegionCurve>> {
    let spec = opts.config.channel_spec()?;
    let task = &opts.config.region;
    ensure!(task.r2_step > 0.0, "region.r2_step must be positive");
    let upper = task.r2_max.unwrap_or((spec.alphabets().x2 as f64).ln());
    let grid = uniform_grid(upper, task.r2_step);
    task.decoders
        .iter()
        .map(|&d| {
            let q = RegionQuery::new(&spec, mac_kind(&spec), d, grid.clone())
                .with_convex_hull(task.convex_hull)
                .with_tolerances(opts.solver);
            Ok(trace_region(&q)?)
        })
        .collect()
}

pub fn run(opts: &RunOptions) -> Result<Outcome> {
    let spec = opts.config.channel_spec()?;
    let out = opts.out_dir()?;
    let u = opts.units;
    let curves = curves(opts)?;

    let mut csv = Csv::new(&HEADER)?;
    let mut report = Vec::new();
    for c in &curves {
        let name = decoder_name(c);
        let mut points = Vec::new();
        for p in &c.points {
            csv.row([
                name.clone(),
                fmt_float(u.rate(p.r2)),
                fmt_float(u.rate(p.r1_max)),
                p.binding.as_str().to_string(),
            ])?;
            points.push(PointSummary {
                r2: u.rate(p.r2),
                r1_max: u.rate(p.r1_max),
                binding: p.binding.as_str(),
                conditions: p
                    .certificates
                    .iter()
                    .map(|cert| ConditionSummary {
                        condition: cert.condition.clone(),
                        value: u.rate(cert.report.value),
                        status: format!("{:?}", cert.report.status),
                        kkt_residual: cert.report.kkt_residual,
                        feasibility_residual: cert.report.feasibility_residual,
                        newton_steps: cert.report.newton_steps,
                    })
                    .collect(),
            });
        }
        report.push(CurveSummary {
            decoder: name,
            r2_max: u.rate(c.r2_max),
            max_sum_rate: u.rate(c.max_sum_rate()),
            points,
        });
    }

    let task = &opts.config.region;
    let details = Details {
        r2_step: u.rate(task.r2_step),
        r2_upper: u.rate(task.r2_max.unwrap_or((spec.alphabets().x2 as f64).ln())),
        convex_hull: task.convex_hull,
    };
    let files = ["region.csv", "region_report.json", "metadata.json"];
    let mut written = vec![out.write(files[0], &csv.into_string()?)?];
    written.push(out.write_json(files[1], &report)?);
    written.push(out.write_json(
        files[2],
        &Metadata::new("region", opts, &spec, &files, details),
    )?);
    let summary = report
        .iter()
        .map(|c| {
            format!(
                "{}: R2 max {:.5}, max sum rate {:.5} {}",
                c.decoder,
                c.r2_max,
                c.max_sum_rate,
                u.name()
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome {
        files: written,
        passed: true,
        summary,
    })
}
