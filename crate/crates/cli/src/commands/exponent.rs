use anyhow::{ensure, Result};
use mmac::exponents::{
    exponent_type1_cognitive, exponent_type1_standard, exponent_type2_standard, ExponentQuery,
};
use mmac::regions::MacKind;
use rayon::prelude::*;
use serde::Serialize;

use super::{mac_kind, Metadata};
use crate::output::{fmt_float, Csv};
use crate::{Outcome, RunOptions};

pub const HEADER: [&str; 5] = [
    "r1",
    "r2",
    "exponent_user1",
    "exponent_user2",
    "grid_denominator",
];

#[derive(Serialize)]
struct Details {
    outer_denominator: usize,
    refine: bool,
    user2_exponent: bool,
}

/// User-1 and (standard MAC only) user-2 exponents at one rate pair.
pub fn evaluate(opts: &RunOptions, r1: f64, r2: f64) -> Result<(f64, Option<f64>)> {
    let spec = opts.config.channel_spec()?;
    let task = &opts.config.exponent;
    let kind = mac_kind(&spec);
    let mut q =
        ExponentQuery::new(&spec, kind, r1, r2, task.outer_denominator).with_refine(task.refine);
    q.tolerances = opts.solver;
    Ok(match kind {
        MacKind::Standard => (
            exponent_type1_standard(&q)?.value,
            Some(exponent_type2_standard(&q)?.value),
        ),
        MacKind::Cognitive => (exponent_type1_cognitive(&q)?.value, None),
    })
}

pub fn run(opts: &RunOptions) -> Result<Outcome> {
    let spec = opts.config.channel_spec()?;
    let task = &opts.config.exponent;
    ensure!(
        task.outer_denominator > 0,
        "exponent.outer_denominator must be positive"
    );
    ensure!(
        task.r1
            .iter()
            .chain(&task.r2)
            .all(|r| r.is_finite() && *r >= 0.0),
        "exponent rates must be finite and nonnegative"
    );
    let out = opts.out_dir()?;
    let u = opts.units;
    let pairs: Vec<(f64, f64)> = task
        .r1
        .iter()
        .flat_map(|&a| task.r2.iter().map(move |&b| (a, b)))
        .collect();
    let values: Vec<(f64, Option<f64>)> = pairs
        .par_iter()
        .map(|&(r1, r2)| evaluate(opts, r1, r2))
        .collect::<Result<_>>()?;

    let mut csv = Csv::new(&HEADER)?;
    for (&(r1, r2), (e1, e2)) in pairs.iter().zip(&values) {
        csv.row([
            fmt_float(u.rate(r1)),
            fmt_float(u.rate(r2)),
            fmt_float(u.rate(*e1)),
            e2.map(|e| fmt_float(u.rate(e))).unwrap_or_default(),
            task.outer_denominator.to_string(),
        ])?;
    }
    let details = Details {
        outer_denominator: task.outer_denominator,
        refine: task.refine,
        user2_exponent: !spec.is_cognitive(),
    };
    let files = ["exponent.csv", "metadata.json"];
    let written = vec![
        out.write(files[0], &csv.into_string()?)?,
        out.write_json(
            files[1],
            &Metadata::new("exponent", opts, &spec, &files, details),
        )?,
    ];
    let positive = values.iter().filter(|v| v.0 > 0.0).count();
    Ok(Outcome {
        files: written,
        passed: true,
        summary: format!(
            "{} rate pairs, {positive} with a positive user-1 exponent",
            pairs.len()
        ),
    })
}
