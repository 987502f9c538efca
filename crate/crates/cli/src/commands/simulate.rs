use anyhow::{bail, ensure, Result};
use mmac::simulator::{
    exact_error_profile, monte_carlo_error, sample_codebook, CodebookSource, ExactErrors,
};
use mmac::{ChannelSpec, MmacError};
use serde::Serialize;

use super::Metadata;
use crate::config::{CodebookKind, SimMode};
use crate::output::{fmt_float, Csv};
use crate::{Outcome, RunOptions};

pub const HEADER: [&str; 10] = [
    "n", "m1", "m2", "decoder", "method", "errors", "trials", "estimate", "ci_low", "ci_high",
];

pub const CHECK_HEADER: [&str; 8] = [
    "n",
    "codebook",
    "pr_ml",
    "pr_s",
    "pr_genie",
    "pr_s_matched",
    "genie_identity",
    "half_inequality",
];

/// Allowance for the exact identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Exact error probabilities of one codebook under the configured metric and
/// under the true channel as metric.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub n: usize,
    pub codebook: usize,
    pub mismatched: ExactErrors,
    pub matched: ExactErrors,
}

impl IdentityCheck {
    /// The genie-aided decoder errs exactly when the successive decoder does.
    pub fn genie_identity(&self) -> bool {
        (self.mismatched.genie - self.mismatched.successive).abs() <= IDENTITY_TOL
    }

    /// Maximum likelihood loses at most a factor two against successive
    /// decoding with the true channel as metric.
    pub fn half_inequality(&self) -> bool {
        self.matched.ml >= 0.5 * self.matched.successive - IDENTITY_TOL
    }
}

/// Exact identity checks on `count` codebooks drawn with seeds `seed, seed + 1, ...`.
pub fn identity_checks(
    spec: &ChannelSpec,
    n: usize,
    m1: usize,
    m2: usize,
    seed: u64,
    count: usize,
) -> Result<Vec<IdentityCheck>> {
    let matched = spec.matched()?;
    (0..count)
        .map(|k| {
            let cb = sample_codebook(spec, n, m1, m2, seed.wrapping_add(k as u64))?;
            Ok(IdentityCheck {
                n,
                codebook: k,
                mismatched: exact_error_profile(&cb, spec)?,
                matched: exact_error_profile(&cb, &matched)?,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct Details {
    mode: SimMode,
    codebook: CodebookKind,
    trials: u64,
    sizes: Vec<(usize, usize, usize)>,
}

fn estimates(opts: &RunOptions, spec: &ChannelSpec, csv: &mut Csv) -> Result<()> {
    let task = &opts.config.simulate;
    for &n in &task.n {
        let (m1, m2) = task.sizes(n);
        let fixed = match task.codebook {
            CodebookKind::Fixed => Some(sample_codebook(spec, n, m1, m2, opts.seed)?),
            CodebookKind::Ensemble => None,
        };
        let exact = match (task.mode, &fixed) {
            (SimMode::Exact, None) => bail!("exact mode needs a fixed codebook"),
            (SimMode::Exact, Some(cb)) => Some(exact_error_profile(cb, spec)?),
            (SimMode::Auto, Some(cb)) => match exact_error_profile(cb, spec) {
                Ok(e) => Some(e),
                Err(MmacError::BudgetExceeded { .. }) => None,
                Err(e) => return Err(e.into()),
            },
            _ => None,
        };
        for &d in &task.decoders {
            let prefix = [
                n.to_string(),
                m1.to_string(),
                m2.to_string(),
                d.as_str().to_string(),
            ];
            match &exact {
                Some(e) => {
                    let p = fmt_float(e.get(d));
                    csv.row(prefix.into_iter().chain([
                        "exact".into(),
                        String::new(),
                        String::new(),
                        p.clone(),
                        p.clone(),
                        p,
                    ]))?;
                }
                None => {
                    let source = match &fixed {
                        Some(cb) => CodebookSource::Fixed(cb),
                        None => CodebookSource::Ensemble { n, m1, m2 },
                    };
                    let mc = monte_carlo_error(source, spec, d, task.trials, opts.seed)?;
                    csv.row(prefix.into_iter().chain([
                        "monte_carlo".into(),
                        mc.errors.to_string(),
                        mc.trials.to_string(),
                        fmt_float(mc.estimate),
                        fmt_float(mc.interval.0),
                        fmt_float(mc.interval.1),
                    ]))?;
                }
            }
        }
    }
    Ok(())
}

pub fn run(opts: &RunOptions) -> Result<Outcome> {
    let spec = opts.config.channel_spec()?;
    let task = &opts.config.simulate;
    ensure!(
        !task.n.is_empty() && task.n.iter().all(|&n| n > 0),
        "simulate.n needs positive blocklengths"
    );
    ensure!(task.trials > 0, "simulate.trials must be positive");
    let out = opts.out_dir()?;
    let details = Details {
        mode: task.mode,
        codebook: task.codebook,
        trials: task.trials,
        sizes: task
            .n
            .iter()
            .map(|&n| (n, task.sizes(n).0, task.sizes(n).1))
            .collect(),
    };

    if task.mode == SimMode::Check {
        let mut csv = Csv::new(&CHECK_HEADER)?;
        let mut violations = 0;
        for &n in &task.n {
            let (m1, m2) = task.sizes(n);
            for c in identity_checks(&spec, n, m1, m2, opts.seed, task.codebooks)? {
                violations += usize::from(!c.genie_identity()) + usize::from(!c.half_inequality());
                csv.row([
                    n.to_string(),
                    c.codebook.to_string(),
                    fmt_float(c.mismatched.ml),
                    fmt_float(c.mismatched.successive),
                    fmt_float(c.mismatched.genie),
                    fmt_float(c.matched.successive),
                    c.genie_identity().to_string(),
                    c.half_inequality().to_string(),
                ])?;
            }
        }
        let files = ["simulate_check.csv", "metadata.json"];
        let written = vec![
            out.write(files[0], &csv.into_string()?)?,
            out.write_json(
                files[1],
                &Metadata::new("simulate", opts, &spec, &files, details),
            )?,
        ];
        return Ok(Outcome {
            files: written,
            passed: violations == 0,
            summary: format!("{violations} identity violations"),
        });
    }

    let mut csv = Csv::new(&HEADER)?;
    estimates(opts, &spec, &mut csv)?;
    let files = ["simulate.csv", "metadata.json"];
    let written = vec![
        out.write(files[0], &csv.into_string()?)?,
        out.write_json(
            files[1],
            &Metadata::new("simulate", opts, &spec, &files, details),
        )?,
    ];
    Ok(Outcome {
        files: written,
        passed: true,
        summary: format!(
            "{} blocklengths, {} decoders",
            task.n.len(),
            task.decoders.len()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ml_column_ignores_the_metric() {
        let spec = ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, false).unwrap();
        let checks = identity_checks(&spec, 3, 2, 2, 9, 3).unwrap();
        for c in &checks {
            assert!((c.mismatched.ml - c.matched.ml).abs() < 1e-15);
            assert!(c.genie_identity() && c.half_inequality());
        }
    }
}
