use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decode::{max_metric, pair_scores, step2, successive_step1, SimDecoder};
use super::{channel_output, decode, sample_with, Codebook};
use crate::error::{MmacError, Result};
use crate::prob::ChannelSpec;

/// Largest output space `|Y|^n` that exact enumeration will visit.
pub const OUTPUT_BUDGET: u128 = 10_000_000;

const CHUNK: usize = 4096;
const Z95: f64 = 1.959_963_984_540_054;

/// Exact error probabilities of all four decoders on one codebook.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactErrors {
    pub successive: f64,
    pub max_metric: f64,
    pub genie: f64,
    pub ml: f64,
}

impl ExactErrors {
    pub fn get(&self, decoder: SimDecoder) -> f64 {
        match decoder {
            SimDecoder::Successive => self.successive,
            SimDecoder::MaxMetric => self.max_metric,
            SimDecoder::Genie => self.genie,
            SimDecoder::Ml => self.ml,
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            successive: self.successive + o.successive,
            max_metric: self.max_metric + o.max_metric,
            genie: self.genie + o.genie,
            ml: self.ml + o.ml,
        }
    }

    const ZERO: Self = Self {
        successive: 0.0,
        max_metric: 0.0,
        genie: 0.0,
        ml: 0.0,
    };
}

fn output_count(y: usize, n: usize) -> Result<usize> {
    let total = (y as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > OUTPUT_BUDGET {
        return Err(MmacError::BudgetExceeded {
            needed: total,
            budget: OUTPUT_BUDGET,
        });
    }
    Ok(total as usize)
}

/// Error mass `sum_{pairs} W^n(y | pair) 1{decision != pair}` for one `y`.
fn errors_at(codebook: &Codebook, y: &[usize], spec: &ChannelSpec, log_w: &[f64]) -> ExactErrors {
    let m2 = codebook.m2();
    let sq = pair_scores(codebook, y, spec.log_metric(), spec);
    let sw = pair_scores(codebook, y, log_w, spec);
    let lik: Vec<f64> = sw.iter().map(|s| s.exp()).collect();
    let total: f64 = lik.iter().sum();
    let miss = |pair: (Option<usize>, Option<usize>)| match pair {
        (Some(i), Some(j)) => total - lik[i * m2 + j],
        _ => total,
    };

    let (_, m1_hat) = successive_step1(&sq, m2);
    let successive = miss((m1_hat, m1_hat.and_then(|i| step2(&sq, m2, i))));
    let mut genie = 0.0;
    for (i, row) in lik.chunks(m2).enumerate() {
        let row_total: f64 = row.iter().sum();
        genie += match (m1_hat == Some(i), step2(&sq, m2, i)) {
            (true, Some(j)) => row_total - row[j],
            _ => row_total,
        };
    }
    ExactErrors {
        successive,
        max_metric: miss(max_metric(&sq, m2)),
        genie,
        ml: miss(max_metric(&sw, m2)),
    }
}

fn decode_index(mut code: usize, ny: usize, y: &mut [usize]) {
    for s in y.iter_mut() {
        *s = code % ny;
        code /= ny;
    }
}

/// Exact error probabilities of the successive, maximum-metric, genie and
/// ML decoders, averaged over equiprobable messages and all outputs.
pub fn exact_error_profile(codebook: &Codebook, spec: &ChannelSpec) -> Result<ExactErrors> {
    codebook.check_alphabets(spec)?;
    let ny = spec.alphabets().y;
    let n = codebook.n;
    let outputs = output_count(ny, n)?;
    let log_w: Vec<f64> = spec.channel().iter().map(|w| w.ln()).collect();
    let chunks: Vec<ExactErrors> = (0..outputs.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut y = vec![0; n];
            let mut acc = ExactErrors::ZERO;
            for code in c * CHUNK..((c + 1) * CHUNK).min(outputs) {
                decode_index(code, ny, &mut y);
                acc = acc.add(errors_at(codebook, &y, spec, &log_w));
            }
            acc
        })
        .collect();
    let pairs = (codebook.m1() * codebook.m2()) as f64;
    let sum = chunks.into_iter().fold(ExactErrors::ZERO, ExactErrors::add);
    let norm = |v: f64| (v / pairs).clamp(0.0, 1.0);
    Ok(ExactErrors {
        successive: norm(sum.successive),
        max_metric: norm(sum.max_metric),
        genie: norm(sum.genie),
        ml: norm(sum.ml),
    })
}

pub fn exact_error_probability(
    codebook: &Codebook,
    spec: &ChannelSpec,
    decoder: SimDecoder,
) -> Result<f64> {
    Ok(exact_error_profile(codebook, spec)?.get(decoder))
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy)]
pub enum CodebookSource<'a> {
    Fixed(&'a Codebook),
    /// Redraw a codebook of the given size every trial.
    Ensemble {
        n: usize,
        m1: usize,
        m2: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub errors: u64,
    pub trials: u64,
    pub estimate: f64,
    pub interval: (f64, f64),
}

/// Monte-Carlo error probability. Trial `t` draws from its own ChaCha stream
/// seeded by `(seed, t)`, so results do not depend on scheduling.
pub fn monte_carlo_error(
    source: CodebookSource<'_>,
    spec: &ChannelSpec,
    decoder: SimDecoder,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(MmacError::InvalidConfig(
            "at least one trial is needed".into(),
        ));
    }
    if let CodebookSource::Fixed(cb) = source {
        cb.check_alphabets(spec)?;
    }
    let decode_spec = match decoder {
        SimDecoder::Ml => spec.matched()?,
        _ => spec.clone(),
    };
    let decoder = match decoder {
        SimDecoder::Ml => SimDecoder::MaxMetric,
        d => d,
    };
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let sampled;
            let cb = match source {
                CodebookSource::Fixed(cb) => cb,
                CodebookSource::Ensemble { n, m1, m2 } => {
                    sampled = sample_with(spec, n, m1, m2, &mut rng)?;
                    &sampled
                }
            };
            let i = rng.gen_range(0..cb.m1());
            let j = rng.gen_range(0..cb.m2());
            let y = channel_output(spec, &cb.user1[i], cb.codeword2(i, j), &mut rng);
            let out = decode(decoder, cb, &y, i, &decode_spec)?;
            Ok(u64::from(!out.is_correct(i, j)))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(McEstimate {
        errors,
        trials,
        estimate: errors as f64 / trials as f64,
        interval: wilson_interval(errors, trials),
    })
}
