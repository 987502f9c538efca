use serde::{Deserialize, Serialize};

use super::Codebook;
use crate::error::{MmacError, Result};
use crate::prob::ChannelSpec;

/// Relative slack under which two log-scores count as tied.
const TIE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimDecoder {
    Successive,
    MaxMetric,
    /// Successive decoding whose second step uses the true user-1 message.
    Genie,
    /// Maximum-metric decoding with the channel itself as the metric.
    Ml,
}

impl SimDecoder {
    pub const ALL: [SimDecoder; 4] = [Self::Successive, Self::MaxMetric, Self::Genie, Self::Ml];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Successive => "successive",
            Self::MaxMetric => "max-metric",
            Self::Genie => "genie",
            Self::Ml => "ml",
        }
    }
}

/// Decoded messages; `None` marks a tie, which counts as an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub m1_hat: Option<usize>,
    pub m2_hat: Option<usize>,
    /// Log-domain scores of the first decision: per user-1 message for the
    /// successive decoders, per pair `i * m2 + j` for maximum-metric ones.
    pub scores: Vec<f64>,
}

impl DecodeOutcome {
    pub fn is_correct(&self, m1: usize, m2: usize) -> bool {
        self.m1_hat == Some(m1) && self.m2_hat == Some(m2)
    }
}

/// `log q^n` for every message pair, row-major in `(i, j)`.
pub(crate) fn pair_scores(
    codebook: &Codebook,
    y: &[usize],
    log_q: &[f64],
    spec: &ChannelSpec,
) -> Vec<f64> {
    let a = spec.alphabets();
    let (m1, m2) = (codebook.m1(), codebook.m2());
    let mut out = Vec::with_capacity(m1 * m2);
    for i in 0..m1 {
        let x1 = &codebook.user1[i];
        for j in 0..m2 {
            let x2 = codebook.codeword2(i, j);
            let s: f64 = (0..y.len())
                .map(|t| log_q[a.index(x1[t], x2[t], y[t])])
                .sum();
            out.push(s);
        }
    }
    out
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Index of the strict maximum, or `None` on a tie.
pub(crate) fn unique_argmax(v: &[f64]) -> Option<usize> {
    let (best, &top) = v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let slack = if top.is_finite() {
        TIE_SLACK * top.abs().max(1.0)
    } else {
        0.0
    };
    let tied = v.iter().filter(|&&s| s >= top - slack).count();
    (tied == 1).then_some(best)
}

/// First step of successive decoding: per-message log-sum-exp scores and the winner.
pub(crate) fn successive_step1(scores: &[f64], m2: usize) -> (Vec<f64>, Option<usize>) {
    let lse: Vec<f64> = scores.chunks(m2).map(log_sum_exp).collect();
    let m1_hat = unique_argmax(&lse);
    (lse, m1_hat)
}

pub(crate) fn step2(scores: &[f64], m2: usize, i: usize) -> Option<usize> {
    unique_argmax(&scores[i * m2..(i + 1) * m2])
}

pub(crate) fn max_metric(scores: &[f64], m2: usize) -> (Option<usize>, Option<usize>) {
    match unique_argmax(scores) {
        Some(k) => (Some(k / m2), Some(k % m2)),
        None => (None, None),
    }
}

fn check_output(codebook: &Codebook, y: &[usize], spec: &ChannelSpec) -> Result<()> {
    codebook.check_alphabets(spec)?;
    if y.len() != codebook.n || y.iter().any(|&s| s >= spec.alphabets().y) {
        return Err(MmacError::InvalidConfig(
            "output sequence does not match the codebook".into(),
        ));
    }
    Ok(())
}

pub fn decode_successive(
    codebook: &Codebook,
    y: &[usize],
    spec: &ChannelSpec,
) -> Result<DecodeOutcome> {
    check_output(codebook, y, spec)?;
    let s = pair_scores(codebook, y, spec.log_metric(), spec);
    let (lse, m1_hat) = successive_step1(&s, codebook.m2());
    Ok(DecodeOutcome {
        m1_hat,
        m2_hat: m1_hat.and_then(|i| step2(&s, codebook.m2(), i)),
        scores: lse,
    })
}

pub fn decode_genie(
    codebook: &Codebook,
    y: &[usize],
    true_m1: usize,
    spec: &ChannelSpec,
) -> Result<DecodeOutcome> {
    check_output(codebook, y, spec)?;
    if true_m1 >= codebook.m1() {
        return Err(MmacError::InvalidConfig(format!(
            "message {true_m1} out of range"
        )));
    }
    let s = pair_scores(codebook, y, spec.log_metric(), spec);
    let (lse, m1_hat) = successive_step1(&s, codebook.m2());
    Ok(DecodeOutcome {
        m1_hat,
        m2_hat: step2(&s, codebook.m2(), true_m1),
        scores: lse,
    })
}

pub fn decode_maxmetric(
    codebook: &Codebook,
    y: &[usize],
    spec: &ChannelSpec,
) -> Result<DecodeOutcome> {
    check_output(codebook, y, spec)?;
    let s = pair_scores(codebook, y, spec.log_metric(), spec);
    let (m1_hat, m2_hat) = max_metric(&s, codebook.m2());
    Ok(DecodeOutcome {
        m1_hat,
        m2_hat,
        scores: s,
    })
}

/// Runs `decoder`; `true_m1` is only read by the genie decoder.
pub fn decode(
    decoder: SimDecoder,
    codebook: &Codebook,
    y: &[usize],
    true_m1: usize,
    spec: &ChannelSpec,
) -> Result<DecodeOutcome> {
    match decoder {
        SimDecoder::Successive => decode_successive(codebook, y, spec),
        SimDecoder::MaxMetric => decode_maxmetric(codebook, y, spec),
        SimDecoder::Genie => decode_genie(codebook, y, true_m1, spec),
        SimDecoder::Ml => decode_maxmetric(codebook, y, &spec.matched()?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{Alphabets, InputDistribution};

    fn spec_with_metric(q: Vec<f64>) -> ChannelSpec {
        ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, false)
            .unwrap()
            .with_metric(q)
            .unwrap()
    }

    fn noiseless() -> ChannelSpec {
        let a = Alphabets::new(2, 2, 4).unwrap();
        let mut w = vec![0.0; 16];
        for x1 in 0..2 {
            for x2 in 0..2 {
                w[a.index(x1, x2, 2 * x1 + x2)] = 1.0;
            }
        }
        let inputs = InputDistribution::Independent {
            q1: vec![0.5, 0.5],
            q2: vec![0.5, 0.5],
        };
        ChannelSpec::new(a, w.clone(), w, inputs).unwrap()
    }

    #[test]
    fn single_message_never_errs() {
        let spec = spec_with_metric(vec![0.5; 12]);
        let cb = Codebook::standard(vec![vec![0, 1]], vec![vec![1, 0]]).unwrap();
        let out = decode_successive(&cb, &[2, 0], &spec).unwrap();
        assert!(out.is_correct(0, 0));
        assert!(decode_maxmetric(&cb, &[2, 0], &spec)
            .unwrap()
            .is_correct(0, 0));
    }

    #[test]
    fn noiseless_channel_recovers_every_pair() {
        let spec = noiseless();
        let user1 = vec![vec![0, 1, 1, 0], vec![1, 0, 0, 1]];
        let user2 = vec![vec![0, 0, 1, 1], vec![1, 1, 0, 0], vec![0, 1, 0, 1]];
        let cb = Codebook::standard(user1.clone(), user2.clone()).unwrap();
        let a = spec.alphabets();
        for i in 0..2 {
            for j in 0..3 {
                let y: Vec<usize> = (0..4).map(|t| 2 * user1[i][t] + user2[j][t]).collect();
                for d in SimDecoder::ALL {
                    assert!(
                        decode(d, &cb, &y, i, &spec).unwrap().is_correct(i, j),
                        "{d:?}"
                    );
                }
                assert!(y.iter().all(|&s| s < a.y));
            }
        }
    }

    fn hand_metric() -> Vec<f64> {
        [
            2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0,
        ]
        .iter()
        .map(|p| p.sqrt() / 10.0)
        .collect()
    }

    #[test]
    fn successive_matches_a_naive_double_loop() {
        let q = hand_metric();
        let spec = spec_with_metric(q.clone());
        let a = spec.alphabets();
        let user1 = vec![vec![0, 1], vec![1, 1]];
        let user2 = vec![vec![1, 0], vec![0, 0]];
        let cb = Codebook::standard(user1.clone(), user2.clone()).unwrap();
        for y0 in 0..3 {
            for y1 in 0..3 {
                let y = [y0, y1];
                let qn = |i: usize, j: usize| -> f64 {
                    (0..2)
                        .map(|t| q[a.index(user1[i][t], user2[j][t], y[t])])
                        .product()
                };
                let sums: Vec<f64> = (0..2).map(|i| qn(i, 0) + qn(i, 1)).collect();
                let out = decode_successive(&cb, &y, &spec).unwrap();
                for i in 0..2 {
                    assert!((out.scores[i].exp() - sums[i]).abs() <= 1e-9 * sums[i]);
                }
                let expect_i = if sums[0] > sums[1] { 0 } else { 1 };
                assert_eq!(out.m1_hat, Some(expect_i));
                let expect_j = if qn(expect_i, 0) > qn(expect_i, 1) {
                    0
                } else {
                    1
                };
                assert_eq!(out.m2_hat, Some(expect_j));
            }
        }
    }

    #[test]
    fn maxmetric_matches_a_naive_double_loop() {
        let q = hand_metric();
        let spec = spec_with_metric(q.clone());
        let a = spec.alphabets();
        let user1 = vec![vec![0, 1], vec![1, 0]];
        let user2 = vec![vec![1, 0], vec![0, 1]];
        let cb = Codebook::standard(user1.clone(), user2.clone()).unwrap();
        for y0 in 0..3 {
            for y1 in 0..3 {
                let y = [y0, y1];
                let mut values = Vec::new();
                for i in 0..2 {
                    for j in 0..2 {
                        let v: f64 = (0..2)
                            .map(|t| q[a.index(user1[i][t], user2[j][t], y[t])])
                            .product();
                        values.push((v, i, j));
                    }
                }
                let best =
                    values
                        .iter()
                        .copied()
                        .fold((f64::MIN, 0, 0), |b, v| if v.0 > b.0 { v } else { b });
                let tied = values
                    .iter()
                    .filter(|v| (v.0 - best.0).abs() <= 1e-12 * best.0)
                    .count()
                    > 1;
                let expect = if tied {
                    (None, None)
                } else {
                    (Some(best.1), Some(best.2))
                };
                let out = decode_maxmetric(&cb, &y, &spec).unwrap();
                assert_eq!((out.m1_hat, out.m2_hat), expect);
            }
        }
    }

    #[test]
    fn identical_codewords_tie() {
        let spec = spec_with_metric(hand_metric());
        let cb = Codebook::standard(vec![vec![0, 1], vec![0, 1]], vec![vec![1, 0]]).unwrap();
        let out = decode_successive(&cb, &[1, 1], &spec).unwrap();
        assert_eq!((out.m1_hat, out.m2_hat), (None, None));
        let out = decode_maxmetric(&cb, &[1, 1], &spec).unwrap();
        assert_eq!(out.m1_hat, None);
    }

    #[test]
    fn genie_agrees_when_step_one_is_right() {
        let spec = spec_with_metric(hand_metric());
        let cb = super::super::sample_codebook(&spec, 5, 3, 3, 4).unwrap();
        for code in 0..243usize {
            let y: Vec<usize> = (0..5).map(|t| code / 3usize.pow(t as u32) % 3).collect();
            let s = decode_successive(&cb, &y, &spec).unwrap();
            if let Some(i) = s.m1_hat {
                assert_eq!(decode_genie(&cb, &y, i, &spec).unwrap(), s);
            }
        }
    }

    #[test]
    fn log_sum_exp_drops_zero_metric_terms() {
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 0.0]), 0.0);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 2]), f64::NEG_INFINITY);
        assert_eq!(unique_argmax(&[f64::NEG_INFINITY; 2]), None);
    }
}
