use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Codebook;
use crate::error::{MmacError, Result};
use crate::prob::{log_multinomial, Alphabets, Axes, JointType};
use crate::regions::MacKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumeratorSample {
    pub joint_type: JointType,
    pub count: u64,
}

fn joint_counts(a: Alphabets, x1: &[usize], x2: &[usize], y: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; a.cells()];
    for t in 0..y.len() {
        counts[a.index(x1[t], x2[t], y[t])] += 1;
    }
    counts
}

/// Counts of competing user-2 codewords per joint type with `(x1bar, y)`.
///
/// Standard MAC: codewords `j >= 1` (message 0 is the transmitted one).
/// Cognitive MAC: all satellites of cloud 0.
pub fn type_enumerator_profile(
    codebook: &Codebook,
    x1bar: &[usize],
    y: &[usize],
    a: Alphabets,
) -> Result<Vec<EnumeratorSample>> {
    let n = codebook.n;
    if x1bar.len() != n || y.len() != n {
        return Err(MmacError::InvalidConfig(
            "sequences must have the codebook length".into(),
        ));
    }
    if x1bar.iter().any(|&s| s >= a.x1)
        || y.iter().any(|&s| s >= a.y)
        || codebook.user2.iter().flatten().any(|&s| s >= a.x2)
    {
        return Err(MmacError::InvalidConfig(
            "symbol outside the alphabets".into(),
        ));
    }
    let competitors: Box<dyn Iterator<Item = &[usize]>> = match codebook.mac_kind {
        MacKind::Standard => Box::new(codebook.user2.iter().skip(1).map(Vec::as_slice)),
        MacKind::Cognitive => Box::new((0..codebook.m2()).map(|j| codebook.codeword2(0, j))),
    };
    let mut tally: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for x2 in competitors {
        *tally.entry(joint_counts(a, x1bar, x2, y)).or_default() += 1;
    }
    tally
        .into_iter()
        .map(|(counts, count)| {
            Ok(EnumeratorSample {
                joint_type: JointType::new(a, counts)?,
                count,
            })
        })
        .collect()
}

/// Exact probability that a codeword drawn uniformly from the sampler's
/// (conditional) type class has joint type `target` with `(x1bar, y)`.
pub fn type_probability(
    codebook: &Codebook,
    x1bar: &[usize],
    y: &[usize],
    target: &JointType,
) -> Result<f64> {
    let a = target.alphabets;
    if target.n != codebook.n || x1bar.len() != codebook.n || y.len() != codebook.n {
        return Err(MmacError::InvalidConfig(
            "lengths disagree with the codebook".into(),
        ));
    }
    let mut x1y = vec![0; a.x1 * a.y];
    for t in 0..y.len() {
        x1y[x1bar[t] * a.y + y[t]] += 1;
    }
    if target.marginal_counts(Axes::X1Y) != x1y {
        return Ok(0.0);
    }
    let log_class = match (codebook.mac_kind, codebook.compositions.as_slice()) {
        (MacKind::Standard, [_, c2]) => {
            if target.marginal_counts(Axes::X2) != c2.counts {
                return Ok(0.0);
            }
            log_multinomial(&c2.counts)
        }
        (MacKind::Cognitive, [c12]) => {
            if target.marginal_counts(Axes::X1X2) != c12.counts {
                return Ok(0.0);
            }
            c12.counts.chunks(a.x2).map(log_multinomial).sum()
        }
        _ => {
            return Err(MmacError::InvalidConfig(
                "type probabilities need a codebook drawn by the sampler".into(),
            ))
        }
    };
    let log_hits: f64 = (0..a.x1)
        .flat_map(|u| (0..a.y).map(move |b| (u, b)))
        .map(|(u, b)| {
            let column: Vec<usize> = (0..a.x2).map(|v| target.counts[a.index(u, v, b)]).collect();
            log_multinomial(&column)
        })
        .sum();
    Ok((log_hits - log_class).exp())
}

#[cfg(test)]
mod tests {
    use super::super::sample_codebook;
    use super::*;
    use crate::prob::ChannelSpec;

    fn fig1() -> ChannelSpec {
        ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, false).unwrap()
    }

    #[test]
    fn single_codeword_has_no_competitors() {
        let cb = sample_codebook(&fig1(), 4, 1, 1, 0).unwrap();
        assert!(
            type_enumerator_profile(&cb, &cb.user1[0], &[0, 1, 2, 1], fig1().alphabets())
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn identical_competitors_share_one_type() {
        let word = vec![0, 1, 1, 0];
        let cb = Codebook::standard(vec![vec![1, 1, 0, 0]], vec![word.clone(); 5]).unwrap();
        let prof =
            type_enumerator_profile(&cb, &cb.user1[0], &[2, 1, 1, 0], fig1().alphabets()).unwrap();
        assert_eq!(prof.len(), 1);
        assert_eq!(prof[0].count, 4);
    }

    #[test]
    fn type_probabilities_sum_to_one() {
        let spec = fig1();
        let a = spec.alphabets();
        let cb = sample_codebook(&spec, 6, 1, 1, 2).unwrap();
        let x1 = cb.user1[0].clone();
        let y = vec![0, 1, 2, 1, 1, 0];
        let mut total = 0.0;
        let mut seen = std::collections::HashSet::new();
        for bits in 0..64usize {
            let x2: Vec<usize> = (0..6).map(|t| bits >> t & 1).collect();
            if x2.iter().sum::<usize>() != 3 {
                continue;
            }
            let t = JointType::new(a, joint_counts(a, &x1, &x2, &y)).unwrap();
            if seen.insert(t.counts.clone()) {
                total += type_probability(&cb, &x1, &y, &t).unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn cognitive_type_probabilities_sum_to_one() {
        let spec = ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, true).unwrap();
        let a = spec.alphabets();
        let cb = sample_codebook(&spec, 8, 1, 3, 5).unwrap();
        let x1 = cb.user1[0].clone();
        let y = vec![0, 1, 2, 1, 1, 0, 2, 2];
        let mut total = 0.0;
        let mut seen = std::collections::HashSet::new();
        for bits in 0..256usize {
            let x2: Vec<usize> = (0..8).map(|t| bits >> t & 1).collect();
            let t = JointType::new(a, joint_counts(a, &x1, &x2, &y)).unwrap();
            if t.marginal_counts(Axes::X1X2) == cb.compositions[0].counts
                && seen.insert(t.counts.clone())
            {
                total += type_probability(&cb, &x1, &y, &t).unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-12, "{total}");
        let prof = type_enumerator_profile(&cb, &x1, &y, a).unwrap();
        assert_eq!(prof.iter().map(|s| s.count).sum::<u64>(), 3);
    }
}
