//! Random constant-composition codebooks, the four decoders, and exact or
//! Monte-Carlo error probabilities at small blocklength.

mod decode;
mod enumerator;
mod error_prob;

pub use decode::{
    decode, decode_genie, decode_maxmetric, decode_successive, DecodeOutcome, SimDecoder,
};
pub use enumerator::{type_enumerator_profile, type_probability, EnumeratorSample};
pub use error_prob::{
    exact_error_probability, exact_error_profile, monte_carlo_error, wilson_interval,
    CodebookSource, ExactErrors, McEstimate, OUTPUT_BUDGET,
};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MmacError, Result};
use crate::prob::{closest_type, ChannelSpec, Composition};
use crate::regions::MacKind;

/// Codewords of both users. Symbols are alphabet indices.
///
/// For the cognitive MAC, `user2[i * m2 + j]` is satellite `j` of cloud
/// center `user1[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub mac_kind: MacKind,
    pub n: usize,
    pub user1: Vec<Vec<usize>>,
    pub user2: Vec<Vec<usize>>,
    m2: usize,
    /// Compositions used by the sampler: `[Q1n, Q2n]` (standard) or
    /// `[Q12n]` over `X1 x X2` (cognitive). Empty for hand-built codebooks.
    pub compositions: Vec<Composition>,
}

impl Codebook {
    pub fn standard(user1: Vec<Vec<usize>>, user2: Vec<Vec<usize>>) -> Result<Self> {
        let m2 = user2.len();
        Self::build(MacKind::Standard, user1, user2, m2)
    }

    /// `satellites[i][j]` is codeword `j` of cloud `i`.
    pub fn cognitive(centers: Vec<Vec<usize>>, satellites: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if satellites.len() != centers.len() {
            return Err(MmacError::InvalidConfig(
                "one satellite list per cloud center".into(),
            ));
        }
        let m2 = satellites.first().map_or(0, Vec::len);
        if satellites.iter().any(|s| s.len() != m2) {
            return Err(MmacError::InvalidConfig(
                "every cloud needs the same number of satellites".into(),
            ));
        }
        Self::build(
            MacKind::Cognitive,
            centers,
            satellites.into_iter().flatten().collect(),
            m2,
        )
    }

    fn build(
        mac_kind: MacKind,
        user1: Vec<Vec<usize>>,
        user2: Vec<Vec<usize>>,
        m2: usize,
    ) -> Result<Self> {
        if user1.is_empty() || m2 == 0 {
            return Err(MmacError::InvalidConfig(
                "codebooks need at least one codeword".into(),
            ));
        }
        let n = user1[0].len();
        if n == 0 || user1.iter().chain(&user2).any(|c| c.len() != n) {
            return Err(MmacError::InvalidConfig(
                "codewords must share a positive length".into(),
            ));
        }
        Ok(Self {
            mac_kind,
            n,
            user1,
            user2,
            m2,
            compositions: Vec::new(),
        })
    }

    pub fn m1(&self) -> usize {
        self.user1.len()
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    /// User-2 codeword for message pair `(i, j)`.
    pub fn codeword2(&self, i: usize, j: usize) -> &[usize] {
        match self.mac_kind {
            MacKind::Standard => &self.user2[j],
            MacKind::Cognitive => &self.user2[i * self.m2 + j],
        }
    }

    fn check_alphabets(&self, spec: &ChannelSpec) -> Result<()> {
        let a = spec.alphabets();
        if self.user1.iter().flatten().any(|&s| s >= a.x1)
            || self.user2.iter().flatten().any(|&s| s >= a.x2)
        {
            return Err(MmacError::InvalidConfig(
                "codeword symbol outside the input alphabet".into(),
            ));
        }
        if (self.mac_kind == MacKind::Cognitive) != spec.is_cognitive() {
            return Err(MmacError::InvalidConfig(
                "codebook and channel disagree on the MAC kind".into(),
            ));
        }
        Ok(())
    }
}

fn shuffled(counts: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut word: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(s, &k)| std::iter::repeat_n(s, k))
        .collect();
    word.shuffle(rng);
    word
}

pub(crate) fn sample_with(
    spec: &ChannelSpec,
    n: usize,
    m1: usize,
    m2: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Codebook> {
    if m1 == 0 || m2 == 0 || n == 0 {
        return Err(MmacError::InvalidConfig(
            "n, m1 and m2 must be positive".into(),
        ));
    }
    let a = spec.alphabets();
    if spec.is_cognitive() {
        let c12 = closest_type(&spec.input_joint(), n)?;
        let row = |x1: usize| &c12.counts[x1 * a.x2..(x1 + 1) * a.x2];
        let c1: Vec<usize> = (0..a.x1).map(|x1| row(x1).iter().sum()).collect();
        let mut centers = Vec::with_capacity(m1);
        let mut satellites = Vec::with_capacity(m1 * m2);
        for _ in 0..m1 {
            let center = shuffled(&c1, rng);
            for _ in 0..m2 {
                let mut sat = vec![0; n];
                for x1 in 0..a.x1 {
                    let filler = shuffled(row(x1), rng);
                    let positions = center
                        .iter()
                        .enumerate()
                        .filter(|&(_, &s)| s == x1)
                        .map(|(t, _)| t);
                    for (t, s) in positions.zip(filler) {
                        sat[t] = s;
                    }
                }
                satellites.push(sat);
            }
            centers.push(center);
        }
        Ok(Codebook {
            mac_kind: MacKind::Cognitive,
            n,
            user1: centers,
            user2: satellites,
            m2,
            compositions: vec![c12],
        })
    } else {
        let c1 = closest_type(&spec.q1(), n)?;
        let c2 = closest_type(&spec.q2(), n)?;
        let user1 = (0..m1).map(|_| shuffled(&c1.counts, rng)).collect();
        let user2 = (0..m2).map(|_| shuffled(&c2.counts, rng)).collect();
        Ok(Codebook {
            mac_kind: MacKind::Standard,
            n,
            user1,
            user2,
            m2,
            compositions: vec![c1, c2],
        })
    }
}

/// Draws a codebook from the constant-composition ensemble of `spec`
/// (superposition ensemble when `spec` has a joint input).
pub fn sample_codebook(
    spec: &ChannelSpec,
    n: usize,
    m1: usize,
    m2: usize,
    seed: u64,
) -> Result<Codebook> {
    sample_with(spec, n, m1, m2, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Samples `y` from `W^n(. | x1, x2)`.
pub(crate) fn channel_output<R: Rng>(
    spec: &ChannelSpec,
    x1: &[usize],
    x2: &[usize],
    rng: &mut R,
) -> Vec<usize> {
    let a = spec.alphabets();
    let w = spec.channel();
    x1.iter()
        .zip(x2)
        .map(|(&u, &v)| {
            let row = &w[a.index(u, v, 0)..a.index(u, v, 0) + a.y];
            let mut r: f64 = rng.gen();
            for (y, &p) in row.iter().enumerate() {
                if r < p {
                    return y;
                }
                r -= p;
            }
            row.iter().rposition(|&p| p > 0.0).unwrap_or(a.y - 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(cognitive: bool) -> ChannelSpec {
        ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, cognitive).unwrap()
    }

    #[test]
    fn standard_codewords_have_the_composition() {
        let cb = sample_codebook(&fig1(false), 4, 5, 3, 7).unwrap();
        for w in cb.user1.iter().chain(&cb.user2) {
            assert_eq!(w.iter().filter(|&&s| s == 0).count(), 2);
        }
        assert_eq!((cb.m1(), cb.m2()), (5, 3));
    }

    #[test]
    fn satellites_have_the_conditional_composition() {
        let cb = sample_codebook(&fig1(true), 4, 3, 2, 11).unwrap();
        for i in 0..cb.m1() {
            let center = &cb.user1[i];
            for j in 0..cb.m2() {
                let sat = cb.codeword2(i, j);
                for x1 in 0..2 {
                    let ones = (0..4).filter(|&t| center[t] == x1 && sat[t] == 1).count();
                    let zeros = (0..4).filter(|&t| center[t] == x1 && sat[t] == 0).count();
                    assert_eq!((ones, zeros), (1, 1));
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_codebook(&fig1(false), 6, 4, 4, 99).unwrap();
        let b = sample_codebook(&fig1(false), 6, 4, 4, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_codebook(&fig1(false), 6, 4, 4, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn short_blocks_cannot_keep_the_support() {
        assert!(matches!(
            sample_codebook(&fig1(true), 3, 2, 2, 0),
            Err(MmacError::InfeasibleSupport { .. })
        ));
    }
}
