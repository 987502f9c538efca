use mmac::prob::InputDistribution;
use mmac::simulator::{
    decode_successive, exact_error_profile, monte_carlo_error, sample_codebook,
    type_enumerator_profile, type_probability, Codebook, CodebookSource, SimDecoder,
};
use mmac::{Alphabets, ChannelSpec, JointType};
use proptest::prelude::*;

fn fig(cognitive: bool) -> ChannelSpec {
    ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, cognitive).unwrap()
}

#[test]
fn monte_carlo_agrees_with_exact_enumeration() {
    let spec = fig(false);
    let cb = sample_codebook(&spec, 6, 3, 3, 21).unwrap();
    let exact = exact_error_profile(&cb, &spec).unwrap();
    for decoder in [SimDecoder::Successive, SimDecoder::MaxMetric] {
        let mc = monte_carlo_error(CodebookSource::Fixed(&cb), &spec, decoder, 100_000, 5).unwrap();
        let e = exact.get(decoder);
        assert!(
            mc.interval.0 <= e && e <= mc.interval.1,
            "{decoder:?}: {e} not in {:?}",
            mc.interval
        );
    }
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
        q1: vec![0.5; 2],
        q2: vec![0.5; 2],
    };
    ChannelSpec::new(a, w.clone(), w, inputs).unwrap()
}

#[test]
fn noiseless_injective_codebook_never_errs() {
    let spec = noiseless();
    let cb = Codebook::standard(
        vec![vec![0, 0, 1, 1], vec![1, 1, 0, 0], vec![0, 1, 0, 1]],
        vec![vec![0, 1, 1, 0], vec![1, 0, 0, 1]],
    )
    .unwrap();
    let exact = exact_error_profile(&cb, &spec).unwrap();
    for d in SimDecoder::ALL {
        assert_eq!(exact.get(d), 0.0, "{d:?}");
    }
    // The Wilson upper limit with no errors is about 3.84 / trials, below 3.7 / trials up to 101 trials.
    let trials = 100;
    let mc = monte_carlo_error(
        CodebookSource::Fixed(&cb),
        &spec,
        SimDecoder::Successive,
        trials,
        1,
    )
    .unwrap();
    assert_eq!(mc.errors, 0);
    assert!(mc.interval.1 < 3.7 / trials as f64, "{:?}", mc.interval);
}

#[test]
fn genie_identity_and_ml_inequality_on_cognitive_codebooks() {
    let spec = fig(true);
    let matched = spec.matched().unwrap();
    for seed in 0..8 {
        let cb = sample_codebook(&spec, 6, 2, 3, seed).unwrap();
        let e = exact_error_profile(&cb, &spec).unwrap();
        assert!((e.genie - e.successive).abs() < 1e-12);
        let m = exact_error_profile(&cb, &matched).unwrap();
        assert!(m.ml >= 0.5 * m.successive - 1e-12);
    }
}

#[test]
fn ensemble_mean_enumerator_matches_the_type_probability() {
    let spec = fig(false);
    let a = spec.alphabets();
    let n = 8;
    let m2 = 40;
    let reference = sample_codebook(&spec, n, 1, 1, 0).unwrap();
    let x1 = reference.user1[0].clone();
    let y = vec![0, 1, 2, 1, 1, 0, 2, 1];
    let draws = 2000;
    let mut totals = std::collections::BTreeMap::new();
    for seed in 0..draws {
        let cb = sample_codebook(&spec, n, 1, m2, 1000 + seed).unwrap();
        for s in type_enumerator_profile(&cb, &x1, &y, a).unwrap() {
            *totals.entry(s.joint_type.counts).or_insert(0u64) += s.count;
        }
    }
    let competitors = (m2 - 1) as f64;
    for (counts, total) in totals.iter().filter(|(_, &c)| c > 200) {
        let t = JointType::new(a, counts.clone()).unwrap();
        let p = type_probability(&reference, &x1, &y, &t).unwrap();
        let mean = *total as f64 / draws as f64;
        let expect = competitors * p;
        // N is a sum of independent indicators, so its variance is below its mean.
        let sd = (expect / draws as f64).sqrt();
        assert!((mean - expect).abs() < 5.0 * sd, "mean {mean} vs {expect}");
    }
}

#[test]
fn sampling_is_reproducible() {
    let spec = fig(true);
    let src = CodebookSource::Ensemble { n: 6, m1: 2, m2: 2 };
    let a = monte_carlo_error(src, &spec, SimDecoder::Genie, 2000, 17).unwrap();
    let b = monte_carlo_error(src, &spec, SimDecoder::Genie, 2000, 17).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumerator_counts_every_competitor(seed in any::<u64>(), m2 in 1usize..12, yseed in any::<u64>()) {
        let spec = fig(false);
        let cb = sample_codebook(&spec, 6, 1, m2, seed).unwrap();
        let y: Vec<usize> = (0..6).map(|t| ((yseed >> (2 * t)) % 3) as usize).collect();
        let prof = type_enumerator_profile(&cb, &cb.user1[0], &y, spec.alphabets()).unwrap();
        prop_assert_eq!(prof.iter().map(|s| s.count).sum::<u64>(), (m2 - 1) as u64);
    }

    #[test]
    fn log_domain_scores_match_direct_products(seed in any::<u64>(), yseed in any::<u64>()) {
        let spec = fig(false);
        let a = spec.alphabets();
        let cb = sample_codebook(&spec, 6, 3, 4, seed).unwrap();
        let y: Vec<usize> = (0..6).map(|t| ((yseed >> (2 * t)) % 3) as usize).collect();
        let out = decode_successive(&cb, &y, &spec).unwrap();
        let q = spec.metric();
        for i in 0..cb.m1() {
            let direct: f64 = (0..cb.m2())
                .map(|j| {
                    let x2 = cb.codeword2(i, j);
                    (0..6).map(|t| q[a.index(cb.user1[i][t], x2[t], y[t])]).product::<f64>()
                })
                .sum();
            prop_assert!((out.scores[i].exp() - direct).abs() <= 1e-9 * direct);
        }
    }
}
