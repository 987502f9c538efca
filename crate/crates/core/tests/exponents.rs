use mmac::exponents::{
    exponent_type1_cognitive, exponent_type1_standard, exponent_type2_standard, ExponentQuery,
    ExponentReport,
};
use mmac::regions::{trace_region, uniform_grid, DecoderKind, MacKind, RegionQuery};
use mmac::{ChannelSpec, Result};

const D: usize = 8;

fn spec(cognitive: bool) -> ChannelSpec {
    ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, cognitive).unwrap()
}

fn kind(cognitive: bool) -> MacKind {
    if cognitive {
        MacKind::Cognitive
    } else {
        MacKind::Standard
    }
}

fn user1(cognitive: bool, r1: f64, r2: f64) -> f64 {
    let q = ExponentQuery::new(&spec(cognitive), kind(cognitive), r1, r2, D);
    let f: fn(&ExponentQuery) -> Result<ExponentReport> = if cognitive {
        exponent_type1_cognitive
    } else {
        exponent_type1_standard
    };
    f(&q).unwrap().value
}

#[test]
fn positive_inside_and_zero_outside_the_region() {
    for cognitive in [false, true] {
        let s = spec(cognitive);
        let curve = trace_region(&RegionQuery::new(
            &s,
            kind(cognitive),
            DecoderKind::Successive,
            uniform_grid(0.3, 0.1),
        ))
        .unwrap();
        for p in &curve.points {
            if p.r1_max > 0.03 {
                let e = user1(cognitive, p.r1_max - 0.02, p.r2);
                assert!(e > 0.0, "cognitive={cognitive} r2={}: {e}", p.r2);
            }
            let e = user1(cognitive, p.r1_max + 0.02, p.r2);
            assert_eq!(e, 0.0, "cognitive={cognitive} r2={}", p.r2);
        }
    }
}

#[test]
fn user1_exponents_are_nonincreasing_in_both_rates() {
    let rates = [0.0, 0.1, 0.2, 0.3];
    for cognitive in [false, true] {
        let table: Vec<Vec<f64>> = rates
            .iter()
            .map(|&r1| rates.iter().map(|&r2| user1(cognitive, r1, r2)).collect())
            .collect();
        for i in 0..rates.len() {
            for j in 0..rates.len() {
                assert!(table[i][j] >= 0.0);
                if i + 1 < rates.len() {
                    assert!(table[i + 1][j] <= table[i][j] + 1e-9, "r1 step at {i},{j}");
                }
                if j + 1 < rates.len() {
                    assert!(table[i][j + 1] <= table[i][j] + 1e-9, "r2 step at {i},{j}");
                }
            }
        }
    }
}

#[test]
fn user2_exponent_decreases_to_zero_past_its_bound() {
    let s = spec(false);
    let mut previous = f64::INFINITY;
    for r2 in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let e = exponent_type2_standard(&ExponentQuery::new(&s, MacKind::Standard, 0.0, r2, D))
            .unwrap()
            .value;
        assert!(e >= 0.0 && e <= previous + 1e-9, "r2={r2}: {e}");
        if r2 > 0.3723 {
            assert_eq!(e, 0.0);
        }
        previous = e;
    }
}

#[test]
fn refinement_only_lowers_the_value() {
    let s = spec(false);
    let q = ExponentQuery::new(&s, MacKind::Standard, 0.1, 0.1, D);
    let coarse = exponent_type1_standard(&q).unwrap();
    let fine = exponent_type1_standard(&q.clone().with_refine(true)).unwrap();
    assert!(fine.value <= coarse.value + 1e-12);
    assert!((fine.value - (fine.divergence + (fine.inner_value - 0.1).max(0.0))).abs() < 1e-9);
}
