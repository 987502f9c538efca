//! Solver values against exhaustive type-grid optima on the same programs.

use mmac::oracle::{
    grid_minimize, round_to_grid, sandwich_suite, BracketConstant, SandwichOptions, SandwichStatus,
};
use mmac::prob::metric_expectation;
use mmac::regions::programs;
use mmac::regions::{r1_bound_standard_at, r2_bound_at};
use mmac::solver::{minimize, ConstraintSet, Functional, Sense, Tolerances};
use mmac::{Axes, ChannelSpec};

fn fig1() -> ChannelSpec {
    ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, false).unwrap()
}

fn i2(b: usize) -> Functional {
    Functional::mutual_info(b, Axes::X2, Axes::X1Y, Axes::NONE)
}

#[test]
fn every_program_is_bracketed_with_per_family_constants() {
    for cognitive in [false, true] {
        for matched in [false, true] {
            let mut spec = ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, cognitive).unwrap();
            if matched {
                spec = spec.matched().unwrap();
            }
            for d in [8, 12, 16] {
                let checks = sandwich_suite(
                    &spec,
                    &SandwichOptions::new(d, &[0.0, 0.2, 0.4], BracketConstant::PerFamily),
                )
                .unwrap();
                for c in &checks {
                    assert!(c.one_sided, "{c:?}");
                    assert_ne!(c.status, SandwichStatus::Fail, "d={d} {c:?}");
                }
            }
        }
    }
}

#[test]
fn only_independence_constraints_leave_the_grid_empty_at_16() {
    let checks = sandwich_suite(
        &fig1(),
        &SandwichOptions::new(16, &[0.0, 0.2, 0.4], BracketConstant::PerFamily),
    )
    .unwrap();
    for c in checks
        .iter()
        .filter(|c| c.status == SandwichStatus::GridEmpty)
    {
        assert_eq!((c.program.as_str(), c.r2), ("inner", Some(0.0)));
    }
}

#[test]
fn matched_user2_bound_refines_monotonically() {
    let spec = fig1().matched().unwrap();
    let value = |d| {
        let p = round_to_grid(&spec.true_joint(), d).unwrap();
        let e_p = metric_expectation(&p, &spec).unwrap();
        let prog = programs::user2(&spec, &p, e_p);
        let solver = prog
            .solve(spec.alphabets(), Tolerances::default())
            .unwrap()
            .value;
        let grid = grid_minimize(&prog.objective, &prog.constraints, spec.alphabets(), d)
            .unwrap()
            .value;
        (solver, grid)
    };
    let (s8, g8) = value(8);
    let (s16, g16) = value(16);
    let eps = BracketConstant::PerFamily.epsilon("user2", 16);
    assert!(g16 <= g8 + (s16 - s8).abs() + eps, "{g16} vs {g8}");
    assert!(s16 <= g16 + 1e-6 && g16 <= s16 + eps);
}

#[test]
fn adding_constraints_never_lowers_the_minimum() {
    let spec = fig1();
    let p = spec.true_joint();
    let a = spec.alphabets();
    let tol = Tolerances::default();
    let e_p = metric_expectation(&p, &spec).unwrap();
    let loose = ConstraintSet::new(1)
        .marginal(0, Axes::X2, p.marginal(Axes::X2))
        .marginal(0, Axes::X1Y, p.marginal(Axes::X1Y));
    let mut previous = minimize(&i2(0), &loose, a, tol).unwrap().value;
    for cut in [e_p - 0.3, e_p - 0.15, e_p, e_p + 0.02] {
        let cs = loose
            .clone()
            .linear(0, spec.log_metric().to_vec(), Sense::Ge, cut);
        let v = minimize(&i2(0), &cs, a, tol).unwrap().value;
        assert!(v >= previous - 1e-6, "cut {cut}: {v} < {previous}");
        previous = v;
    }
}

#[test]
fn metric_scaling_leaves_the_user2_bound_unchanged() {
    let spec = fig1();
    let tol = Tolerances::default();
    let p = spec.true_joint();
    let base = r2_bound_at(&spec, &p, tol).unwrap().value;
    let scaled: Vec<f64> = spec.metric().iter().map(|q| 3.0 * q.powf(0.5)).collect();
    let other = spec.with_metric(scaled).unwrap();
    let v = r2_bound_at(&other, &p, tol).unwrap().value;
    assert!((v - base).abs() < 1e-6, "{v} vs {base}");
}

#[test]
fn solves_are_reproducible() {
    let spec = fig1();
    let p = spec.true_joint();
    let a = r1_bound_standard_at(&spec, &p, 0.25, Tolerances::default()).unwrap();
    let b = r1_bound_standard_at(&spec, &p, 0.25, Tolerances::default()).unwrap();
    assert_eq!(a, b);
}
