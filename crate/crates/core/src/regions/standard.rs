use super::programs;
use super::{
    arg_min, checked, Binding, Certificate, DecoderKind, FValues, MacKind, R1Bound,
    RateRegionCurve, RegionPoint,
};
use crate::error::{MmacError, Result};
use crate::prob::{metric_expectation, ChannelSpec};
use crate::solver::{SolveReport, Tolerances};
use crate::JointDist;

fn require_standard(spec: &ChannelSpec) -> Result<()> {
    if spec.is_cognitive() {
        return Err(MmacError::InvalidConfig(
            "standard MAC regions need independent inputs q1, q2".into(),
        ));
    }
    Ok(())
}

/// Threshold on the metric expectation for the `R1` conditions at joint `p`
/// and user-2 rate `r2`.
pub fn f_under(spec: &ChannelSpec, p: &JointDist, r2: f64, tol: Tolerances) -> Result<FValues> {
    let e_p = metric_expectation(p, spec)?;
    let report = checked(
        programs::inner(spec, p, r2).solve(spec.alphabets(), tol)?,
        "inner maximization",
    )?;
    let inner = report.value;
    Ok(FValues {
        f_under: e_p.max(inner),
        metric_at_p: e_p,
        inner_max: inner,
        witness: (!report.is_infeasible()).then(|| report.argmin.clone()),
        report,
    })
}

/// Largest `R2` for the successive decoder, which coincides with the
/// maximum-metric user-2 condition, at joint `p`.
pub fn r2_bound_at(spec: &ChannelSpec, p: &JointDist, tol: Tolerances) -> Result<SolveReport> {
    let e_p = metric_expectation(p, spec)?;
    checked(
        programs::user2(spec, p, e_p).solve(spec.alphabets(), tol)?,
        "user-2 bound",
    )
}

/// User-2 rate bound at the true joint `Q1 x Q2 x W`.
pub fn r2_bound_standard(spec: &ChannelSpec, tol: Tolerances) -> Result<(f64, SolveReport)> {
    require_standard(spec)?;
    let r = r2_bound_at(spec, &spec.true_joint(), tol)?;
    Ok((r.value.max(0.0), r))
}

/// Successive-decoding `R1` bound at `r2` for the true joint.
pub fn r1_bound_standard(spec: &ChannelSpec, r2: f64, tol: Tolerances) -> Result<R1Bound> {
    require_standard(spec)?;
    r1_bound_standard_at(spec, &spec.true_joint(), r2, tol)
}

/// Successive-decoding `R1` bound at `r2` with `p` in place of the true
/// joint: the smallest of three convex programs.
pub fn r1_bound_standard_at(
    spec: &ChannelSpec,
    p: &JointDist,
    r2: f64,
    tol: Tolerances,
) -> Result<R1Bound> {
    if !(r2 >= 0.0) {
        return Err(MmacError::InvalidConfig(format!(
            "rate {r2} must be nonnegative"
        )));
    }
    let a = spec.alphabets();
    let f = f_under(spec, p, r2, tol)?;
    let threshold = f.f_under;
    let single = checked(
        programs::single_user(spec, p, threshold).solve(a, tol)?,
        "single-user condition",
    )?;
    // With R2 = 0 the above-rate program is never larger, so this one adds nothing.
    let below = if r2 > 0.0 {
        Some(checked(
            programs::below_rate(spec, p, r2, threshold).solve(a, tol)?,
            "below-rate condition",
        )?)
    } else {
        None
    };
    let above = checked(
        programs::above_rate(spec, p, r2, threshold).solve(a, tol)?,
        "above-rate condition",
    )?;

    let mut candidates = vec![(Binding::SingleUser, single.value)];
    if let Some(b) = &below {
        candidates.push((Binding::BelowRate, b.value));
    }
    candidates.push((Binding::AboveRate, above.value));
    let (binding, value) = arg_min(&candidates);

    let mut certificates = vec![Certificate::new("single_user", single)];
    if let Some(b) = below {
        certificates.push(Certificate::new("below_rate", b));
    }
    certificates.push(Certificate::new("above_rate", above));
    Ok(R1Bound {
        value: value.max(0.0),
        binding,
        f: Some(f),
        certificates,
    })
}

fn single_user_lm(
    spec: &ChannelSpec,
    p: &JointDist,
    e_p: f64,
    tol: Tolerances,
) -> Result<SolveReport> {
    checked(
        programs::single_user(spec, p, e_p).solve(spec.alphabets(), tol)?,
        "maximum-metric user-1 condition",
    )
}

fn sum_rate_lm(
    spec: &ChannelSpec,
    p: &JointDist,
    e_p: f64,
    r1: f64,
    r2: f64,
    tol: Tolerances,
) -> Result<SolveReport> {
    checked(
        programs::sum_rate(spec, p, e_p, r1, r2).solve(spec.alphabets(), tol)?,
        "maximum-metric sum-rate condition",
    )
}

/// Largest `R1` satisfying `R1 + R2 <= S(R1)` below `cap`, where `S` is
/// nonincreasing in `R1`.
pub(crate) fn bisect_sum_rate<F>(
    cap: f64,
    r2: f64,
    mut s: F,
) -> Result<(f64, bool, Option<SolveReport>)>
where
    F: FnMut(f64) -> Result<SolveReport>,
{
    let at_cap = s(cap)?;
    if cap + r2 <= at_cap.value {
        return Ok((cap, false, Some(at_cap)));
    }
    let at_zero = s(0.0)?;
    if r2 > at_zero.value {
        return Ok((0.0, true, None));
    }
    let (mut lo, mut hi) = (0.0, cap);
    let mut best = at_zero;
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        let r = s(mid)?;
        if mid + r2 <= r.value {
            lo = mid;
            best = r;
        } else {
            hi = mid;
        }
    }
    Ok((lo, true, Some(best)))
}

/// Maximum-metric `R1` bound at `r2` for the standard MAC, or `None` when
/// `r2` exceeds the user-2 condition.
pub fn lapidoth_r1(spec: &ChannelSpec, r2: f64, tol: Tolerances) -> Result<R1Bound> {
    require_standard(spec)?;
    let p = spec.true_joint();
    let e_p = metric_expectation(&p, spec)?;
    let single = single_user_lm(spec, &p, e_p, tol)?;
    let cap = single.value.max(0.0);
    let (r1, sum_binds, sum) =
        bisect_sum_rate(cap, r2, |r1| sum_rate_lm(spec, &p, e_p, r1, r2, tol))?;
    let mut certificates = vec![Certificate::new("single_user", single)];
    if let Some(s) = sum {
        certificates.push(Certificate::new("sum_rate", s));
    }
    Ok(R1Bound {
        value: r1,
        binding: if sum_binds {
            Binding::SumRate
        } else {
            Binding::SingleUser
        },
        f: None,
        certificates,
    })
}

/// Maximum-metric region of the standard MAC over `r2_grid`.
pub fn lapidoth_region(
    spec: &ChannelSpec,
    r2_grid: &[f64],
    tol: Tolerances,
) -> Result<RateRegionCurve> {
    let (r2_max, _) = r2_bound_standard(spec, tol)?;
    let points = super::curve::sweep(r2_grid, r2_max, |r2| lapidoth_r1(spec, r2, tol))?;
    Ok(RateRegionCurve {
        mac_kind: MacKind::Standard,
        decoder_kind: DecoderKind::MaxMetric,
        r2_max,
        points,
    })
}

pub(crate) fn successive_region(
    spec: &ChannelSpec,
    r2_grid: &[f64],
    tol: Tolerances,
) -> Result<RateRegionCurve> {
    let (r2_max, _) = r2_bound_standard(spec, tol)?;
    let points = super::curve::sweep(r2_grid, r2_max, |r2| r1_bound_standard(spec, r2, tol))?;
    Ok(RateRegionCurve {
        mac_kind: MacKind::Standard,
        decoder_kind: DecoderKind::Successive,
        r2_max,
        points,
    })
}

pub(crate) fn to_point(r2: f64, b: R1Bound) -> RegionPoint {
    RegionPoint {
        r2,
        r1_max: b.value,
        binding: b.binding,
        certificates: b.certificates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Axes;

    fn fig1() -> ChannelSpec {
        ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, false).unwrap()
    }

    #[test]
    fn zero_rate_threshold_uses_the_product_coupling() {
        let spec = fig1();
        let p = spec.true_joint();
        let f = f_under(&spec, &p, 0.0, Tolerances::default()).unwrap();
        let product = metric_expectation(&p.product_of_marginals(Axes::X2), &spec).unwrap();
        assert!((f.inner_max - product).abs() < 1e-9);
        assert_eq!(f.f_under, f.metric_at_p.max(product));
    }

    #[test]
    fn unit_metric_threshold_is_the_rate() {
        let spec = fig1().with_metric(vec![1.0; 12]).unwrap();
        let f = f_under(&spec, &spec.true_joint(), 0.2, Tolerances::default()).unwrap();
        assert!((f.f_under - 0.2).abs() < 1e-6);
    }

    #[test]
    fn unit_metric_kills_the_user2_bound() {
        let spec = fig1().with_metric(vec![1.0; 12]).unwrap();
        let (v, _) = r2_bound_standard(&spec, Tolerances::default()).unwrap();
        assert!(v < 1e-6);
    }

    #[test]
    fn unit_metric_maximum_metric_r1_is_zero() {
        let spec = fig1().with_metric(vec![1.0; 12]).unwrap();
        let b = lapidoth_r1(&spec, 0.0, Tolerances::default()).unwrap();
        assert!(b.value < 1e-6);
    }

    #[test]
    fn zero_rate_bounds_of_both_decoders_agree() {
        let spec = fig1();
        let s = r1_bound_standard(&spec, 0.0, Tolerances::default()).unwrap();
        let m = lapidoth_r1(&spec, 0.0, Tolerances::default()).unwrap();
        assert!(
            (s.value - m.value).abs() < 1e-3,
            "{} vs {}",
            s.value,
            m.value
        );
    }

    #[test]
    fn matched_bounds_are_the_true_informations() {
        let spec = fig1().matched().unwrap();
        let p = spec.true_joint();
        let (r2, _) = r2_bound_standard(&spec, Tolerances::default()).unwrap();
        assert!((r2 - p.mutual_info_x2_vs_x1y()).abs() < 1e-5);
        let m = lapidoth_r1(&spec, 0.0, Tolerances::default()).unwrap();
        assert!((m.value - p.mutual_info_x1_vs_x2y()).abs() < 1e-5);
    }
}
