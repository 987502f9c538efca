use super::programs;
use super::standard::bisect_sum_rate;
use super::{
    arg_min, checked, Binding, Certificate, DecoderKind, FValues, MacKind, R1Bound, RateRegionCurve,
};
use crate::error::{MmacError, Result};
use crate::prob::{metric_expectation, ChannelSpec};
use crate::solver::{SolveReport, Tolerances};
use crate::JointDist;

fn require_cognitive(spec: &ChannelSpec) -> Result<()> {
    if !spec.is_cognitive() {
        return Err(MmacError::InvalidConfig(
            "cognitive MAC regions need a joint input q12".into(),
        ));
    }
    Ok(())
}

/// Cognitive analog of [`super::f_under`]: the inner set keeps the `X1 Y`
/// and `X1 X2` marginals of `p`.
pub fn f_under_cognitive(
    spec: &ChannelSpec,
    p: &JointDist,
    r2: f64,
    tol: Tolerances,
) -> Result<FValues> {
    let e_p = metric_expectation(p, spec)?;
    let report = checked(
        programs::cognitive_inner(spec, p, r2).solve(spec.alphabets(), tol)?,
        "cognitive inner maximization",
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

fn r2_bound_cognitive_at(
    spec: &ChannelSpec,
    p: &JointDist,
    tol: Tolerances,
) -> Result<SolveReport> {
    let e_p = metric_expectation(p, spec)?;
    checked(
        programs::cognitive_user2(spec, p, e_p).solve(spec.alphabets(), tol)?,
        "cognitive user-2 bound",
    )
}

/// User-2 rate bound of the cognitive MAC, shared by both decoders.
pub fn cognitive_r2_bound(spec: &ChannelSpec, tol: Tolerances) -> Result<(f64, SolveReport)> {
    require_cognitive(spec)?;
    let r = r2_bound_cognitive_at(spec, &spec.true_joint(), tol)?;
    Ok((r.value.max(0.0), r))
}

/// Successive-decoding `R1` bound of the cognitive MAC at `r2`, with `p` in
/// place of the true joint `Q12 x W`.
pub fn cognitive_r1_bound(
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
    let f = f_under_cognitive(spec, p, r2, tol)?;
    let threshold = f.f_under;
    // As in the standard case, the above-rate program dominates at R2 = 0.
    let below = if r2 > 0.0 {
        Some(checked(
            programs::cognitive_below_rate(spec, p, r2, threshold).solve(a, tol)?,
            "cognitive below-rate condition",
        )?)
    } else {
        None
    };
    let above = checked(
        programs::cognitive_above_rate(spec, p, r2, threshold).solve(a, tol)?,
        "cognitive above-rate condition",
    )?;

    let mut candidates = Vec::new();
    if let Some(b) = &below {
        candidates.push((Binding::BelowRate, b.value));
    }
    candidates.push((Binding::AboveRate, above.value));
    let (binding, value) = arg_min(&candidates);
    let mut certificates = Vec::new();
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

fn sum_rate_sb(
    spec: &ChannelSpec,
    p: &JointDist,
    e_p: f64,
    r1: f64,
    tol: Tolerances,
) -> Result<SolveReport> {
    checked(
        programs::cognitive_sum_rate(spec, p, e_p, r1).solve(spec.alphabets(), tol)?,
        "cognitive maximum-metric sum-rate condition",
    )
}

/// Maximum-metric `R1` bound of the cognitive MAC at `r2`.
pub fn somekh_baruch_r1(spec: &ChannelSpec, r2: f64, tol: Tolerances) -> Result<R1Bound> {
    require_cognitive(spec)?;
    let p = spec.true_joint();
    let e_p = metric_expectation(&p, spec)?;
    // Beyond the mutual information I(X1X2;Y) of p the sum-rate program is unconstrained in R1.
    let cap = (p.mutual_info_x1x2_y() - r2).max(0.0);
    let (r1, _, sum) = bisect_sum_rate(cap, r2, |r1| sum_rate_sb(spec, &p, e_p, r1, tol))?;
    Ok(R1Bound {
        value: r1,
        binding: Binding::SumRate,
        f: None,
        certificates: sum
            .into_iter()
            .map(|s| Certificate::new("sum_rate", s))
            .collect(),
    })
}

/// Successive-decoding region of the cognitive MAC over `r2_grid`.
pub fn cognitive_region_successive(
    spec: &ChannelSpec,
    r2_grid: &[f64],
    tol: Tolerances,
) -> Result<RateRegionCurve> {
    let (r2_max, _) = cognitive_r2_bound(spec, tol)?;
    let p = spec.true_joint();
    let points = super::curve::sweep(r2_grid, r2_max, |r2| cognitive_r1_bound(spec, &p, r2, tol))?;
    Ok(RateRegionCurve {
        mac_kind: MacKind::Cognitive,
        decoder_kind: DecoderKind::Successive,
        r2_max,
        points,
    })
}

/// Maximum-metric region of the cognitive MAC over `r2_grid`.
pub fn cognitive_region_maxmetric(
    spec: &ChannelSpec,
    r2_grid: &[f64],
    tol: Tolerances,
) -> Result<RateRegionCurve> {
    let (r2_max, _) = cognitive_r2_bound(spec, tol)?;
    let points = super::curve::sweep(r2_grid, r2_max, |r2| somekh_baruch_r1(spec, r2, tol))?;
    Ok(RateRegionCurve {
        mac_kind: MacKind::Cognitive,
        decoder_kind: DecoderKind::MaxMetric,
        r2_max,
        points,
    })
}
