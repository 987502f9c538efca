use rayon::prelude::*;

use super::standard::{lapidoth_region, successive_region, to_point};
use super::{
    cognitive_region_maxmetric, cognitive_region_successive, Binding, DecoderKind, MacKind,
    R1Bound, RateRegionCurve, RegionPoint, RegionQuery,
};
use crate::error::{MmacError, Result};

/// Evaluates `bound` at every grid point up to `r2_max`, plus `r2_max`
/// itself, in parallel and in grid order.
pub(crate) fn sweep<F>(grid: &[f64], r2_max: f64, bound: F) -> Result<Vec<RegionPoint>>
where
    F: Fn(f64) -> Result<R1Bound> + Sync,
{
    let mut rates: Vec<f64> = grid.iter().copied().filter(|&r| r <= r2_max).collect();
    if rates.last().is_none_or(|&last| r2_max - last > 1e-9) {
        rates.push(r2_max);
    }
    let results: Vec<Result<R1Bound>> = rates.par_iter().map(|&r2| bound(r2)).collect();
    let mut points = Vec::with_capacity(rates.len());
    let mut failures = Vec::new();
    for (i, (r2, res)) in rates.iter().zip(results).enumerate() {
        match res {
            Ok(b) => points.push(to_point(*r2, b)),
            Err(e) => failures.push((i, e)),
        }
    }
    if let Some((first_index, first)) = failures.first().cloned() {
        return Err(MmacError::GridFailures {
            count: failures.len(),
            first_index,
            first: Box::new(first),
        });
    }
    Ok(points)
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(MmacError::InvalidConfig("empty R2 grid".into()));
    }
    if grid.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(MmacError::InvalidConfig(
            "R2 grid must be sorted, finite and nonnegative".into(),
        ));
    }
    Ok(())
}

/// Traces the boundary requested by `query`.
pub fn trace_region(query: &RegionQuery) -> Result<RateRegionCurve> {
    validate_grid(&query.r2_grid)?;
    let tol = query.tolerances;
    let grid = &query.r2_grid;
    let curve = match (query.mac_kind, query.decoder_kind) {
        (MacKind::Standard, DecoderKind::Successive) => successive_region(&query.spec, grid, tol)?,
        (MacKind::Standard, DecoderKind::MaxMetric) => lapidoth_region(&query.spec, grid, tol)?,
        (MacKind::Standard, DecoderKind::MatchedMl) => {
            let mut c = lapidoth_region(&query.spec.matched()?, grid, tol)?;
            c.decoder_kind = DecoderKind::MatchedMl;
            c
        }
        (MacKind::Cognitive, DecoderKind::Successive) => {
            cognitive_region_successive(&query.spec, grid, tol)?
        }
        (MacKind::Cognitive, DecoderKind::MaxMetric) => {
            cognitive_region_maxmetric(&query.spec, grid, tol)?
        }
        (MacKind::Cognitive, DecoderKind::MatchedMl) => {
            let mut c = cognitive_region_maxmetric(&query.spec.matched()?, grid, tol)?;
            c.decoder_kind = DecoderKind::MatchedMl;
            c
        }
    };
    Ok(if query.convex_hull {
        concave_envelope(curve)
    } else {
        curve
    })
}

/// Replaces `r1_max` by the least concave majorant of the points together
/// with the corner `(r2_max, 0)` of the region.
pub fn concave_envelope(mut curve: RateRegionCurve) -> RateRegionCurve {
    let mut xy: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.r2, p.r1_max)).collect();
    xy.push((curve.r2_max, 0.0));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &pt in &xy {
        if let Some(last) = hull.last() {
            if pt.0 <= last.0 {
                if pt.1 > last.1 {
                    hull.pop();
                } else {
                    continue;
                }
            }
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let eval = |x: f64| -> f64 {
        for w in hull.windows(2) {
            if x <= w[1].0 {
                let span = w[1].0 - w[0].0;
                if span <= 0.0 {
                    return w[0].1.max(w[1].1);
                }
                return w[0].1 + (x - w[0].0) / span * (w[1].1 - w[0].1);
            }
        }
        hull[hull.len() - 1].1
    };
    for p in &mut curve.points {
        let v = eval(p.r2);
        if v > p.r1_max + 1e-12 {
            p.r1_max = v;
            p.binding = Binding::TimeSharing;
        }
    }
    curve
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(f64, f64)], r2_max: f64) -> RateRegionCurve {
        RateRegionCurve {
            mac_kind: MacKind::Standard,
            decoder_kind: DecoderKind::Successive,
            r2_max,
            points: points
                .iter()
                .map(|&(r2, r1)| RegionPoint {
                    r2,
                    r1_max: r1,
                    binding: Binding::SingleUser,
                    certificates: vec![],
                })
                .collect(),
        }
    }

    #[test]
    fn envelope_fills_a_dent() {
        let c = concave_envelope(curve(&[(0.0, 1.0), (0.5, 0.2), (1.0, 0.8)], 1.0));
        assert!((c.points[1].r1_max - 0.9).abs() < 1e-12);
        assert_eq!(c.points[1].binding, Binding::TimeSharing);
        assert_eq!(c.points[0].r1_max, 1.0);
    }

    #[test]
    fn envelope_keeps_concave_curves() {
        let raw = curve(&[(0.0, 1.0), (0.5, 0.9), (1.0, 0.5)], 1.0);
        let c = concave_envelope(raw.clone());
        assert_eq!(c, raw);
    }

    #[test]
    fn grid_must_be_sorted() {
        assert!(validate_grid(&[0.2, 0.1]).is_err());
        assert!(validate_grid(&[]).is_err());
        assert!(validate_grid(&[0.0, 0.1]).is_ok());
    }
}
