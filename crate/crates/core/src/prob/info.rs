use super::{ChannelSpec, Joint, Real};
use crate::error::{MmacError, Result};

/// Shannon entropy in nats of a (possibly unnormalized) nonnegative vector,
/// with `0 log 0 = 0`.
pub fn entropy<T: Real>(p: &[T]) -> T {
    p.iter()
        .filter(|&&v| v > T::zero())
        .map(|&v| -v * v.ln())
        .sum::<T>()
        .max(T::zero())
}

/// `D(p || r)` in nats; `+inf` when `p` is not absolutely continuous w.r.t. `r`.
pub fn kl_divergence<T: Real>(p: &[T], r: &[T]) -> T {
    assert_eq!(p.len(), r.len(), "kl_divergence: shape mismatch");
    let mut acc = T::zero();
    for (&pi, &ri) in p.iter().zip(r) {
        if pi > T::zero() {
            if ri <= T::zero() {
                return T::infinity();
            }
            acc = acc + pi * (pi / ri).ln();
        }
    }
    acc.max(T::zero())
}

/// `E_p[log q]` over the support of `p`.
pub fn metric_expectation(p: &Joint<f64>, spec: &ChannelSpec) -> Result<f64> {
    let log_q = spec.log_metric();
    let mut acc = 0.0;
    for (&pi, &lq) in p.probs().iter().zip(log_q) {
        if pi > 0.0 {
            if lq == f64::NEG_INFINITY {
                return Err(MmacError::UnsupportedMass);
            }
            acc += pi * lq;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        assert!((entropy(&[0.5_f64, 0.5]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&[1.0_f64, 0.0]), 0.0);
        let by_hand = -(0.25_f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((entropy(&[0.25_f64, 0.75]) - 0.5623351446188083).abs() < 1e-12);
        assert!((entropy(&[0.25_f64, 0.75]) - by_hand).abs() < 1e-15);
    }

    #[test]
    fn entropy_f32() {
        assert!((entropy(&[0.5_f32, 0.5]) - 2f32.ln()).abs() < 1e-6);
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&[0.3_f64, 0.7], &[0.3, 0.7]), 0.0);
        assert!((kl_divergence(&[1.0_f64, 0.0], &[0.5, 0.5]) - 2f64.ln()).abs() < 1e-15);
        assert!(kl_divergence(&[0.5_f64, 0.5], &[1.0, 0.0]).is_infinite());
    }
}
