use serde::{Deserialize, Serialize};

use super::{check_distribution, Alphabets, Joint};
use crate::error::{MmacError, Result};

/// Input ensemble: independent codebooks or a superposition (cognitive) code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputDistribution {
    Independent { q1: Vec<f64>, q2: Vec<f64> },
    Joint { q12: Vec<f64> },
}

/// True channel `W(y | x1, x2)`, decoding metric `q(x1, x2, y)` and inputs.
///
/// `w` and `q` are stored flat in `(x1, x2, y)` order; `q12` in `(x1, x2)`
/// order. Rates are in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecData", into = "SpecData")]
pub struct ChannelSpec {
    alphabets: Alphabets,
    w: Vec<f64>,
    q: Vec<f64>,
    log_q: Vec<f64>,
    inputs: InputDistribution,
}

#[derive(Serialize, Deserialize)]
struct SpecData {
    alphabets: Alphabets,
    w: Vec<f64>,
    q: Vec<f64>,
    inputs: InputDistribution,
}

impl TryFrom<SpecData> for ChannelSpec {
    type Error = MmacError;

    fn try_from(d: SpecData) -> Result<Self> {
        Self::new(d.alphabets, d.w, d.q, d.inputs)
    }
}

impl From<ChannelSpec> for SpecData {
    fn from(s: ChannelSpec) -> Self {
        Self {
            alphabets: s.alphabets,
            w: s.w,
            q: s.q,
            inputs: s.inputs,
        }
    }
}

impl ChannelSpec {
    pub fn new(
        alphabets: Alphabets,
        w: Vec<f64>,
        q: Vec<f64>,
        inputs: InputDistribution,
    ) -> Result<Self> {
        let cells = alphabets.cells();
        if w.len() != cells || q.len() != cells {
            return Err(MmacError::InvalidChannel(format!(
                "W and q need {cells} entries, got {} and {}",
                w.len(),
                q.len()
            )));
        }
        for (row, chunk) in w.chunks(alphabets.y).enumerate() {
            check_distribution(chunk).map_err(|e| {
                let (x1, x2) = (row / alphabets.x2, row % alphabets.x2);
                MmacError::InvalidChannel(format!("W(.|{x1},{x2}): {e}"))
            })?;
        }
        if let Some(i) = q.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(MmacError::InvalidChannel(format!(
                "metric entry {i} is negative or not finite"
            )));
        }
        if let Some(i) = (0..cells).find(|&i| w[i] > 0.0 && q[i] == 0.0) {
            let (x1, x2, y) = alphabets.coords(i);
            return Err(MmacError::InvalidChannel(format!(
                "metric is zero at ({x1},{x2},{y}) where W is positive"
            )));
        }
        match &inputs {
            InputDistribution::Independent { q1, q2 } => {
                if q1.len() != alphabets.x1 || q2.len() != alphabets.x2 {
                    return Err(MmacError::InvalidChannel(
                        "q1/q2 have the wrong length".into(),
                    ));
                }
                check_distribution(q1)
                    .map_err(|e| MmacError::InvalidChannel(format!("q1: {e}")))?;
                check_distribution(q2)
                    .map_err(|e| MmacError::InvalidChannel(format!("q2: {e}")))?;
            }
            InputDistribution::Joint { q12 } => {
                if q12.len() != alphabets.x1 * alphabets.x2 {
                    return Err(MmacError::InvalidChannel("q12 has the wrong length".into()));
                }
                check_distribution(q12)
                    .map_err(|e| MmacError::InvalidChannel(format!("q12: {e}")))?;
            }
        }
        let log_q = q.iter().map(|&v| v.ln()).collect();
        Ok(Self {
            alphabets,
            w,
            q,
            log_q,
            inputs,
        })
    }

    /// Binary adder `Y = X1 + X2` with symbol-dependent crossover:
    /// `W(y|x1,x2) = 1 - 2 d[x1][x2]` if `y = x1 + x2`, else `d[x1][x2]`.
    pub fn adder_channel(deltas: [[f64; 2]; 2]) -> Result<Vec<f64>> {
        let mut w = Vec::with_capacity(12);
        for (x1, row) in deltas.iter().enumerate() {
            for (x2, &d) in row.iter().enumerate() {
                if !(0.0..=0.5).contains(&d) {
                    return Err(MmacError::InvalidChannel(format!(
                        "crossover {d} at ({x1},{x2}) must lie in [0, 1/2]"
                    )));
                }
                for y in 0..3 {
                    w.push(if y == x1 + x2 { 1.0 - 2.0 * d } else { d });
                }
            }
        }
        Ok(w)
    }

    /// Adder channel with per-input crossovers and an adder metric with a
    /// single crossover `delta`, uniform binary inputs.
    pub fn adder(deltas: [[f64; 2]; 2], delta: f64, cognitive: bool) -> Result<Self> {
        let alphabets = Alphabets::new(2, 2, 3)?;
        let w = Self::adder_channel(deltas)?;
        let q = Self::adder_channel([[delta; 2]; 2])?;
        let inputs = if cognitive {
            InputDistribution::Joint { q12: vec![0.25; 4] }
        } else {
            InputDistribution::Independent {
                q1: vec![0.5; 2],
                q2: vec![0.5; 2],
            }
        };
        Self::new(alphabets, w, q, inputs)
    }

    /// Same channel and inputs, decoding with `q = W`.
    pub fn matched(&self) -> Result<Self> {
        self.with_metric(self.w.clone())
    }

    pub fn with_metric(&self, q: Vec<f64>) -> Result<Self> {
        Self::new(self.alphabets, self.w.clone(), q, self.inputs.clone())
    }

    pub fn with_inputs(&self, inputs: InputDistribution) -> Result<Self> {
        Self::new(self.alphabets, self.w.clone(), self.q.clone(), inputs)
    }

    pub fn alphabets(&self) -> Alphabets {
        self.alphabets
    }

    pub fn channel(&self) -> &[f64] {
        &self.w
    }

    pub fn metric(&self) -> &[f64] {
        &self.q
    }

    /// `log q` per cell, `-inf` where `q = 0`.
    pub fn log_metric(&self) -> &[f64] {
        &self.log_q
    }

    pub fn inputs(&self) -> &InputDistribution {
        &self.inputs
    }

    pub fn is_cognitive(&self) -> bool {
        matches!(self.inputs, InputDistribution::Joint { .. })
    }

    /// Input distribution on `X1 x X2` (the product `Q1 x Q2` for independent inputs).
    pub fn input_joint(&self) -> Vec<f64> {
        match &self.inputs {
            InputDistribution::Independent { q1, q2 } => q1
                .iter()
                .flat_map(|&a| q2.iter().map(move |&b| a * b))
                .collect(),
            InputDistribution::Joint { q12 } => q12.clone(),
        }
    }

    pub fn q1(&self) -> Vec<f64> {
        match &self.inputs {
            InputDistribution::Independent { q1, .. } => q1.clone(),
            InputDistribution::Joint { q12 } => q12
                .chunks(self.alphabets.x2)
                .map(|r| r.iter().sum())
                .collect(),
        }
    }

    pub fn q2(&self) -> Vec<f64> {
        match &self.inputs {
            InputDistribution::Independent { q2, .. } => q2.clone(),
            InputDistribution::Joint { q12 } => (0..self.alphabets.x2)
                .map(|b| q12.iter().skip(b).step_by(self.alphabets.x2).sum())
                .collect(),
        }
    }

    /// `Q(x1, x2) W(y | x1, x2)` for the spec's own inputs.
    pub fn true_joint(&self) -> Joint<f64> {
        self.joint_for_input(&self.input_joint())
    }

    /// `Q(x1, x2) W(y | x1, x2)` for an arbitrary input distribution.
    pub fn joint_for_input(&self, input: &[f64]) -> Joint<f64> {
        let y = self.alphabets.y;
        let probs = (0..self.alphabets.cells())
            .map(|c| input[c / y] * self.w[c])
            .collect();
        Joint::from_raw(self.alphabets, probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{metric_expectation, Axes};

    fn fig1() -> ChannelSpec {
        ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, false).unwrap()
    }

    #[test]
    fn adder_rows_are_distributions() {
        let s = fig1();
        assert_eq!(s.channel().len(), 12);
        assert!((s.channel()[0] - 0.98).abs() < 1e-15);
        assert!((s.channel()[11] - 0.4).abs() < 1e-15);
        let p = s.true_joint();
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_rows_and_metric_zeros() {
        let a = Alphabets::new(1, 1, 2).unwrap();
        let inputs = InputDistribution::Independent {
            q1: vec![1.0],
            q2: vec![1.0],
        };
        assert!(ChannelSpec::new(a, vec![0.5, 0.4], vec![1.0, 1.0], inputs.clone()).is_err());
        assert!(ChannelSpec::new(a, vec![0.5, 0.5], vec![1.0, 0.0], inputs).is_err());
    }

    #[test]
    fn mutual_information_chain_on_independent_inputs() {
        let p = fig1().true_joint();
        let lhs = p.mutual_info_x2_vs_x1y();
        let rhs = p.mutual_info_x2_y_given_x1();
        assert!(lhs > 0.0);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn metric_expectation_matches_brute_force() {
        let s = fig1();
        let p = s.true_joint();
        let mut brute = 0.0;
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y in 0..3 {
                    let d = 0.15;
                    let q = if y == x1 + x2 { 1.0 - 2.0 * d } else { d };
                    brute += 0.25 * s.channel()[(x1 * 2 + x2) * 3 + y] * f64::ln(q);
                }
            }
        }
        assert!((metric_expectation(&p, &s).unwrap() - brute).abs() < 1e-14);
    }

    #[test]
    fn matched_metric_expectation_is_negative_conditional_entropy() {
        let s = fig1().matched().unwrap();
        let p = s.true_joint();
        let h = p.entropy_of(Axes::ALL) - p.entropy_of(Axes::X1X2);
        assert!((metric_expectation(&p, &s).unwrap() + h).abs() < 1e-12);
    }

    #[test]
    fn unit_metric_expectation_is_zero() {
        let s = fig1().with_metric(vec![1.0; 12]).unwrap();
        assert_eq!(metric_expectation(&s.true_joint(), &s).unwrap(), 0.0);
    }

    #[test]
    fn cognitive_marginals() {
        let s = ChannelSpec::adder([[0.01, 0.1], [0.01, 0.3]], 0.15, true).unwrap();
        assert!(s.is_cognitive());
        assert_eq!(s.q1(), vec![0.5, 0.5]);
        assert_eq!(s.q2(), vec![0.5, 0.5]);
    }
}
