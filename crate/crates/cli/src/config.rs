//! Run configuration: a JSON document describing the channel, the metric,
//! the inputs and the parameters of each command.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use mmac::regions::DecoderKind;
use mmac::simulator::SimDecoder;
use mmac::{Alphabets, ChannelSpec, InputDistribution};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    pub channel: ChannelConfig,
    pub metric: MetricConfig,
    pub inputs: InputsConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub region: RegionTask,
    #[serde(default)]
    pub exponent: ExponentTask,
    #[serde(default)]
    pub simulate: SimulateTask,
    #[serde(default)]
    pub validate: ValidateTask,
    #[serde(default)]
    pub output: OutputConfig,
}

/// `W(y | x1, x2)` as a table indexed `[x1][x2][y]`, or the binary adder
/// family with crossover `deltas[x1][x2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    W(Vec<Vec<Vec<f64>>>),
    Adder { deltas: [[f64; 2]; 2] },
}

/// Decoding metric: a table like `W`, the adder family with a single
/// crossover `delta` (or per-input `deltas`), or the true channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricConfig {
    Q(Vec<Vec<Vec<f64>>>),
    Adder {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        deltas: Option<[[f64; 2]; 2]>,
    },
    Matched,
}

/// Either independent `q1`, `q2` (standard MAC) or a joint `q12[x1][x2]`
/// (cognitive MAC).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q12: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionTask {
    pub decoders: Vec<DecoderKind>,
    pub r2_step: f64,
    /// Upper end of the `R2` grid; defaults to `ln |X2|`.
    pub r2_max: Option<f64>,
    pub convex_hull: bool,
}

impl Default for RegionTask {
    fn default() -> Self {
        Self {
            decoders: vec![DecoderKind::Successive, DecoderKind::MaxMetric],
            r2_step: 0.005,
            r2_max: None,
            convex_hull: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentTask {
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub outer_denominator: usize,
    pub refine: bool,
}

impl Default for ExponentTask {
    fn default() -> Self {
        let grid = |k: usize| (0..k).map(|i| i as f64 * 0.1).collect();
        Self {
            r1: grid(6),
            r2: grid(5),
            outer_denominator: 12,
            refine: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Exact enumeration when within budget, Monte Carlo otherwise.
    Auto,
    Exact,
    MonteCarlo,
    /// Exact error probabilities of several codebooks, with the identities
    /// relating the decoders checked.
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookKind {
    /// One codebook drawn from the seed and kept for all trials.
    Fixed,
    /// A fresh codebook for every trial.
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateTask {
    pub n: Vec<usize>,
    /// Codebook sizes; when absent they follow from the rates as `ceil(e^{nR})`.
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub mode: SimMode,
    pub codebook: CodebookKind,
    pub trials: u64,
    pub decoders: Vec<SimDecoder>,
    /// Number of codebooks in check mode.
    pub codebooks: usize,
}

impl Default for SimulateTask {
    fn default() -> Self {
        Self {
            n: vec![4],
            m1: None,
            m2: None,
            r1: None,
            r2: None,
            mode: SimMode::Auto,
            codebook: CodebookKind::Fixed,
            trials: 10_000,
            decoders: SimDecoder::ALL.to_vec(),
            codebooks: 20,
        }
    }
}

impl SimulateTask {
    /// Codebook sizes at blocklength `n`.
    pub fn sizes(&self, n: usize) -> (usize, usize) {
        let size = |m: Option<usize>, r: Option<f64>| match (m, r) {
            (Some(m), _) => m,
            (None, Some(r)) => ((n as f64 * r).exp() - 1e-9).ceil().max(1.0) as usize,
            (None, None) => 2,
        };
        (size(self.m1, self.r1), size(self.m2, self.r2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateTask {
    pub denominators: Vec<usize>,
    pub r2: Vec<f64>,
    /// Blocklength and number of codebooks of the exact simulation checks.
    pub exact_n: usize,
    pub codebooks: usize,
}

impl Default for ValidateTask {
    fn default() -> Self {
        Self {
            denominators: vec![8, 12, 16],
            r2: vec![0.0, 0.2, 0.4],
            exact_n: 4,
            codebooks: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

fn table(rows: &[Vec<Vec<f64>>], what: &str) -> Result<(Alphabets, Vec<f64>)> {
    let x1 = rows.len();
    let x2 = rows.first().map_or(0, Vec::len);
    let y = rows.first().and_then(|r| r.first()).map_or(0, Vec::len);
    ensure!(
        rows.iter()
            .all(|r| r.len() == x2 && r.iter().all(|c| c.len() == y)),
        "{what} table is not rectangular"
    );
    let alphabets = Alphabets::new(x1, x2, y).with_context(|| format!("{what} table"))?;
    Ok((
        alphabets,
        rows.iter().flatten().flatten().copied().collect(),
    ))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("parsing configuration")?;
        cfg.channel_spec()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn channel_spec(&self) -> Result<ChannelSpec> {
        let (alphabets, w) = match &self.channel {
            ChannelConfig::W(rows) => table(rows, "W")?,
            ChannelConfig::Adder { deltas } => (
                Alphabets::new(2, 2, 3)?,
                ChannelSpec::adder_channel(*deltas)?,
            ),
        };
        let q = match &self.metric {
            MetricConfig::Q(rows) => {
                let (a, q) = table(rows, "q")?;
                ensure!(a == alphabets, "q and W have different shapes");
                q
            }
            MetricConfig::Adder { delta, deltas } => {
                ensure!(
                    alphabets == Alphabets::new(2, 2, 3)?,
                    "the adder metric needs binary inputs and a ternary output"
                );
                let deltas = match (delta, deltas) {
                    (Some(d), None) => [[*d; 2]; 2],
                    (None, Some(ds)) => *ds,
                    _ => bail!("the adder metric takes exactly one of delta or deltas"),
                };
                ChannelSpec::adder_channel(deltas)?
            }
            MetricConfig::Matched => w.clone(),
        };
        let i = &self.inputs;
        let inputs = match (&i.q1, &i.q2, &i.q12) {
            (Some(q1), Some(q2), None) => InputDistribution::Independent {
                q1: q1.clone(),
                q2: q2.clone(),
            },
            (None, None, Some(q12)) => {
                ensure!(
                    q12.len() == alphabets.x1 && q12.iter().all(|r| r.len() == alphabets.x2),
                    "q12 must be a {} x {} table",
                    alphabets.x1,
                    alphabets.x2
                );
                InputDistribution::Joint {
                    q12: q12.iter().flatten().copied().collect(),
                }
            }
            _ => bail!("inputs need either q1 and q2, or q12"),
        };
        Ok(ChannelSpec::new(alphabets, w, q, inputs)?)
    }
}
