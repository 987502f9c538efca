//! Achievable rate regions and random-coding error exponents for the
//! discrete memoryless multiple-access channel under a mismatched decoding
//! metric, for multi-letter successive decoding and maximum-metric decoding,
//! together with exact and Monte-Carlo simulation of the decoders.
//!
//! Rates and exponents are in nats throughout.

pub mod error;
pub mod exponents;
pub mod oracle;
pub mod prob;
pub mod regions;
pub mod simulator;
pub mod solver;

pub use error::{MmacError, Result};
pub use prob::{Alphabets, Axes, ChannelSpec, Composition, InputDistribution, JointType, Real};

/// Joint distribution on `X1 x X2 x Y` in double precision.
pub type JointDist = prob::Joint<f64>;
/// Joint distribution on `X1 x X2 x Y` in single precision.
pub type JointDist32 = prob::Joint<f32>;
