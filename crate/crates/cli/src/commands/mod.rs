pub mod exponent;
pub mod region;
pub mod simulate;
pub mod validate;

pub use exponent::run as exponent;
pub use region::run as region;
pub use simulate::run as simulate;
pub use validate::run as validate;

use mmac::regions::MacKind;
use mmac::ChannelSpec;
use serde::Serialize;

use crate::{RunConfig, RunOptions};

pub(crate) fn mac_kind(spec: &ChannelSpec) -> MacKind {
    if spec.is_cognitive() {
        MacKind::Cognitive
    } else {
        MacKind::Standard
    }
}

/// Companion metadata written next to every CSV.
#[derive(Serialize)]
pub(crate) struct Metadata<'a, T: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    pub name: &'a str,
    pub mac_kind: MacKind,
    pub seed: u64,
    pub units: &'static str,
    pub files: Vec<String>,
    pub details: T,
    pub config: &'a RunConfig,
}

impl<'a, T: Serialize> Metadata<'a, T> {
    pub fn new(
        command: &'static str,
        opts: &'a RunOptions,
        spec: &ChannelSpec,
        files: &[&str],
        details: T,
    ) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            name: &opts.config.name,
            mac_kind: mac_kind(spec),
            seed: opts.seed,
            units: opts.units.name(),
            files: files.iter().map(|f| f.to_string()).collect(),
            details,
            config: &opts.config,
        }
    }
}
