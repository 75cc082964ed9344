pub mod bls;
pub mod crypto;
pub mod detector;
pub mod error;
pub mod fe;
pub mod grid;
pub(crate) mod hexser;
pub mod ledger;
pub mod secure_agg;

pub use crypto::{FixedPointCodec, SystemParams};
pub use error::{Error, Result};
pub use grid::{PeriodReport, SimConfig, Verdict};
pub use ledger::Chain;

use serde::{Deserialize, Serialize};

/// Identifier of a smart meter within the whole grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeterId(pub u32);

impl std::fmt::Display for MeterId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
