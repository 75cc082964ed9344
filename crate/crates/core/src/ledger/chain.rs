use serde::{Deserialize, Serialize};

use super::block::{audit_block, Block, ChainTip};
use super::record::DwRegistry;
use crate::crypto::SystemParams;
use crate::error::{Error, Result};

pub const CHAIN_FILE_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Chain {
    pub version: u32,
    pub blocks: Vec<Block>,
    #[serde(skip)]
    registry: DwRegistry,
}

impl PartialEq for Chain {
    fn eq(&self, other: &Self) -> bool {
        self.version == other.version && self.blocks == other.blocks
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainStatus {
    Ok,
    BadHeight(u64),
}

impl Chain {
    pub fn new() -> Self {
        Chain {
            version: CHAIN_FILE_VERSION,
            blocks: Vec::new(),
            registry: DwRegistry::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn tip(&self) -> ChainTip {
        self.blocks
            .last()
            .map(ChainTip::after)
            .unwrap_or_else(ChainTip::genesis)
    }

    /// DW sets of every committed block.
    pub fn registry(&self) -> &DwRegistry {
        &self.registry
    }

    /// Appends a block that has already been agreed on.
    pub fn push(&mut self, block: Block) {
        for keys in &block.dw_sets {
            self.registry.insert(keys.clone());
        }
        self.blocks.push(block);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chain serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut chain: Chain =
            serde_json::from_str(text).map_err(|e| Error::Decode(format!("chain file: {e}")))?;
        if chain.version != CHAIN_FILE_VERSION {
            return Err(Error::Decode(format!(
                "unsupported chain file version {}",
                chain.version
            )));
        }
        for b in &chain.blocks {
            for keys in &b.dw_sets {
                chain.registry.insert(keys.clone());
            }
        }
        Ok(chain)
    }
}

/// Operator-side audit of a whole chain; reports the first failing position.
pub fn validate_chain(params: &SystemParams, chain: &Chain) -> ChainStatus {
    let mut tip = ChainTip::genesis();
    let mut registry = DwRegistry::new();
    for (i, block) in chain.blocks.iter().enumerate() {
        if audit_block(params, &tip, block, &registry).is_err() {
            return ChainStatus::BadHeight(i as u64);
        }
        for keys in &block.dw_sets {
            registry.insert(keys.clone());
        }
        tip = ChainTip::after(block);
    }
    ChainStatus::Ok
}
