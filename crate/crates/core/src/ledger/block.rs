use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::merkle::{merkle_root, MerkleProof, MerkleTree};
use super::record::{DwRegistry, Report, ReportRecord};
use crate::bls::{batch_verify, verify, BatchItem};
use crate::crypto::hash::hash_parts;
use crate::crypto::{Digest32, SystemParams};
use crate::error::{Error, Result};
use crate::fe::{DetectionKeySet, TimestampPoints};

pub const GENESIS_PREV: Digest32 = [0u8; 32];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    #[serde(with = "crate::hexser")]
    pub prev_hash: Digest32,
    #[serde(with = "crate::hexser")]
    pub merkle_root: Digest32,
    /// Global slot counter; non-decreasing along the chain.
    pub timestamp: u64,
    /// Label `T_t` of the reporting slot.
    pub slot: String,
    #[serde(with = "crate::hexser")]
    pub hash: Digest32,
    pub records: Vec<ReportRecord>,
    /// Detection-key sets first referenced in this block.
    #[serde(default)]
    pub dw_sets: Vec<DetectionKeySet>,
}

fn dw_leaf(keys: &DetectionKeySet) -> Vec<u8> {
    let mut out = b"dw:".to_vec();
    out.extend_from_slice(&keys.digest());
    out.extend_from_slice(&keys.to_bytes());
    out
}

impl Block {
    /// Merkle leaves: records in order, then DW sets.
    pub fn leaves(&self) -> Vec<Vec<u8>> {
        self.records
            .iter()
            .map(|r| r.to_bytes())
            .chain(self.dw_sets.iter().map(dw_leaf))
            .collect()
    }

    pub fn compute_root(&self) -> Result<Digest32> {
        let leaves = self.leaves();
        let refs: Vec<&[u8]> = leaves.iter().map(|l| l.as_slice()).collect();
        merkle_root(&refs)
    }

    pub fn compute_hash(&self) -> Digest32 {
        hash_parts(
            b"petd/v1/block",
            &[
                &self.height.to_be_bytes(),
                &self.prev_hash,
                &self.merkle_root,
                &self.timestamp.to_be_bytes(),
                self.slot.as_bytes(),
            ],
        )
    }

    pub fn inclusion_proof(&self, record_index: usize) -> Result<MerkleProof> {
        self.tree()?.proof(record_index)
    }

    pub fn tree(&self) -> Result<MerkleTree> {
        let leaves = self.leaves();
        let refs: Vec<&[u8]> = leaves.iter().map(|l| l.as_slice()).collect();
        MerkleTree::new(&refs)
    }
}

/// Chain position a new block must extend.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainTip {
    pub height: u64,
    pub hash: Digest32,
    pub timestamp: u64,
}

impl ChainTip {
    pub fn genesis() -> Self {
        ChainTip {
            height: 0,
            hash: GENESIS_PREV,
            timestamp: 0,
        }
    }

    /// Tip after `block`; `height` is the next block's height.
    pub fn after(block: &Block) -> Self {
        ChainTip {
            height: block.height + 1,
            hash: block.hash,
            timestamp: block.timestamp,
        }
    }
}

fn first_bad_signature<'a>(
    params: &SystemParams,
    records: &[ReportRecord],
    lookup: impl Fn(&Digest32) -> Option<&'a DetectionKeySet>,
) -> Result<Option<usize>> {
    let msgs = records
        .iter()
        .map(|r| {
            let keys = lookup(&r.dw_ref).ok_or(Error::Signature { meter: r.meter })?;
            Ok(r.message_with(params, keys))
        })
        .collect::<Result<Vec<_>>>()?;
    let items: Vec<BatchItem<'_>> = records
        .iter()
        .zip(&msgs)
        .map(|(r, m)| BatchItem {
            pk: &r.pk,
            message: m,
            sig: &r.sig,
        })
        .collect();
    if batch_verify(&items)? {
        return Ok(None);
    }
    Ok(records
        .iter()
        .zip(&msgs)
        .position(|(r, m)| !verify(&r.pk, m, &r.sig))
        .or(Some(0)))
}

/// Miner side: checks the reports of one slot and assembles a block.
pub fn build_block(
    params: &SystemParams,
    tip: ChainTip,
    reports: &[Report],
    timestamp: u64,
    slot: &TimestampPoints,
    registry: &DwRegistry,
) -> Result<Block> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("block reports"));
    }
    if timestamp < tip.timestamp {
        return Err(Error::Range(format!(
            "block timestamp {timestamp} precedes tip {}",
            tip.timestamp
        )));
    }
    if TimestampPoints::derive(params, &slot.label).ts != slot.ts {
        return Err(Error::Range(format!("slot points do not match label {}", slot.label)));
    }
    let mut seen = BTreeSet::new();
    for r in reports {
        if r.ts.label != slot.label || r.ts.ts != slot.ts {
            return Err(Error::StaleTimestamp {
                meter: r.meter,
                expected: slot.label.clone(),
                got: r.ts.label.clone(),
            });
        }
        if !seen.insert(r.meter) {
            return Err(Error::Topology(format!("meter {} reported twice", r.meter)));
        }
    }
    let msgs: Vec<Vec<u8>> = reports.iter().map(|r| r.message()).collect();
    let items: Vec<BatchItem<'_>> = reports
        .iter()
        .zip(&msgs)
        .map(|(r, m)| BatchItem {
            pk: &r.pk,
            message: m,
            sig: &r.sig,
        })
        .collect();
    if !batch_verify(&items)? {
        let bad = reports
            .iter()
            .zip(&msgs)
            .find(|(r, m)| !verify(&r.pk, m, &r.sig))
            .map(|(r, _)| r.meter)
            .unwrap_or(reports[0].meter);
        return Err(Error::Signature { meter: bad });
    }

    let mut sorted: Vec<&Report> = reports.iter().collect();
    sorted.sort_by_key(|r| r.meter);
    let records: Vec<ReportRecord> = sorted.iter().map(|r| r.record()).collect();
    let mut dw_sets: Vec<DetectionKeySet> = Vec::new();
    let mut new_refs = BTreeSet::new();
    for r in &sorted {
        let d = r.dw.digest();
        if !registry.contains(&d) && new_refs.insert(d) {
            dw_sets.push(r.dw.clone());
        }
    }
    let mut block = Block {
        height: tip.height,
        prev_hash: tip.hash,
        merkle_root: [0u8; 32],
        timestamp,
        slot: slot.label.clone(),
        hash: [0u8; 32],
        records,
        dw_sets,
    };
    block.merkle_root = block.compute_root()?;
    block.hash = block.compute_hash();
    Ok(block)
}

/// Why a block failed its audit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditFailure {
    Height,
    PrevHash,
    Timestamp,
    MerkleRoot,
    Hash,
    Empty,
    SlotMismatch,
    UnknownDetectionKeys,
    BadSignature(crate::MeterId),
}

/// Full structural and cryptographic check of one block against the tip it
/// extends. `registry` holds the DW sets of all earlier blocks.
pub fn audit_block(
    params: &SystemParams,
    tip: &ChainTip,
    block: &Block,
    registry: &DwRegistry,
) -> std::result::Result<(), AuditFailure> {
    if block.height != tip.height {
        return Err(AuditFailure::Height);
    }
    if block.prev_hash != tip.hash {
        return Err(AuditFailure::PrevHash);
    }
    if block.timestamp < tip.timestamp {
        return Err(AuditFailure::Timestamp);
    }
    if block.hash != block.compute_hash() {
        return Err(AuditFailure::Hash);
    }
    match block.compute_root() {
        Ok(root) if root == block.merkle_root => {}
        Ok(_) => return Err(AuditFailure::MerkleRoot),
        Err(_) => return Err(AuditFailure::Empty),
    }
    if block.records.is_empty() {
        return Err(AuditFailure::Empty);
    }
    if block.records.iter().any(|r| r.ts != block.slot) {
        return Err(AuditFailure::SlotMismatch);
    }
    let fresh: HashMap<Digest32, &DetectionKeySet> =
        block.dw_sets.iter().map(|k| (k.digest(), k)).collect();
    let lookup = |d: &Digest32| fresh.get(d).copied().or_else(|| registry.get(d));
    if block.records.iter().any(|r| lookup(&r.dw_ref).is_none()) {
        return Err(AuditFailure::UnknownDetectionKeys);
    }
    match first_bad_signature(params, &block.records, lookup) {
        Ok(None) => Ok(()),
        Ok(Some(i)) => Err(AuditFailure::BadSignature(block.records[i].meter)),
        Err(_) => Err(AuditFailure::UnknownDetectionKeys),
    }
}
