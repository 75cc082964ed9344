//! Synchronous approve/dissent voting on a proposed block.
//!
//! Every honest validator runs the same deterministic block audit, so it is
//! computed once per round and shared; each validator then checks the
//! inclusion proof of its own record against the root it is asked to approve.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::block::{audit_block, AuditFailure, Block, ChainTip};
use super::merkle::{verify_proof, MerkleTree};
use super::record::{DwRegistry, ReportRecord};
use crate::crypto::SystemParams;
use crate::error::{Error, Result};
use crate::MeterId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsensusConfig {
    /// Fraction of validators that must approve, as `"num/den"`.
    #[serde(with = "ratio_text")]
    pub quorum: Ratio<u64>,
    pub max_retries: u32,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        ConsensusConfig {
            quorum: Ratio::new(2, 3),
            max_retries: 1,
        }
    }
}

impl ConsensusConfig {
    pub fn new(quorum: Ratio<u64>, max_retries: u32) -> Result<Self> {
        let cfg = ConsensusConfig {
            quorum,
            max_retries,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let half = Ratio::new(1, 2);
        if self.quorum <= half || self.quorum > Ratio::from_integer(1) {
            return Err(Error::Range(format!(
                "quorum {} must lie in (1/2, 1]",
                self.quorum
            )));
        }
        Ok(())
    }

    /// Smallest approval count reaching the quorum among `m` validators.
    pub fn required(&self, m: usize) -> usize {
        (self.quorum * Ratio::from_integer(m as u64)).ceil().to_integer() as usize
    }
}

mod ratio_text {
    use num_rational::Ratio;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<u64>, D::Error> {
        let text = String::deserialize(d)?;
        let (n, den) = text
            .split_once('/')
            .ok_or_else(|| de::Error::custom("quorum must be written as num/den"))?;
        let n: u64 = n.trim().parse().map_err(de::Error::custom)?;
        let den: u64 = den.trim().parse().map_err(de::Error::custom)?;
        if den == 0 {
            return Err(de::Error::custom("quorum denominator is zero"));
        }
        Ok(Ratio::new(n, den))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Behavior {
    Honest,
    /// Votes no on every round.
    AlwaysDissent,
    /// Votes no on the first round only.
    DissentOnce,
}

#[derive(Clone, Debug)]
pub struct Validator {
    pub id: MeterId,
    pub behavior: Behavior,
    /// The record this meter submitted for the slot, if any.
    pub own_record: Option<ReportRecord>,
}

impl Validator {
    pub fn honest(id: MeterId, own_record: Option<ReportRecord>) -> Self {
        Validator {
            id,
            behavior: Behavior::Honest,
            own_record,
        }
    }

    fn own_record_included(&self, block: &Block, tree: Option<&MerkleTree>) -> bool {
        let Some(own) = &self.own_record else {
            return true;
        };
        let Some(idx) = block.records.iter().position(|r| r.meter == self.id) else {
            return false;
        };
        if &block.records[idx] != own {
            return false;
        }
        let Some(tree) = tree else {
            return false;
        };
        match tree.proof(idx) {
            Ok(proof) => verify_proof(&block.merkle_root, &own.to_bytes(), &proof),
            Err(_) => false,
        }
    }

    fn vote(&self, round: u32, audit_ok: bool, block: &Block, tree: Option<&MerkleTree>) -> bool {
        match self.behavior {
            Behavior::AlwaysDissent => false,
            Behavior::DissentOnce if round == 1 => false,
            _ => audit_ok && self.own_record_included(block, tree),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundVotes {
    pub round: u32,
    pub approvals: usize,
    pub dissenters: Vec<MeterId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConsensusOutcome {
    Committed {
        rounds: Vec<RoundVotes>,
    },
    Rejected {
        rounds: Vec<RoundVotes>,
        /// Dissenters of the final round.
        dissenters: Vec<MeterId>,
        audit: Option<AuditFailure>,
    },
}

impl ConsensusOutcome {
    pub fn is_committed(&self) -> bool {
        matches!(self, ConsensusOutcome::Committed { .. })
    }
}

/// Runs up to `1 + max_retries` voting rounds on `block`.
pub fn consensus_round(
    params: &SystemParams,
    tip: &ChainTip,
    registry: &DwRegistry,
    block: &Block,
    validators: &[Validator],
    cfg: &ConsensusConfig,
) -> Result<ConsensusOutcome> {
    if validators.is_empty() {
        return Err(Error::EmptyInput("validators"));
    }
    cfg.validate()?;
    let audit = audit_block(params, tip, block, registry);
    let audit_ok = audit.is_ok();
    let tree = block.tree().ok();
    let need = cfg.required(validators.len());
    let mut rounds = Vec::new();
    for round in 1..=cfg.max_retries + 1 {
        let dissenters: Vec<MeterId> = validators
            .iter()
            .filter(|v| !v.vote(round, audit_ok, block, tree.as_ref()))
            .map(|v| v.id)
            .collect();
        let approvals = validators.len() - dissenters.len();
        rounds.push(RoundVotes {
            round,
            approvals,
            dissenters: dissenters.clone(),
        });
        if approvals >= need {
            return Ok(ConsensusOutcome::Committed { rounds });
        }
        if round == cfg.max_retries + 1 {
            return Ok(ConsensusOutcome::Rejected {
                rounds,
                dissenters,
                audit: audit.err(),
            });
        }
    }
    unreachable!("the final round always returns")
}
