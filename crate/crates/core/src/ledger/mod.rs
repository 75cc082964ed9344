//! Merkle-rooted ledger of signed encrypted reports, with simulated voting
//! consensus and miner election.

pub mod bench;
pub mod block;
pub mod chain;
pub mod consensus;
pub mod election;
pub mod merkle;
pub mod record;

pub use bench::{bench_block_time, BlockTimeRow};
pub use block::{audit_block, build_block, AuditFailure, Block, ChainTip};
pub use chain::{validate_chain, Chain, ChainStatus};
pub use consensus::{
    consensus_round, Behavior, ConsensusConfig, ConsensusOutcome, RoundVotes, Validator,
};
pub use election::{elect_miner, rotation_candidate, tally, Election};
pub use merkle::{merkle_proof, merkle_root, verify_proof, MerkleProof, MerkleTree};
pub use record::{report_message, DwRegistry, Report, ReportRecord};

#[cfg(test)]
mod tests;
