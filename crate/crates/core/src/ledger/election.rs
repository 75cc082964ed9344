//! Miner election by deterministic rotation with recorded votes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::MeterId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Election {
    pub epoch: u64,
    pub miner: MeterId,
    /// `(voter, candidate)` in voter order.
    pub votes: Vec<(MeterId, MeterId)>,
}

/// The rotation candidate: ids sorted ascending, start at `epoch mod m`, skip
/// meters that failed as miner before.
pub fn rotation_candidate(
    meter_ids: &[MeterId],
    epoch: u64,
    failed: &BTreeSet<MeterId>,
) -> Result<MeterId> {
    let ids: Vec<MeterId> = meter_ids
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if ids.is_empty() {
        return Err(Error::EmptyInput("meter ids"));
    }
    let start = (epoch % ids.len() as u64) as usize;
    (0..ids.len())
        .map(|k| ids[(start + k) % ids.len()])
        .find(|id| !failed.contains(id))
        .ok_or(Error::NoCandidate)
}

/// Winner of a strict majority over all `meter_ids`, if any.
pub fn tally(votes: &[(MeterId, MeterId)], meter_ids: &[MeterId]) -> Option<MeterId> {
    let eligible: BTreeSet<MeterId> = meter_ids.iter().copied().collect();
    let mut counted = BTreeSet::new();
    let mut counts: BTreeMap<MeterId, usize> = BTreeMap::new();
    for (voter, cand) in votes {
        if eligible.contains(voter) && eligible.contains(cand) && counted.insert(*voter) {
            *counts.entry(*cand).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .find(|(_, c)| 2 * c > eligible.len())
        .map(|(id, _)| id)
}

/// Every meter votes for the rotation candidate; the tally must confirm it.
pub fn elect_miner(
    meter_ids: &[MeterId],
    epoch: u64,
    failed: &BTreeSet<MeterId>,
) -> Result<Election> {
    let miner = rotation_candidate(meter_ids, epoch, failed)?;
    let voters: BTreeSet<MeterId> = meter_ids.iter().copied().collect();
    let votes: Vec<(MeterId, MeterId)> = voters.iter().map(|v| (*v, miner)).collect();
    debug_assert_eq!(tally(&votes, meter_ids), Some(miner));
    Ok(Election {
        epoch,
        miner,
        votes,
    })
}
