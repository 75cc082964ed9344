use super::bench::synthetic_reports;
use super::*;
use crate::bls::Signature;
use crate::crypto::{GroupPoint, SystemParams};
use crate::error::Error;
use crate::fe::{CipherReading, TimestampPoints};
use crate::MeterId;

fn params() -> SystemParams {
    SystemParams::default()
}

fn slot(i: u64) -> TimestampPoints {
    TimestampPoints::derive(&params(), &format!("2009-07-15/slot{i}"))
}

fn build_chain(blocks: u64, meters: usize) -> Chain {
    let p = params();
    let mut chain = Chain::new();
    for b in 0..blocks {
        let ts = slot(b);
        let reports = synthetic_reports(&p, meters, &ts, 100 + b).unwrap();
        let block = build_block(&p, chain.tip(), &reports, b + 1, &ts, chain.registry()).unwrap();
        chain.push(block);
    }
    chain
}

#[test]
fn builds_block_from_valid_reports() {
    let p = params();
    let ts = slot(0);
    let reports = synthetic_reports(&p, 200, &ts, 1).unwrap();
    let block = build_block(&p, ChainTip::genesis(), &reports, 1, &ts, &DwRegistry::new()).unwrap();
    assert_eq!(block.records.len(), 200);
    assert_eq!(block.dw_sets.len(), 200);
    assert!(audit_block(&p, &ChainTip::genesis(), &block, &DwRegistry::new()).is_ok());
}

#[test]
fn flipped_cipher_names_the_meter() {
    let p = params();
    let ts = slot(0);
    let mut reports = synthetic_reports(&p, 12, &ts, 2).unwrap();
    reports[7].cipher = CipherReading(reports[7].cipher.0 + GroupPoint::generator());
    let err = build_block(&p, ChainTip::genesis(), &reports, 1, &ts, &DwRegistry::new());
    assert_eq!(err.unwrap_err(), Error::Signature { meter: reports[7].meter });
}

#[test]
fn stale_and_empty_inputs() {
    let p = params();
    let old = slot(0);
    let now = slot(1);
    let reports = synthetic_reports(&p, 3, &old, 3).unwrap();
    assert!(matches!(
        build_block(&p, ChainTip::genesis(), &reports, 2, &now, &DwRegistry::new()),
        Err(Error::StaleTimestamp { .. })
    ));
    assert!(matches!(
        build_block(&p, ChainTip::genesis(), &[], 2, &now, &DwRegistry::new()),
        Err(Error::EmptyInput(_))
    ));
}

fn honest_validators(block: &Block) -> Vec<Validator> {
    block
        .records
        .iter()
        .map(|r| Validator::honest(r.meter, Some(r.clone())))
        .collect()
}

#[test]
fn consensus_examples() {
    let p = params();
    let ts = slot(0);
    let reports = synthetic_reports(&p, 12, &ts, 4).unwrap();
    let reg = DwRegistry::new();
    let tip = ChainTip::genesis();
    let block = build_block(&p, tip, &reports, 1, &ts, &reg).unwrap();
    let cfg = ConsensusConfig::default();
    let vals = honest_validators(&block);

    let out = consensus_round(&p, &tip, &reg, &block, &vals, &cfg).unwrap();
    match out {
        ConsensusOutcome::Committed { rounds } => assert_eq!(rounds.len(), 1),
        other => panic!("{other:?}"),
    }

    // Miner rewrites one record after it was signed.
    let mut tampered = block.clone();
    tampered.records[4].cipher = CipherReading(tampered.records[4].cipher.0 + GroupPoint::generator());
    tampered.merkle_root = tampered.compute_root().unwrap();
    tampered.hash = tampered.compute_hash();
    match consensus_round(&p, &tip, &reg, &tampered, &vals, &cfg).unwrap() {
        ConsensusOutcome::Rejected { dissenters, .. } => assert_eq!(dissenters.len(), 12),
        other => panic!("{other:?}"),
    }

    // ceil(m/4) byzantine validators against an honest block.
    let mut vals_b = vals.clone();
    for v in vals_b.iter_mut().take(3) {
        v.behavior = Behavior::AlwaysDissent;
    }
    assert!(consensus_round(&p, &tip, &reg, &block, &vals_b, &cfg)
        .unwrap()
        .is_committed());

    // A majority dissenting once is overcome by the retry.
    let mut vals_c = vals.clone();
    for v in vals_c.iter_mut().take(8) {
        v.behavior = Behavior::DissentOnce;
    }
    match consensus_round(&p, &tip, &reg, &block, &vals_c, &cfg).unwrap() {
        ConsensusOutcome::Committed { rounds } => assert_eq!(rounds.len(), 2),
        other => panic!("{other:?}"),
    }

    // Persistent dissent beyond a third rejects.
    let mut vals_d = vals;
    for v in vals_d.iter_mut().take(5) {
        v.behavior = Behavior::AlwaysDissent;
    }
    assert!(!consensus_round(&p, &tip, &reg, &block, &vals_d, &cfg)
        .unwrap()
        .is_committed());
}

#[test]
fn quorum_counts() {
    let cfg = ConsensusConfig::default();
    for m in (3..=400usize).filter(|m| *m != 5) {
        let byz = m.div_ceil(4);
        assert!(m - byz >= cfg.required(m), "m={m}");
    }
    // Rounding up both quantities breaks the margin only for these sizes.
    for m in [1usize, 2, 5] {
        assert!(m - m.div_ceil(4) < cfg.required(m), "m={m}");
    }
    assert_eq!(cfg.required(3), 2);
    assert_eq!(cfg.required(4), 3);
    assert!(ConsensusConfig::new(num_rational::Ratio::new(1, 2), 1).is_err());
}

#[test]
fn validator_detects_omitted_own_record() {
    let p = params();
    let ts = slot(0);
    let reports = synthetic_reports(&p, 5, &ts, 5).unwrap();
    let reg = DwRegistry::new();
    let tip = ChainTip::genesis();
    let full = build_block(&p, tip, &reports, 1, &ts, &reg).unwrap();
    let partial = build_block(&p, tip, &reports[1..], 1, &ts, &reg).unwrap();
    let vals = honest_validators(&full);
    match consensus_round(&p, &tip, &reg, &partial, &vals, &ConsensusConfig::new(num_rational::Ratio::new(1, 1), 1).unwrap()).unwrap() {
        ConsensusOutcome::Rejected { dissenters, .. } => {
            assert_eq!(dissenters, vec![reports[0].meter])
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn chain_validation() {
    let p = params();
    assert_eq!(validate_chain(&p, &Chain::new()), ChainStatus::Ok);
    let chain = build_chain(10, 3);
    assert_eq!(validate_chain(&p, &chain), ChainStatus::Ok);

    let mut bad = chain.clone();
    bad.blocks[5].records[1].cipher =
        CipherReading(bad.blocks[5].records[1].cipher.0 + GroupPoint::generator());
    assert_eq!(validate_chain(&p, &bad), ChainStatus::BadHeight(5));

    let mut bad = chain.clone();
    bad.blocks[5].timestamp += 1;
    assert_eq!(validate_chain(&p, &bad), ChainStatus::BadHeight(5));

    let mut bad = chain;
    bad.blocks[7].records[0].sig = Signature(bad.blocks[7].records[1].sig.0);
    assert_eq!(validate_chain(&p, &bad), ChainStatus::BadHeight(7));
}

#[test]
fn chain_json_round_trip_and_replay() {
    let a = build_chain(3, 4);
    let b = build_chain(3, 4);
    assert_eq!(a.to_json(), b.to_json());
    let back = Chain::from_json(&a.to_json()).unwrap();
    assert_eq!(back, a);
    assert_eq!(validate_chain(&params(), &back), ChainStatus::Ok);
    assert!(Chain::from_json("{\"version\": 9, \"blocks\": []}").is_err());
}

#[test]
fn inclusion_proofs_match_root() {
    let chain = build_chain(1, 9);
    let block = &chain.blocks[0];
    for (i, r) in block.records.iter().enumerate() {
        let proof = block.inclusion_proof(i).unwrap();
        assert!(verify_proof(&block.merkle_root, &r.to_bytes(), &proof));
    }
}

#[test]
fn bench_guards() {
    let p = params();
    assert!(matches!(bench_block_time(&p, &[5], 0, 1), Err(Error::Misuse(_))));
    let rows = bench_block_time(&p, &[2, 4], 1, 1).unwrap();
    assert_eq!(rows.len(), 2);
    let _ = MeterId(0);
}
