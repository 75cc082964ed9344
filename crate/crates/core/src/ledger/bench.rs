use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::block::{build_block, ChainTip};
use super::consensus::{consensus_round, ConsensusConfig, Validator};
use super::record::{DwRegistry, Report};
use crate::bls::SigningKey;
use crate::crypto::{FixedPointCodec, Scalar, SystemParams};
use crate::error::{Error, Result};
use crate::fe::{encrypt_reading, gen_detection_keys, QuantizedFirstLayer, TimestampPoints};
use crate::MeterId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockTimeRow {
    pub meters: usize,
    pub mean_secs: f64,
    /// Coefficient of variation over the trials.
    pub cv: f64,
}

/// Signed reports of `n` synthetic meters for one slot.
pub fn synthetic_reports(
    params: &SystemParams,
    n: usize,
    slot: &TimestampPoints,
    seed: u64,
) -> Result<Vec<Report>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = 48;
    let n_dw = 10;
    let w: Vec<i64> = (0..d * n_dw).map(|_| rng.gen_range(-512..=512)).collect();
    let layer = QuantizedFirstLayer::new(d, n_dw, w, vec![0.0; n_dw], FixedPointCodec::default())?;
    let period: Vec<TimestampPoints> = (0..d)
        .map(|t| TimestampPoints::derive(params, &format!("bench/{t}")))
        .collect();
    (0..n)
        .map(|i| {
            let sk = SigningKey::generate(&mut rng);
            let s = [Scalar::random(&mut rng), Scalar::random(&mut rng)];
            let dw = gen_detection_keys(&s, &layer, &period)?;
            let r = rng.gen_range(0..=params.codec.max_reading_units());
            let c = encrypt_reading(&s, slot, r, &params.codec)?;
            Ok(Report::sign(MeterId(i as u32 + 1), &sk, c, slot.clone(), dw))
        })
        .collect()
}

/// Wall-clock of `build_block` plus `consensus_round` for each meter count.
pub fn bench_block_time(
    params: &SystemParams,
    meters: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<BlockTimeRow>> {
    if trials == 0 {
        return Err(Error::Misuse("block-time bench with zero trials"));
    }
    let slot = TimestampPoints::derive(params, "bench-slot");
    let cfg = ConsensusConfig::default();
    let mut rows = Vec::with_capacity(meters.len());
    for &n in meters {
        if !(1..=1000).contains(&n) {
            return Err(Error::Range(format!("meter count {n} outside [1, 1000]")));
        }
        let reports = synthetic_reports(params, n, &slot, seed ^ n as u64)?;
        let validators: Vec<Validator> = reports
            .iter()
            .map(|r| Validator::honest(r.meter, Some(r.record())))
            .collect();
        let registry = DwRegistry::new();
        let tip = ChainTip::genesis();
        let mut samples = Vec::with_capacity(trials);
        for _ in 0..trials {
            let start = Instant::now();
            let block = build_block(params, tip, &reports, 1, &slot, &registry)?;
            let outcome = consensus_round(params, &tip, &registry, &block, &validators, &cfg)?;
            samples.push(start.elapsed().as_secs_f64());
            if !outcome.is_committed() {
                return Err(Error::Misuse("honest bench block was rejected"));
            }
        }
        let mean = samples.iter().sum::<f64>() / trials as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / trials as f64;
        rows.push(BlockTimeRow {
            meters: n,
            mean_secs: mean,
            cv: if mean > 0.0 { var.sqrt() / mean } else { 0.0 },
        });
    }
    Ok(rows)
}
