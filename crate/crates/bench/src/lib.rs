//! Shared fixtures for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use petd_core::crypto::Scalar;
use petd_core::fe::{encrypt_reading, CipherReading, TimestampPoints};
use petd_core::secure_agg::{setup_area_key, AggregationKey, MeterSecret};
use petd_core::{MeterId, SystemParams};

/// One slot of an `m`-meter area: ciphertexts, the aggregation key and the
/// slot points.
pub struct SlotFixture {
    pub ciphers: Vec<CipherReading>,
    pub da: AggregationKey,
    pub ts: TimestampPoints,
    pub total: i64,
}

pub fn slot_fixture(params: &SystemParams, m: u32, seed: u64) -> SlotFixture {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let secrets: std::collections::BTreeMap<MeterId, MeterSecret> =
        (1..=m).map(|i| (MeterId(i), MeterSecret::generate(&mut rng))).collect();
    let da = setup_area_key(&secrets).expect("area key");
    let ts = TimestampPoints::derive(params, "2009-07-15T12:00");
    let mut total = 0;
    let ciphers = secrets
        .values()
        .map(|s| {
            let r = rng.gen_range(0..=params.codec.max_reading_units());
            total += r;
            encrypt_reading(&s.s, &ts, r, &params.codec).expect("reading in range")
        })
        .collect();
    SlotFixture { ciphers, da, ts, total }
}

pub fn random_scalars(n: usize, seed: u64) -> Vec<Scalar> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| Scalar::random(&mut rng)).collect()
}
