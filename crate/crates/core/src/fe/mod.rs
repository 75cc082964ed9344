//! Inner-product functional encryption of meter readings.
//!
//! A meter with secret `s ∈ Z_q²` encrypts reading `r` at slot `t` as
//! `C = s·TS_t + r·g`, where `TS_t = H1(T_t) ∈ G²`. The miner removes
//! `DA·TS_t` from the product of all ciphertexts of a slot to obtain
//! `(Σ r)·g`; the operator removes `DW_c = Σ_t w_c[t]·(s·TS_t)` from
//! `Σ_t w_c[t]·C[t]` to obtain `(Σ_t w_c[t]·r[t])·g`. Both are finished by a
//! bounded discrete log.

pub mod dlog;
pub mod layer;

use serde::{Deserialize, Serialize};

use crate::crypto::hash::hash_parts;
use crate::crypto::{
    hash_to_point_pair, Digest32, FixedPointCodec, GroupPoint, Scalar, ScalarPair, SystemParams,
    POINT_BYTES,
};
use crate::error::{Error, Result};
use crate::secure_agg::AggregationKey;

pub use dlog::{bsgs_dlog, DlogSolver};
pub use layer::QuantizedFirstLayer;

/// `TS_t = H1(T_t)` for one reporting slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimestampPoints {
    pub ts: [GroupPoint; 2],
    pub label: String,
}

impl TimestampPoints {
    pub fn derive(params: &SystemParams, label: &str) -> Self {
        let (a, b) = hash_to_point_pair(params.h1_domain.as_bytes(), label.as_bytes());
        TimestampPoints {
            ts: [a, b],
            label: label.to_string(),
        }
    }

    pub fn to_bytes(&self) -> [u8; 2 * POINT_BYTES] {
        let mut out = [0u8; 2 * POINT_BYTES];
        out[..POINT_BYTES].copy_from_slice(&self.ts[0].to_bytes());
        out[POINT_BYTES..].copy_from_slice(&self.ts[1].to_bytes());
        out
    }

    /// `s^T · TS`.
    pub fn mask(&self, s: &ScalarPair) -> GroupPoint {
        GroupPoint::multiscalar_mul(s, &self.ts)
    }
}

/// Ciphertext `C_i[t]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CipherReading(pub GroupPoint);

impl CipherReading {
    pub fn to_bytes(&self) -> [u8; POINT_BYTES] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        GroupPoint::from_bytes(bytes).map(CipherReading)
    }
}

/// Detection keys `DW_i = {DW_1i, …, DW_ni}` for one detection period.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionKeySet {
    pub period: String,
    #[serde(with = "point_vec_hex")]
    pub dw: Vec<GroupPoint>,
}

impl DetectionKeySet {
    /// Concatenated 40-byte encodings, as carried in a report.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.dw.iter().flat_map(|p| p.to_bytes()).collect()
    }

    /// Reference digest stored in ledger records.
    pub fn digest(&self) -> Digest32 {
        hash_parts(b"petd/v1/dw", &[self.period.as_bytes(), &self.to_bytes()])
    }
}

/// `C = s^T·TS + r·g`.
pub fn encrypt_reading(
    secret: &ScalarPair,
    ts: &TimestampPoints,
    reading: i64,
    codec: &FixedPointCodec,
) -> Result<CipherReading> {
    if reading.abs() > codec.max_reading_units() {
        return Err(Error::Range(format!(
            "reading {reading} exceeds {} units",
            codec.max_reading_units()
        )));
    }
    let pts = [ts.ts[0], ts.ts[1], GroupPoint::generator()];
    let ks = [secret[0], secret[1], Scalar::from_i64(reading)];
    Ok(CipherReading(GroupPoint::multiscalar_mul(&ks, &pts)))
}

/// `Σ C_i − DA^T·TS`, which equals `(Σ r_i)·g` for honest inputs.
pub fn aggregate_point(
    ciphers: &[CipherReading],
    da: &AggregationKey,
    ts: &TimestampPoints,
) -> GroupPoint {
    let sum: GroupPoint = ciphers.iter().map(|c| c.0).sum();
    sum - ts.mask(&da.da)
}

/// Recovers the slot total `Σ r_i ∈ [0, bound]`.
pub fn decrypt_aggregate(
    ciphers: &[CipherReading],
    da: &AggregationKey,
    ts: &TimestampPoints,
    bound: u64,
) -> Result<i64> {
    if ciphers.is_empty() {
        return Err(Error::EmptyInput("ciphertexts"));
    }
    let bound = i64::try_from(bound).map_err(|_| Error::Range("bound too large".into()))?;
    bsgs_dlog(aggregate_point(ciphers, da, ts), GroupPoint::generator(), 0, bound)
}

/// `DW_c = Σ_t w_c[t]·(s^T·TS_t)` for `c = 1…n`.
pub fn gen_detection_keys(
    secret: &ScalarPair,
    layer: &QuantizedFirstLayer,
    period: &[TimestampPoints],
) -> Result<DetectionKeySet> {
    if period.len() != layer.d() {
        return Err(Error::Shape(format!(
            "detection period has {} slots, layer expects {}",
            period.len(),
            layer.d()
        )));
    }
    let masks: Vec<GroupPoint> = period.iter().map(|ts| ts.mask(secret)).collect();
    let dw = (0..layer.n())
        .map(|c| {
            let ks: Vec<Scalar> = layer.column(c).into_iter().map(Scalar::from_i64).collect();
            GroupPoint::multiscalar_mul(&ks, &masks)
        })
        .collect();
    Ok(DetectionKeySet {
        period: period_label(period),
        dw,
    })
}

/// Label of a detection period: first and last slot labels.
pub fn period_label(period: &[TimestampPoints]) -> String {
    match (period.first(), period.last()) {
        (Some(a), Some(b)) => format!("{}..{}", a.label, b.label),
        _ => String::new(),
    }
}

/// `Σ_t w_c[t]·C[t] − DW_c`, which equals `(Σ_t w_c[t]·r[t])·g`.
pub fn inner_product_point(
    ciphers: &[CipherReading],
    w_col: &[i64],
    dw_c: &GroupPoint,
) -> Result<GroupPoint> {
    if ciphers.len() != w_col.len() {
        return Err(Error::Shape(format!(
            "{} ciphertexts for a weight column of length {}",
            ciphers.len(),
            w_col.len()
        )));
    }
    let ks: Vec<Scalar> = w_col.iter().map(|&w| Scalar::from_i64(w)).collect();
    let pts: Vec<GroupPoint> = ciphers.iter().map(|c| c.0).collect();
    Ok(GroupPoint::multiscalar_mul(&ks, &pts) - *dw_c)
}

/// Recovers the signed inner product `Σ_t w_c[t]·r[t] ∈ [−bound, bound]`.
pub fn decrypt_inner_product(
    ciphers: &[CipherReading],
    w_col: &[i64],
    dw_c: &GroupPoint,
    signed_bound: i64,
) -> Result<i64> {
    let point = inner_product_point(ciphers, w_col, dw_c)?;
    let b = signed_bound.abs();
    bsgs_dlog(point, GroupPoint::generator(), -b, b)
}

/// All `n` first-layer products of one meter-day.
pub fn decrypt_first_layer(
    ciphers: &[CipherReading],
    layer: &QuantizedFirstLayer,
    keys: &DetectionKeySet,
    max_reading_units: i64,
) -> Result<Vec<i64>> {
    if keys.dw.len() != layer.n() {
        return Err(Error::Shape(format!(
            "{} detection keys for {} neurons",
            keys.dw.len(),
            layer.n()
        )));
    }
    let bound = layer.detection_bound(max_reading_units);
    (0..layer.n())
        .map(|c| decrypt_inner_product(ciphers, &layer.column(c), &keys.dw[c], bound))
        .collect()
}

mod point_vec_hex {
    use super::GroupPoint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[GroupPoint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|p| hex::encode(p.to_bytes())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<GroupPoint>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|h| {
                let bytes = hex::decode(h).map_err(serde::de::Error::custom)?;
                GroupPoint::from_bytes(&bytes).map_err(serde::de::Error::custom)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::scalar::pair_add;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn params() -> SystemParams {
        SystemParams::default()
    }

    fn random_pair(rng: &mut ChaCha20Rng) -> ScalarPair {
        [Scalar::random(rng), Scalar::random(rng)]
    }

    fn slots(d: usize) -> Vec<TimestampPoints> {
        (0..d)
            .map(|t| TimestampPoints::derive(&params(), &format!("2009-07-15/{t}")))
            .collect()
    }

    #[test]
    fn encryption_examples() {
        let codec = FixedPointCodec::default();
        let ts = TimestampPoints::derive(&params(), "2009-07-15T00:30");
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let s = random_pair(&mut rng);
        assert_eq!(encrypt_reading(&s, &ts, 0, &codec).unwrap().0, ts.mask(&s));
        let zero = [Scalar::ZERO; 2];
        assert_eq!(
            encrypt_reading(&zero, &ts, 7, &codec).unwrap().0,
            GroupPoint::generator() * Scalar::from_u64(7)
        );
        assert!(matches!(
            encrypt_reading(&s, &ts, 65_001, &codec),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn single_meter_round_trip() {
        let codec = FixedPointCodec::default();
        let ts = TimestampPoints::derive(&params(), "slot");
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let s = random_pair(&mut rng);
        let c = encrypt_reading(&s, &ts, 1234, &codec).unwrap();
        let da = AggregationKey { da: s };
        assert_eq!(decrypt_aggregate(&[c], &da, &ts, 65_000).unwrap(), 1234);
    }

    #[test]
    fn aggregate_examples() {
        let codec = FixedPointCodec::default();
        let ts = TimestampPoints::derive(&params(), "slot");
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let secrets: Vec<_> = (0..3).map(|_| random_pair(&mut rng)).collect();
        let da = AggregationKey {
            da: secrets.iter().fold([Scalar::ZERO; 2], |a, s| pair_add(a, *s)),
        };
        let enc = |rs: &[i64]| -> Vec<CipherReading> {
            secrets
                .iter()
                .zip(rs)
                .map(|(s, r)| encrypt_reading(s, &ts, *r, &codec).unwrap())
                .collect()
        };
        assert_eq!(decrypt_aggregate(&enc(&[0, 0, 0]), &da, &ts, 195_000).unwrap(), 0);
        assert_eq!(decrypt_aggregate(&enc(&[1, 2, 3]), &da, &ts, 195_000).unwrap(), 6);
        // A wrong key gives a point outside the window.
        let bad = AggregationKey { da: secrets[0] };
        assert!(matches!(
            decrypt_aggregate(&enc(&[1, 2, 3]), &bad, &ts, 195_000),
            Err(Error::DlogNotFound { .. })
        ));
    }

    #[test]
    fn homomorphism_identity_holds_pointwise() {
        let codec = FixedPointCodec::default();
        let ts = TimestampPoints::derive(&params(), "slot-h");
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..20 {
            let m = rng.gen_range(1..30);
            let secrets: Vec<_> = (0..m).map(|_| random_pair(&mut rng)).collect();
            let readings: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=65_000)).collect();
            let ciphers: Vec<_> = secrets
                .iter()
                .zip(&readings)
                .map(|(s, r)| encrypt_reading(s, &ts, *r, &codec).unwrap())
                .collect();
            let da = AggregationKey {
                da: secrets.iter().fold([Scalar::ZERO; 2], |a, s| pair_add(a, *s)),
            };
            let total: i64 = readings.iter().sum();
            assert_eq!(
                aggregate_point(&ciphers, &da, &ts),
                GroupPoint::generator() * Scalar::from_i64(total)
            );
        }
    }

    fn toy_layer(d: usize, n: usize, w: Vec<i64>) -> QuantizedFirstLayer {
        QuantizedFirstLayer::new(d, n, w, vec![0.0; n], FixedPointCodec::default()).unwrap()
    }

    #[test]
    fn detection_key_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let s = random_pair(&mut rng);
        let period = slots(3);
        let zero = toy_layer(3, 2, vec![0; 6]);
        let keys = gen_detection_keys(&s, &zero, &period).unwrap();
        assert!(keys.dw.iter().all(|p| p.is_identity()));

        let period2 = slots(2);
        let ones = toy_layer(2, 1, vec![1, 1]);
        let keys = gen_detection_keys(&s, &ones, &period2).unwrap();
        assert_eq!(keys.dw[0], period2[0].mask(&s) + period2[1].mask(&s));

        assert!(matches!(
            gen_detection_keys(&s, &ones, &period),
            Err(Error::Shape(_))
        ));
    }

    fn encrypt_day(s: &ScalarPair, period: &[TimestampPoints], r: &[i64]) -> Vec<CipherReading> {
        let codec = FixedPointCodec::default();
        period
            .iter()
            .zip(r)
            .map(|(ts, r)| encrypt_reading(s, ts, *r, &codec).unwrap())
            .collect()
    }

    #[test]
    fn inner_product_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let s = random_pair(&mut rng);
        let period = slots(2);
        let cases = [(vec![1, 2], vec![3, 4], 11), (vec![-1, 1], vec![5, 3], -2), (vec![0, 0], vec![9, 9], 0)];
        for (w, r, expect) in cases {
            let layer = toy_layer(2, 1, w.clone());
            let keys = gen_detection_keys(&s, &layer, &period).unwrap();
            let c = encrypt_day(&s, &period, &r);
            assert_eq!(decrypt_inner_product(&c, &w, &keys.dw[0], 100).unwrap(), expect);
        }
    }

    #[test]
    fn inner_product_outside_bound_is_not_found() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let s = random_pair(&mut rng);
        let period = slots(2);
        let layer = toy_layer(2, 1, vec![10, 10]);
        let keys = gen_detection_keys(&s, &layer, &period).unwrap();
        let c = encrypt_day(&s, &period, &[100, 100]);
        assert!(matches!(
            decrypt_inner_product(&c, &[10, 10], &keys.dw[0], 1000),
            Err(Error::DlogNotFound { .. })
        ));
        assert!(matches!(
            decrypt_inner_product(&c[..1], &[10, 10], &keys.dw[0], 1000),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn random_layers_recover_exact_products() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (d, n) = (12, 3);
        let period = slots(d);
        for _ in 0..5 {
            let s = random_pair(&mut rng);
            let w: Vec<i64> = (0..d * n).map(|_| rng.gen_range(-600..=600)).collect();
            let layer = toy_layer(d, n, w);
            let r: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=65_000)).collect();
            let keys = gen_detection_keys(&s, &layer, &period).unwrap();
            let c = encrypt_day(&s, &period, &r);
            let got = decrypt_first_layer(&c, &layer, &keys, 65_000).unwrap();
            assert_eq!(got, layer.integer_products(&r).unwrap());
        }
    }

    #[test]
    fn detection_key_digest_changes_with_content() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let period = slots(3);
        let layer = toy_layer(3, 2, vec![1, 2, 3, 4, 5, 6]);
        let a = gen_detection_keys(&random_pair(&mut rng), &layer, &period).unwrap();
        let b = gen_detection_keys(&random_pair(&mut rng), &layer, &period).unwrap();
        assert_ne!(a.digest(), b.digest());
        let json = serde_json::to_string(&a).unwrap();
        let back: DetectionKeySet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }
}
