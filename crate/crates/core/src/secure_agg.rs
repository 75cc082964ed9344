//! Pairwise-mask secure aggregation of the meters' encryption secrets.
//!
//! Every pair of meters `(u, v)` agrees on a mask via Diffie-Hellman on the
//! plain group. Meter `i` publishes `y_i = s_i + Σ_{o > i} m_{i,o} − Σ_{o < i} m_{o,i}`,
//! so the masks cancel in `Σ y_i = Σ s_i`, the area decryption key.
//!
//! There is no dropout recovery: a missing share aborts the key setup.

use std::collections::{BTreeMap, BTreeSet};

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::crypto::hash::expand64;
use crate::crypto::scalar::{pair_add, pair_sub};
use crate::crypto::plain::PointTable;
use crate::crypto::{GroupPoint, Scalar, ScalarPair, POINT_BYTES};
use crate::error::{Error, Result};
use crate::MeterId;

const MASK_DOMAIN: [&[u8]; 2] = [b"petd/v1/KA/mask/0", b"petd/v1/KA/mask/1"];

/// A meter's long-term secrets: `x` for signing and key agreement, `s` for
/// encryption.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MeterSecret {
    pub x: Scalar,
    pub s: ScalarPair,
}

impl MeterSecret {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let x = Scalar::random_nonzero(rng);
        let s = [Scalar::random(rng), Scalar::random(rng)];
        MeterSecret { x, s }
    }

    pub fn agreement_public(&self) -> AgreementPublicKey {
        AgreementPublicKey(GroupPoint::mul_generator(&self.x))
    }
}

/// `x·g` on the plain group.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AgreementPublicKey(pub GroupPoint);

/// Blinded secret `y_i` sent to the miner.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MaskShare {
    pub y: ScalarPair,
}

/// `DA = Σ s_i`, the key that decrypts area totals.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AggregationKey {
    pub da: ScalarPair,
}

/// Samples an agreement key pair.
pub fn ka_gen<R: RngCore + CryptoRng>(rng: &mut R) -> (Scalar, AgreementPublicKey) {
    let x = Scalar::random_nonzero(rng);
    (x, AgreementPublicKey(GroupPoint::mul_generator(&x)))
}

/// Derives the pairwise mask `H(x_u · x_v g)` as two scalars.
pub fn ka_agree(my_secret: &Scalar, their_public: &AgreementPublicKey) -> Result<ScalarPair> {
    if my_secret.is_zero() {
        return Err(Error::Range("zero agreement secret".into()));
    }
    if their_public.0.is_identity() {
        return Err(Error::Decode("agreement public key is the identity".into()));
    }
    Ok(mask_from_shared(&(their_public.0 * *my_secret).to_bytes()))
}

fn mask_from_shared(shared: &[u8; POINT_BYTES]) -> ScalarPair {
    MASK_DOMAIN.map(|d| Scalar::from_bytes_wide(&expand64(d, &[shared])))
}

/// A fixed-base table costs about as much as this many multiplications.
const TABLE_MIN_USES: usize = 64;

fn check_roster(roster: &[MeterId]) -> Result<BTreeSet<MeterId>> {
    let set: BTreeSet<MeterId> = roster.iter().copied().collect();
    if set.len() != roster.len() {
        return Err(Error::Topology("duplicate meter id in roster".into()));
    }
    if set.is_empty() {
        return Err(Error::Topology("empty roster".into()));
    }
    Ok(set)
}

/// Computes `y = s + Σ_{o > me} mask − Σ_{o < me} mask`.
///
/// `peer_masks` must hold exactly one mask for every other member of
/// `roster`.
pub fn blind_share(
    me: MeterId,
    s: &ScalarPair,
    peer_masks: &[(MeterId, ScalarPair)],
    roster: &[MeterId],
) -> Result<MaskShare> {
    let members = check_roster(roster)?;
    if !members.contains(&me) {
        return Err(Error::Topology(format!("meter {me} is not in the roster")));
    }
    let mut seen = BTreeSet::new();
    let mut y = *s;
    for (peer, mask) in peer_masks {
        if *peer == me || !members.contains(peer) {
            return Err(Error::Topology(format!("unexpected peer {peer} for meter {me}")));
        }
        if !seen.insert(*peer) {
            return Err(Error::Topology(format!("duplicate peer {peer} for meter {me}")));
        }
        y = if *peer > me {
            pair_add(y, *mask)
        } else {
            pair_sub(y, *mask)
        };
    }
    if seen.len() + 1 != members.len() {
        let missing: Vec<String> = members
            .iter()
            .filter(|m| **m != me && !seen.contains(m))
            .map(|m| m.to_string())
            .collect();
        return Err(Error::Topology(format!(
            "meter {me} is missing masks for peers {}",
            missing.join(",")
        )));
    }
    Ok(MaskShare { y })
}

/// Sums one share per roster member.
pub fn aggregate_da(shares: &[(MeterId, MaskShare)], roster: &[MeterId]) -> Result<AggregationKey> {
    let members = check_roster(roster)?;
    if shares.len() != members.len() {
        return Err(Error::Topology(format!(
            "expected {} shares, got {}",
            members.len(),
            shares.len()
        )));
    }
    let mut seen = BTreeSet::new();
    let mut da = [Scalar::ZERO; 2];
    for (id, share) in shares {
        if !members.contains(id) || !seen.insert(*id) {
            return Err(Error::Topology(format!("unexpected or duplicate share from {id}")));
        }
        da = pair_add(da, share.y);
    }
    Ok(AggregationKey { da })
}

/// `(a, b) ↦ ka_agree(x_a, pk_b)` for every pair `a < b`.
fn pairwise_masks(
    secrets: &BTreeMap<MeterId, MeterSecret>,
    roster: &[MeterId],
    publics: &BTreeMap<MeterId, AgreementPublicKey>,
) -> Result<BTreeMap<(MeterId, MeterId), ScalarPair>> {
    // Masks are symmetric, so each unordered pair is computed once. Shared
    // points are formed at half the secret and then doubled in one batched
    // compression, which yields exactly the encoding of `x_a·pk_b`.
    if secrets.values().any(|s| s.x.is_zero()) {
        return Err(Error::Range("zero agreement secret".into()));
    }
    let half = Scalar::from_u64(2).invert().expect("2 is invertible");
    let halves: Vec<Scalar> = roster.iter().map(|a| secrets[a].x * half).collect();
    let mut masks: BTreeMap<(MeterId, MeterId), ScalarPair> = BTreeMap::new();
    for (i, b) in roster.iter().enumerate().skip(1) {
        let pk = publics[b].0;
        if pk.is_identity() {
            return Err(Error::Decode(format!("agreement public key of meter {b} is the identity")));
        }
        let table = (i >= TABLE_MIN_USES).then(|| PointTable::new(&pk));
        let points: Vec<GroupPoint> = halves[..i]
            .iter()
            .map(|k| match &table {
                Some(t) => t.mul(k),
                None => pk * *k,
            })
            .collect();
        for (a, c) in roster[..i].iter().zip(GroupPoint::double_and_compress_batch(&points)) {
            let mut shared = [0u8; POINT_BYTES];
            shared[..32].copy_from_slice(&c);
            masks.insert((*a, *b), mask_from_shared(&shared));
        }
    }
    Ok(masks)
}

/// Runs the whole key setup of one area in-process: publish agreement keys,
/// agree on pairwise masks, blind, aggregate.
pub fn setup_area_key(secrets: &BTreeMap<MeterId, MeterSecret>) -> Result<AggregationKey> {
    let roster: Vec<MeterId> = secrets.keys().copied().collect();
    let publics: BTreeMap<MeterId, AgreementPublicKey> = secrets
        .iter()
        .map(|(id, s)| (*id, s.agreement_public()))
        .collect();

    let masks = pairwise_masks(secrets, &roster, &publics)?;
    let shares = roster
        .iter()
        .map(|me| {
            let peers: Vec<(MeterId, ScalarPair)> = roster
                .iter()
                .filter(|o| *o != me)
                .map(|o| {
                    let key = if o > me { (*me, *o) } else { (*o, *me) };
                    (*o, masks[&key])
                })
                .collect();
            blind_share(*me, &secrets[me].s, &peers, &roster).map(|y| (*me, y))
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate_da(&shares, &roster)
}

/// Serializable form of a meter's public agreement key, for debug dumps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PublicKeyRecord {
    pub meter: MeterId,
    pub agreement_pk: String,
}
