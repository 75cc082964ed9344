//! BLS short signatures on the pairing group.
//!
//! `σ = x·H2(m)`, verified by `ê(σ, g2) = ê(H2(m), PK)`. Batch verification
//! checks `ê(Σ c_i σ_i, g2) · Π ê(H2(m_i), −c_i PK_i) = 1` with 64-bit
//! coefficients `c_i` drawn from a hash of the whole batch.

use rand::{CryptoRng, RngCore};

use crate::crypto::hash::{expand64, hash_parts};
use crate::crypto::params::H2_DOMAIN;
use crate::crypto::{pairing_product, PairingPoint, Scalar, POINT_BYTES};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SigningKey {
    x: Scalar,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct VerifyKey(pub PairingPoint);

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Signature(pub PairingPoint);

impl SigningKey {
    pub fn new(x: Scalar) -> Result<Self> {
        if x.is_zero() {
            return Err(Error::Range("zero signing key".into()));
        }
        Ok(SigningKey { x })
    }

    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        SigningKey {
            x: Scalar::random_nonzero(rng),
        }
    }

    pub fn scalar(&self) -> &Scalar {
        &self.x
    }

    pub fn verify_key(&self) -> VerifyKey {
        VerifyKey(PairingPoint::generator() * self.x)
    }
}

impl VerifyKey {
    pub fn to_bytes(&self) -> [u8; POINT_BYTES] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let p = PairingPoint::from_bytes(bytes)?;
        if p.is_identity() {
            return Err(Error::Decode("verification key is the identity".into()));
        }
        Ok(VerifyKey(p))
    }
}

impl Signature {
    pub fn to_bytes(&self) -> [u8; POINT_BYTES] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        PairingPoint::from_bytes(bytes).map(Signature)
    }
}

/// `H2`: messages onto the pairing group.
pub fn hash_message(message: &[u8]) -> PairingPoint {
    PairingPoint::hash_to_point(H2_DOMAIN.as_bytes(), message)
}

pub fn sign(sk: &SigningKey, message: &[u8]) -> Signature {
    Signature(hash_message(message) * sk.x)
}

pub fn verify(pk: &VerifyKey, message: &[u8], sig: &Signature) -> bool {
    if pk.0.is_identity() {
        return false;
    }
    pairing_product(&[
        (sig.0, PairingPoint::generator()),
        (-hash_message(message), pk.0),
    ])
    .is_one()
}

/// Verification on raw encodings; anything that fails to decode is rejected.
pub fn verify_bytes(pk: &[u8], message: &[u8], sig: &[u8]) -> bool {
    match (VerifyKey::from_bytes(pk), Signature::from_bytes(sig)) {
        (Ok(pk), Ok(sig)) => verify(&pk, message, &sig),
        _ => false,
    }
}

/// One entry of a verification batch.
#[derive(Clone, Copy, Debug)]
pub struct BatchItem<'a> {
    pub pk: &'a VerifyKey,
    pub message: &'a [u8],
    pub sig: &'a Signature,
}

fn batch_coefficients(items: &[BatchItem<'_>]) -> Vec<Scalar> {
    let mut transcript = Vec::with_capacity(items.len() * 32);
    for it in items {
        transcript.extend_from_slice(&hash_parts(
            b"petd/v1/bls/item",
            &[&it.pk.to_bytes(), it.message, &it.sig.to_bytes()],
        ));
    }
    let seed = hash_parts(b"petd/v1/bls/batch", &[&transcript]);
    (0..items.len() as u64)
        .map(|i| {
            let wide = expand64(b"petd/v1/bls/coeff", &[&seed, &i.to_be_bytes()]);
            let c = u64::from_le_bytes(wide[..8].try_into().unwrap());
            Scalar::from_u64(c.max(1))
        })
        .collect()
}

/// Accepts iff every item verifies, up to a soundness error of about 2^-64.
pub fn batch_verify(items: &[BatchItem<'_>]) -> Result<bool> {
    if items.is_empty() {
        return Err(Error::Misuse("batch verification of an empty batch"));
    }
    if items.iter().any(|it| it.pk.0.is_identity()) {
        return Ok(false);
    }
    let coeffs = batch_coefficients(items);
    let sigma: PairingPoint = items
        .iter()
        .zip(&coeffs)
        .fold(PairingPoint::identity(), |acc, (it, c)| acc + it.sig.0 * *c);
    let mut pairs = Vec::with_capacity(items.len() + 1);
    pairs.push((sigma, PairingPoint::generator()));
    for (it, c) in items.iter().zip(&coeffs) {
        pairs.push((-hash_message(it.message), it.pk.0 * *c));
    }
    Ok(pairing_product(&pairs).is_one())
}
