use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bls::{sign, SigningKey, Signature, VerifyKey};
use crate::crypto::{Digest32, SystemParams, POINT_BYTES};
use crate::error::{Error, Result};
use crate::fe::{CipherReading, DetectionKeySet, TimestampPoints};
use crate::MeterId;

/// The signed message `C ‖ TS ‖ DW ‖ PK`.
pub fn report_message(
    cipher: &CipherReading,
    ts: &TimestampPoints,
    dw: &DetectionKeySet,
    pk: &VerifyKey,
) -> Vec<u8> {
    let mut m = Vec::with_capacity(POINT_BYTES * (4 + dw.dw.len()));
    m.extend_from_slice(&cipher.to_bytes());
    m.extend_from_slice(&ts.to_bytes());
    m.extend_from_slice(&dw.to_bytes());
    m.extend_from_slice(&pk.to_bytes());
    m
}

/// A meter's report for one slot as sent over the wire.
#[derive(Clone, Debug)]
pub struct Report {
    pub meter: MeterId,
    pub cipher: CipherReading,
    pub ts: TimestampPoints,
    pub dw: DetectionKeySet,
    pub sig: Signature,
    pub pk: VerifyKey,
}

impl Report {
    pub fn sign(
        meter: MeterId,
        sk: &SigningKey,
        cipher: CipherReading,
        ts: TimestampPoints,
        dw: DetectionKeySet,
    ) -> Self {
        let pk = sk.verify_key();
        let sig = sign(sk, &report_message(&cipher, &ts, &dw, &pk));
        Report {
            meter,
            cipher,
            ts,
            dw,
            sig,
            pk,
        }
    }

    pub fn message(&self) -> Vec<u8> {
        report_message(&self.cipher, &self.ts, &self.dw, &self.pk)
    }

    /// `C ‖ TS ‖ DW ‖ δ ‖ PK`.
    pub fn to_wire_bytes(&self) -> Vec<u8> {
        let mut m = Vec::with_capacity(POINT_BYTES * (5 + self.dw.dw.len()));
        m.extend_from_slice(&self.cipher.to_bytes());
        m.extend_from_slice(&self.ts.to_bytes());
        m.extend_from_slice(&self.dw.to_bytes());
        m.extend_from_slice(&self.sig.to_bytes());
        m.extend_from_slice(&self.pk.to_bytes());
        m
    }

    /// The same report with DW left out, as sent after the first slot of a
    /// detection period.
    pub fn to_wire_bytes_without_dw(&self) -> Vec<u8> {
        let mut m = Vec::with_capacity(POINT_BYTES * 5);
        m.extend_from_slice(&self.cipher.to_bytes());
        m.extend_from_slice(&self.ts.to_bytes());
        m.extend_from_slice(&self.sig.to_bytes());
        m.extend_from_slice(&self.pk.to_bytes());
        m
    }

    pub fn record(&self) -> ReportRecord {
        ReportRecord {
            meter: self.meter,
            cipher: self.cipher,
            ts: self.ts.label.clone(),
            dw_ref: self.dw.digest(),
            sig: self.sig,
            pk: self.pk,
        }
    }
}

/// Ledger form of a report; the full DW set is stored once per period.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub meter: MeterId,
    #[serde(with = "crate::hexser")]
    pub cipher: CipherReading,
    pub ts: String,
    #[serde(with = "crate::hexser")]
    pub dw_ref: Digest32,
    #[serde(with = "crate::hexser")]
    pub sig: Signature,
    #[serde(with = "crate::hexser")]
    pub pk: VerifyKey,
}

impl ReportRecord {
    /// Canonical leaf encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 8 + self.ts.len() + 32 + 3 * POINT_BYTES);
        out.extend_from_slice(&self.meter.0.to_be_bytes());
        out.extend_from_slice(&self.cipher.to_bytes());
        out.extend_from_slice(&(self.ts.len() as u64).to_be_bytes());
        out.extend_from_slice(self.ts.as_bytes());
        out.extend_from_slice(&self.dw_ref);
        out.extend_from_slice(&self.sig.to_bytes());
        out.extend_from_slice(&self.pk.to_bytes());
        out
    }

    /// Rebuilds the signed message from the ledger state.
    pub fn message(&self, params: &SystemParams, dw: &DwRegistry) -> Result<Vec<u8>> {
        let keys = dw.get(&self.dw_ref).ok_or(Error::Signature { meter: self.meter })?;
        Ok(self.message_with(params, keys))
    }

    pub fn message_with(&self, params: &SystemParams, keys: &DetectionKeySet) -> Vec<u8> {
        let ts = TimestampPoints::derive(params, &self.ts);
        report_message(&self.cipher, &ts, keys, &self.pk)
    }
}

/// Detection-key sets seen on the chain, by digest.
#[derive(Clone, Debug, Default)]
pub struct DwRegistry {
    sets: HashMap<Digest32, DetectionKeySet>,
}

impl DwRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, keys: DetectionKeySet) -> Digest32 {
        let d = keys.digest();
        self.sets.entry(d).or_insert(keys);
        d
    }

    pub fn get(&self, digest: &Digest32) -> Option<&DetectionKeySet> {
        self.sets.get(digest)
    }

    pub fn contains(&self, digest: &Digest32) -> bool {
        self.sets.contains_key(digest)
    }
}
