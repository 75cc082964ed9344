//! Hex serde adapters for fixed-width encodings.

use serde::{de, Deserialize, Deserializer, Serializer};

use crate::bls::{Signature, VerifyKey};
use crate::crypto::{Digest32, GroupPoint};
use crate::error::Result;
use crate::fe::CipherReading;

pub trait HexCodec: Sized {
    fn encode(&self) -> Vec<u8>;
    fn decode(bytes: &[u8]) -> Result<Self>;
}

impl HexCodec for GroupPoint {
    fn encode(&self) -> Vec<u8> {
        self.to_bytes().to_vec()
    }
    fn decode(bytes: &[u8]) -> Result<Self> {
        GroupPoint::from_bytes(bytes)
    }
}

impl HexCodec for CipherReading {
    fn encode(&self) -> Vec<u8> {
        self.to_bytes().to_vec()
    }
    fn decode(bytes: &[u8]) -> Result<Self> {
        CipherReading::from_bytes(bytes)
    }
}

impl HexCodec for Signature {
    fn encode(&self) -> Vec<u8> {
        self.to_bytes().to_vec()
    }
    fn decode(bytes: &[u8]) -> Result<Self> {
        Signature::from_bytes(bytes)
    }
}

impl HexCodec for VerifyKey {
    fn encode(&self) -> Vec<u8> {
        self.to_bytes().to_vec()
    }
    fn decode(bytes: &[u8]) -> Result<Self> {
        VerifyKey::from_bytes(bytes)
    }
}

impl HexCodec for Digest32 {
    fn encode(&self) -> Vec<u8> {
        self.to_vec()
    }
    fn decode(bytes: &[u8]) -> Result<Self> {
        bytes.try_into().map_err(|_| {
            crate::Error::Decode(format!("digest must be 32 bytes, got {}", bytes.len()))
        })
    }
}

pub fn serialize<T: HexCodec, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&hex::encode(v.encode()))
}

pub fn deserialize<'de, T: HexCodec, D: Deserializer<'de>>(d: D) -> std::result::Result<T, D::Error> {
    let text = String::deserialize(d)?;
    let bytes = hex::decode(&text).map_err(de::Error::custom)?;
    T::decode(&bytes).map_err(de::Error::custom)
}
