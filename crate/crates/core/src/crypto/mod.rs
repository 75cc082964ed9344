//! Group arithmetic, hashing, fixed-point encoding and canonical
//! serialization shared by every other module.
//!
//! Two groups of the same prime order `q` sit behind this module:
//!
//! * [`GroupPoint`]: ristretto255, used for encryption and key agreement.
//! * [`PairingPoint`]: a supersingular curve with a symmetric pairing, used
//!   only for BLS signatures.
//!
//! Both encode to exactly [`POINT_BYTES`] bytes.

pub mod codec;
pub mod hash;
pub mod pairing;
pub mod params;
pub mod plain;
pub mod scalar;

pub use codec::FixedPointCodec;
pub use hash::Digest32;
pub use pairing::{pairing, pairing_product, Gt, PairingPoint};
pub use params::SystemParams;
pub use plain::GroupPoint;
pub use scalar::{Scalar, ScalarPair};

/// Canonical compressed size of every group element.
pub const POINT_BYTES: usize = 40;

/// The full-domain hash `H1: {0,1}* → G²`, domain-separated per coordinate.
pub fn hash_to_point_pair(domain_label: &[u8], timestamp: &[u8]) -> (GroupPoint, GroupPoint) {
    let coord = |i: u8| {
        let mut label = Vec::with_capacity(domain_label.len() + 2);
        label.extend_from_slice(domain_label);
        label.extend_from_slice(&[b'/', b'0' + i]);
        GroupPoint::hash_to_point(&label, timestamp)
    };
    (coord(0), coord(1))
}
