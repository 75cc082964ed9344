//! The plain prime-order group used for encryption and key agreement
//! (ristretto255).

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_TABLE;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoBasepointTable, RistrettoPoint};
use curve25519_dalek::traits::{Identity, VartimeMultiscalarMul};

use super::hash::expand64;
use super::scalar::Scalar;
use super::POINT_BYTES;
use crate::error::{Error, Result};

/// Fixed-base multiplication table for a point used many times.
pub struct PointTable(RistrettoBasepointTable);

impl PointTable {
    pub fn new(p: &GroupPoint) -> Self {
        PointTable(RistrettoBasepointTable::create(&p.0))
    }

    /// Constant-time `k·P`.
    pub fn mul(&self, k: &Scalar) -> GroupPoint {
        GroupPoint(&self.0 * &k.0)
    }
}

/// Element of the plain group G.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GroupPoint(pub(crate) RistrettoPoint);

impl GroupPoint {
    pub fn identity() -> Self {
        GroupPoint(RistrettoPoint::identity())
    }

    /// The published generator g.
    pub fn generator() -> Self {
        GroupPoint(curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT)
    }

    /// `k·g` using the precomputed basepoint table.
    pub fn mul_generator(k: &Scalar) -> Self {
        GroupPoint(RISTRETTO_BASEPOINT_TABLE * &k.0)
    }

    pub fn is_identity(&self) -> bool {
        self.0 == RistrettoPoint::identity()
    }

    /// `Σ k_i·P_i`. Variable time; inputs here are never secret-dependent in
    /// a way this desk-scale artifact protects against.
    pub fn multiscalar_mul(scalars: &[Scalar], points: &[GroupPoint]) -> Self {
        debug_assert_eq!(scalars.len(), points.len());
        GroupPoint(RistrettoPoint::vartime_multiscalar_mul(
            scalars.iter().map(|s| s.0),
            points.iter().map(|p| p.0),
        ))
    }

    /// Hashes `(domain, msg)` to a uniformly distributed group element.
    pub fn hash_to_point(domain: &[u8], msg: &[u8]) -> Self {
        let wide = expand64(domain, &[msg]);
        GroupPoint(RistrettoPoint::from_uniform_bytes(&wide))
    }

    /// 40-byte canonical encoding: the 32-byte ristretto encoding followed by
    /// eight zero bytes.
    pub fn to_bytes(&self) -> [u8; POINT_BYTES] {
        let mut out = [0u8; POINT_BYTES];
        out[..32].copy_from_slice(self.0.compress().as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != POINT_BYTES {
            return Err(Error::Decode(format!(
                "group point must be {POINT_BYTES} bytes, got {}",
                bytes.len()
            )));
        }
        if bytes[32..].iter().any(|&b| b != 0) {
            return Err(Error::Decode("non-zero padding in group point".into()));
        }
        let compressed = CompressedRistretto::from_slice(&bytes[..32])
            .map_err(|e| Error::Decode(e.to_string()))?;
        compressed
            .decompress()
            .map(GroupPoint)
            .ok_or_else(|| Error::Decode("invalid ristretto encoding".into()))
    }

    /// Compressed form of `2·P` for a batch of points, with a single shared
    /// field inversion. Doubling is a bijection on a prime-order group, so
    /// these values serve as canonical lookup keys.
    pub(crate) fn double_and_compress_batch(points: &[GroupPoint]) -> Vec<[u8; 32]> {
        RistrettoPoint::double_and_compress_batch(points.iter().map(|p| &p.0))
            .into_iter()
            .map(|c| c.to_bytes())
            .collect()
    }
}

impl Default for GroupPoint {
    fn default() -> Self {
        Self::identity()
    }
}

impl fmt::Debug for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupPoint({})", hex::encode(&self.to_bytes()[..32]))
    }
}

impl Add for GroupPoint {
    type Output = GroupPoint;
    fn add(self, rhs: GroupPoint) -> GroupPoint {
        GroupPoint(self.0 + rhs.0)
    }
}

impl AddAssign for GroupPoint {
    fn add_assign(&mut self, rhs: GroupPoint) {
        self.0 += rhs.0;
    }
}

impl Sub for GroupPoint {
    type Output = GroupPoint;
    fn sub(self, rhs: GroupPoint) -> GroupPoint {
        GroupPoint(self.0 - rhs.0)
    }
}

impl SubAssign for GroupPoint {
    fn sub_assign(&mut self, rhs: GroupPoint) {
        self.0 -= rhs.0;
    }
}

impl Neg for GroupPoint {
    type Output = GroupPoint;
    fn neg(self) -> GroupPoint {
        GroupPoint(-self.0)
    }
}

impl Mul<Scalar> for GroupPoint {
    type Output = GroupPoint;
    fn mul(self, k: Scalar) -> GroupPoint {
        GroupPoint(self.0 * k.0)
    }
}

impl Mul<GroupPoint> for Scalar {
    type Output = GroupPoint;
    fn mul(self, p: GroupPoint) -> GroupPoint {
        GroupPoint(p.0 * self.0)
    }
}

impl Sum for GroupPoint {
    fn sum<I: Iterator<Item = GroupPoint>>(iter: I) -> GroupPoint {
        iter.fold(GroupPoint::identity(), |acc, p| acc + p)
    }
}
