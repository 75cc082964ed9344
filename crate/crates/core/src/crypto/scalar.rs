use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use curve25519_dalek::scalar::Scalar as DalekScalar;
use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};

/// Element of Z_q, where q is the prime order shared by both groups.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Scalar(pub(crate) DalekScalar);

impl Scalar {
    pub const ZERO: Scalar = Scalar(DalekScalar::ZERO);
    pub const ONE: Scalar = Scalar(DalekScalar::ONE);

    pub fn from_u64(v: u64) -> Self {
        Scalar(DalekScalar::from(v))
    }

    /// Signed integers map negatives to `q - |v|`.
    pub fn from_i64(v: i64) -> Self {
        if v >= 0 {
            Self::from_u64(v as u64)
        } else {
            -Self::from_u64(v.unsigned_abs())
        }
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Scalar(DalekScalar::random(rng))
    }

    /// Uniformly random and non-zero.
    pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let s = Self::random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// Reduces 64 uniform bytes modulo q.
    pub fn from_bytes_wide(bytes: &[u8; 64]) -> Self {
        Scalar(DalekScalar::from_bytes_mod_order_wide(bytes))
    }

    /// Little-endian canonical encoding.
    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes()
    }

    pub fn from_canonical_bytes(bytes: [u8; 32]) -> Result<Self> {
        Option::<DalekScalar>::from(DalekScalar::from_canonical_bytes(bytes))
            .map(Scalar)
            .ok_or_else(|| Error::Decode("non-canonical scalar".into()))
    }

    pub fn is_zero(&self) -> bool {
        self.0 == DalekScalar::ZERO
    }

    pub fn invert(&self) -> Option<Self> {
        (!self.is_zero()).then(|| Scalar(self.0.invert()))
    }

    /// Little-endian 64-bit limbs, for the pairing-group scalar multiplication.
    pub(crate) fn to_limbs(self) -> [u64; 4] {
        let b = self.to_bytes();
        let mut limbs = [0u64; 4];
        for (i, limb) in limbs.iter_mut().enumerate() {
            *limb = u64::from_le_bytes(b[8 * i..8 * i + 8].try_into().unwrap());
        }
        limbs
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut be = self.to_bytes();
        be.reverse();
        write!(f, "Scalar(0x{})", hex::encode(be))
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        self.0 += rhs.0;
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        self.0 -= rhs.0;
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::ZERO, |acc, s| acc + s)
    }
}

/// A pair of scalars (an element of Z_q^2), used for encryption secrets,
/// masks and the aggregate key.
pub type ScalarPair = [Scalar; 2];

pub fn pair_add(a: ScalarPair, b: ScalarPair) -> ScalarPair {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn pair_sub(a: ScalarPair, b: ScalarPair) -> ScalarPair {
    [a[0] - b[0], a[1] - b[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn order() -> BigUint {
        (BigUint::from(1u8) << 252u32)
            + "27742317777372353535851937790883648493"
                .parse::<BigUint>()
                .unwrap()
    }

    fn big(s: &Scalar) -> BigUint {
        BigUint::from_bytes_le(&s.to_bytes())
    }

    #[test]
    fn arithmetic_matches_bigint_mod_q() {
        let q = order();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let (a, b, c) = (
                Scalar::random(&mut rng),
                Scalar::random(&mut rng),
                Scalar::random(&mut rng),
            );
            let (ba, bb, bc) = (big(&a), big(&b), big(&c));
            assert_eq!(big(&(a + b)), (&ba + &bb) % &q);
            assert_eq!(big(&(a * c)), (&ba * &bc) % &q);
            assert_eq!(big(&(-b)), (&q - &bb) % &q);
        }
    }

    #[test]
    fn signed_encoding() {
        let q = order();
        assert_eq!(big(&Scalar::from_i64(-5)), &q - BigUint::from(5u8));
        assert_eq!(Scalar::from_i64(-5) + Scalar::from_i64(5), Scalar::ZERO);
        assert_eq!(Scalar::from_i64(i64::MIN) + Scalar::from_u64(1 << 63), Scalar::ZERO);
    }

    #[test]
    fn canonical_bytes_rejects_overflow() {
        assert!(Scalar::from_canonical_bytes([0xff; 32]).is_err());
        let s = Scalar::from_u64(42);
        assert_eq!(Scalar::from_canonical_bytes(s.to_bytes()).unwrap(), s);
    }
}
