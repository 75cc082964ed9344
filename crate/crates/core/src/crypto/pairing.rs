//! Symmetric pairing group for BLS signatures.
//!
//! The curve is the supersingular `E: y² = x³ + x` over a 315-bit prime field
//! `F_p` with `p ≡ 3 (mod 4)`, so `#E(F_p) = p + 1 = h·q` where `q` is the
//! ristretto255 group order. Both groups of the system therefore share one
//! scalar field. The embedding degree is 2 and the distortion map
//! `ψ(x, y) = (−x, i·y)` turns the reduced Tate pairing into a symmetric,
//! non-degenerate bilinear map `ê: G1 × G1 → μ_q ⊂ F_{p²}`.
//!
//! Compressed points take `⌈(315 + 2) / 8⌉ = 40` bytes.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use ark_ec::short_weierstrass::{Affine, Projective, SWCurveConfig};
use ark_ec::{AffineRepr, CurveConfig, CurveGroup, PrimeGroup};
use ark_ff::fields::{Fp256, Fp320, MontBackend, MontConfig};
use ark_ff::{AdditiveGroup, BigInteger, Field, Fp2, Fp2Config, MontFp, One, PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};

use super::hash::expand64;
use super::scalar::Scalar;
use super::POINT_BYTES;
use crate::error::{Error, Result};

#[derive(MontConfig)]
#[modulus = "33374797436264222526952132761197453397571374707625396035898567100944058358160410388016340977271"]
#[generator = "7"]
pub struct FqConfig;
/// Base field `F_p`.
pub type Fq = Fp320<MontBackend<FqConfig, 5>>;

#[derive(MontConfig)]
#[modulus = "7237005577332262213973186563042994240857116359379907606001950938285454250989"]
#[generator = "2"]
pub struct FrConfig;
/// Scalar field `Z_q`, identical to the ristretto255 scalar field.
pub type Fr = Fp256<MontBackend<FrConfig, 4>>;

pub struct Fq2Config;

impl Fp2Config for Fq2Config {
    type Fp = Fq;
    const NONRESIDUE: Fq = MontFp!("-1");
    const FROBENIUS_COEFF_FP2_C1: &'static [Fq] = &[MontFp!("1"), MontFp!("-1")];
}

/// `F_{p²} = F_p[i] / (i² + 1)`.
pub type Fq2 = Fp2<Fq2Config>;

/// `h = (p + 1) / q`.
const COFACTOR: u64 = 0x4000_0000_0000_0158;

pub struct SupersingularConfig;

impl CurveConfig for SupersingularConfig {
    type BaseField = Fq;
    type ScalarField = Fr;
    const COFACTOR: &'static [u64] = &[COFACTOR];
    const COFACTOR_INV: Fr =
        MontFp!("2103498099477739827989015749627458520370174009453157408502787651583320819191");
}

impl SWCurveConfig for SupersingularConfig {
    const COEFF_A: Fq = MontFp!("1");
    const COEFF_B: Fq = MontFp!("0");
    /// `h·(2, y₀)` with `y₀` the smaller square root of `2³ + 2`.
    const GENERATOR: Affine<Self> = Affine::new_unchecked(
        MontFp!("22273163007279899068932929548494148223749986756818936193795013369654777144150857769640178974822"),
        MontFp!("28398331752834547798190201981108226306407749300776990873713312345269050138061899178135623381214"),
    );
}

type G1Affine = Affine<SupersingularConfig>;
type G1Projective = Projective<SupersingularConfig>;

/// Element of the pairing group (signatures, verification keys, `H2` outputs).
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PairingPoint(pub(crate) G1Projective);

impl PairingPoint {
    pub fn identity() -> Self {
        PairingPoint(G1Projective::zero())
    }

    /// The published generator g2.
    pub fn generator() -> Self {
        PairingPoint(G1Projective::generator())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_zero()
    }

    /// Try-and-increment hash onto the order-q subgroup.
    pub fn hash_to_point(domain: &[u8], msg: &[u8]) -> Self {
        for counter in 0u32.. {
            let wide = expand64(domain, &[msg, &counter.to_be_bytes()]);
            let x = Fq::from_le_bytes_mod_order(&wide);
            // Top bit of the expansion selects the root.
            let greatest = wide[63] & 0x80 != 0;
            if let Some(p) = G1Affine::get_point_from_x_unchecked(x, greatest) {
                let p = p.clear_cofactor();
                if !p.is_zero() {
                    return PairingPoint(p.into_group());
                }
            }
        }
        unreachable!("hash-to-curve exhausted its counter")
    }

    pub fn to_bytes(&self) -> [u8; POINT_BYTES] {
        let mut out = [0u8; POINT_BYTES];
        self.0
            .into_affine()
            .serialize_compressed(&mut out[..])
            .expect("compressed pairing point is 40 bytes");
        out
    }

    /// Decodes and checks the point is on the curve and in the order-q subgroup.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != POINT_BYTES {
            return Err(Error::Decode(format!(
                "pairing point must be {POINT_BYTES} bytes, got {}",
                bytes.len()
            )));
        }
        let p = G1Affine::deserialize_compressed(bytes)
            .map_err(|e| Error::Decode(format!("pairing point: {e}")))?;
        Ok(PairingPoint(p.into_group()))
    }

    pub(crate) fn to_affine(self) -> G1Affine {
        self.0.into_affine()
    }
}

impl Default for PairingPoint {
    fn default() -> Self {
        Self::identity()
    }
}

impl fmt::Debug for PairingPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PairingPoint({})", hex::encode(self.to_bytes()))
    }
}

impl Add for PairingPoint {
    type Output = PairingPoint;
    fn add(self, rhs: PairingPoint) -> PairingPoint {
        PairingPoint(self.0 + rhs.0)
    }
}

impl AddAssign for PairingPoint {
    fn add_assign(&mut self, rhs: PairingPoint) {
        self.0 += rhs.0;
    }
}

impl Sub for PairingPoint {
    type Output = PairingPoint;
    fn sub(self, rhs: PairingPoint) -> PairingPoint {
        PairingPoint(self.0 - rhs.0)
    }
}

impl Neg for PairingPoint {
    type Output = PairingPoint;
    fn neg(self) -> PairingPoint {
        PairingPoint(-self.0)
    }
}

impl Mul<Scalar> for PairingPoint {
    type Output = PairingPoint;
    fn mul(self, k: Scalar) -> PairingPoint {
        PairingPoint(self.0.mul_bigint(k.to_limbs()))
    }
}

/// Element of the target group `μ_q ⊂ F_{p²}`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Gt(Fq2);

impl Gt {
    pub fn one() -> Self {
        Gt(Fq2::one())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn pow(&self, k: &Scalar) -> Self {
        Gt(self.0.pow(k.to_limbs()))
    }
}

impl Mul for Gt {
    type Output = Gt;
    fn mul(self, rhs: Gt) -> Gt {
        Gt(self.0 * rhs.0)
    }
}

impl fmt::Debug for Gt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gt({}, {})", self.0.c0, self.0.c1)
    }
}

/// Miller loop `f_{q,P}(ψ(Q))` without final exponentiation.
///
/// `T` is kept in Jacobian coordinates `(X, Y, Z)`, `x = X/Z²`, `y = Y/Z³`.
/// Each line value is scaled by a non-zero factor from `F_p`; such factors,
/// like the vertical lines that are skipped entirely, vanish under the
/// `(p − 1)` part of the final exponent.
fn miller_loop(p: &G1Affine, q: &G1Affine) -> Fq2 {
    if p.is_zero() || q.is_zero() {
        return Fq2::one();
    }
    let (px, py) = (p.x, p.y);
    let (qx, qy) = (q.x, q.y);
    let mut f = Fq2::one();
    let (mut x, mut y, mut z) = (px, py, Fq::one());

    let bits = Fr::MODULUS.to_bits_be();
    let first = bits.iter().position(|&b| b).expect("non-zero modulus");
    for &bit in &bits[first + 1..] {
        // Doubling; y ≠ 0 since q is odd. Tangent slope λ = M / (2YZ).
        let x2 = x.square();
        let y2 = y.square();
        let z2 = z.square();
        let m = x2.double() + x2 + z2.square();
        let line = Fq2::new(m * (qx * z2 + x) - y2.double(), qy * (y * z * z2).double());
        f = f.square() * line;
        let s = (x * y2).double().double();
        let x3 = m.square() - s.double();
        let y3 = m * (s - x3) - y2.square().double().double().double();
        z = (y * z).double();
        x = x3;
        y = y3;

        if bit {
            // Mixed addition with P; slope λ = R / (H·Z).
            let z2 = z.square();
            let h = px * z2 - x;
            let r = py * z2 * z - y;
            if h.is_zero() {
                // T = −P: the vertical line closes the loop at infinity.
                debug_assert!(!r.is_zero());
                break;
            }
            let line = Fq2::new(r * (qx * z2 + x) - y * h, qy * h * z2 * z);
            f *= line;
            let h2 = h.square();
            let h3 = h2 * h;
            let xh2 = x * h2;
            let x3 = r.square() - h3 - xh2.double();
            y = r * (xh2 - x3) - y * h3;
            x = x3;
            z *= h;
        }
    }
    f
}

/// `f^((p² − 1)/q) = (f^(p − 1))^h`; the Frobenius on `F_{p²}` is conjugation.
fn final_exponentiation(f: Fq2) -> Fq2 {
    let inv = f.inverse().expect("Miller loop output is non-zero");
    let mut conj = f;
    conj.conjugate_in_place();
    (conj * inv).pow([COFACTOR])
}

/// The symmetric pairing `ê(P, Q) = e(P, ψ(Q))`.
pub fn pairing(p: &PairingPoint, q: &PairingPoint) -> Gt {
    Gt(final_exponentiation(miller_loop(&p.to_affine(), &q.to_affine())))
}

/// `Π ê(P_i, Q_i)` with one shared final exponentiation.
pub fn pairing_product(pairs: &[(PairingPoint, PairingPoint)]) -> Gt {
    let ps: Vec<G1Projective> = pairs.iter().map(|(p, _)| p.0).collect();
    let qs: Vec<G1Projective> = pairs.iter().map(|(_, q)| q.0).collect();
    let ps = G1Projective::normalize_batch(&ps);
    let qs = G1Projective::normalize_batch(&qs);
    let f = ps
        .iter()
        .zip(&qs)
        .fold(Fq2::one(), |acc, (p, q)| acc * miller_loop(p, q));
    Gt(final_exponentiation(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn generator_is_in_prime_subgroup() {
        let g = G1Affine::generator();
        assert!(g.is_on_curve());
        assert!(g.is_in_correct_subgroup_assuming_on_curve());
        assert!(!g.is_zero());
    }

    #[test]
    fn group_order_matches_plain_group() {
        // q·g2 = O with q the ristretto order; q is prime so g2 has order q.
        let q_minus_one = -Scalar::ONE;
        let g = PairingPoint::generator();
        assert_eq!(g * q_minus_one + g, PairingPoint::identity());
        // p + 1 = h·q.
        let p_plus_one = Fq::MODULUS_BIT_SIZE;
        assert_eq!(p_plus_one, 315);
    }

    #[test]
    fn encoding_is_forty_bytes_and_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = PairingPoint::generator() * Scalar::random(&mut rng);
            let b = p.to_bytes();
            assert_eq!(PairingPoint::from_bytes(&b).unwrap(), p);
        }
        let id = PairingPoint::identity();
        assert_eq!(PairingPoint::from_bytes(&id.to_bytes()).unwrap(), id);
    }

    #[test]
    fn decoding_rejects_off_subgroup_points() {
        // (2, y₀) lies on the curve but outside the order-q subgroup.
        let raw = G1Affine::get_point_from_x_unchecked(Fq::from(2u8), false).unwrap();
        assert!(!raw.is_in_correct_subgroup_assuming_on_curve());
        let mut bytes = [0u8; POINT_BYTES];
        raw.serialize_compressed(&mut bytes[..]).unwrap();
        assert!(PairingPoint::from_bytes(&bytes).is_err());
    }

    #[test]
    fn hash_to_point_is_deterministic_and_in_subgroup() {
        let a = PairingPoint::hash_to_point(b"H2", b"msg");
        assert_eq!(a, PairingPoint::hash_to_point(b"H2", b"msg"));
        assert_ne!(a, PairingPoint::hash_to_point(b"H2", b"msh"));
        assert!(a.to_affine().is_in_correct_subgroup_assuming_on_curve());
    }

    #[test]
    fn pairing_is_bilinear_and_non_degenerate() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let g = PairingPoint::generator();
        let base = pairing(&g, &g);
        assert!(!base.is_one());
        assert!(base.pow(&-Scalar::ONE) * base == Gt::one(), "e(g,g) has order q");
        for _ in 0..5 {
            let a = Scalar::random(&mut rng);
            let b = Scalar::random(&mut rng);
            let lhs = pairing(&(g * a), &(g * b));
            assert_eq!(lhs, base.pow(&(a * b)));
            assert_eq!(pairing(&(g * b), &(g * a)), lhs, "symmetric");
        }
    }

    #[test]
    fn pairing_with_identity_is_one() {
        let g = PairingPoint::generator();
        assert!(pairing(&g, &PairingPoint::identity()).is_one());
        assert!(pairing(&PairingPoint::identity(), &g).is_one());
    }

    #[test]
    fn product_matches_individual_pairings() {
        let g = PairingPoint::generator();
        let h = PairingPoint::hash_to_point(b"t", b"h");
        let a = Scalar::from_u64(7);
        let prod = pairing_product(&[(g * a, h), (h, -g)]);
        assert_eq!(prod, pairing(&(g * a), &h) * pairing(&h, &-g));
        assert_eq!(prod, base_ratio(g, h, a));
    }

    fn base_ratio(g: PairingPoint, h: PairingPoint, a: Scalar) -> Gt {
        // e(g,h)^(a − 1)
        pairing(&g, &h).pow(&(a - Scalar::ONE))
    }
}
