use ark_ff::{BigInteger, PrimeField};
use serde::{Deserialize, Serialize};

use super::codec::FixedPointCodec;
use super::pairing::{Fq, Fr, PairingPoint};
use super::plain::GroupPoint;
use crate::error::{Error, Result};

pub const PLAIN_GROUP_ID: &str = "ristretto255";
pub const PAIRING_GROUP_ID: &str = "ss-y2=x3+x/p315";
pub const H1_DOMAIN: &str = "petd/v1/H1/timestamp";
pub const H2_DOMAIN: &str = "petd/v1/H2/report";
const PARAMS_VERSION: u32 = 1;

/// Public parameters published by the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub g: GroupPoint,
    pub g2: PairingPoint,
    pub h1_domain: String,
    pub h2_domain: String,
    pub codec: FixedPointCodec,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            g: GroupPoint::generator(),
            g2: PairingPoint::generator(),
            h1_domain: H1_DOMAIN.into(),
            h2_domain: H2_DOMAIN.into(),
            codec: FixedPointCodec::default(),
        }
    }
}

/// On-disk form of [`SystemParams`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub version: u32,
    pub plain_group: String,
    pub pairing_group: String,
    /// Shared prime group order, big-endian hex.
    pub order_q: String,
    /// Pairing-curve base field modulus, big-endian hex.
    pub pairing_field_p: String,
    pub generator_g: String,
    pub generator_g2: String,
    pub h1_domain: String,
    pub h2_domain: String,
    pub reading_scale: i64,
    pub weight_scale_bits: u32,
}

fn modulus_hex<F: PrimeField>() -> String {
    let be = hex::encode(F::MODULUS.to_bytes_be());
    format!("0x{}", be.trim_start_matches('0'))
}

impl SystemParams {
    pub fn order_q_hex() -> String {
        modulus_hex::<Fr>()
    }

    pub fn pairing_field_hex() -> String {
        modulus_hex::<Fq>()
    }

    pub fn to_file(&self) -> ParamsFile {
        ParamsFile {
            version: PARAMS_VERSION,
            plain_group: PLAIN_GROUP_ID.into(),
            pairing_group: PAIRING_GROUP_ID.into(),
            order_q: Self::order_q_hex(),
            pairing_field_p: Self::pairing_field_hex(),
            generator_g: hex::encode(self.g.to_bytes()),
            generator_g2: hex::encode(self.g2.to_bytes()),
            h1_domain: self.h1_domain.clone(),
            h2_domain: self.h2_domain.clone(),
            reading_scale: self.codec.reading_scale,
            weight_scale_bits: self.codec.weight_scale_bits,
        }
    }

    pub fn from_file(file: &ParamsFile) -> Result<Self> {
        if file.version != PARAMS_VERSION {
            return Err(Error::Decode(format!(
                "unsupported params version {}",
                file.version
            )));
        }
        if file.plain_group != PLAIN_GROUP_ID || file.pairing_group != PAIRING_GROUP_ID {
            return Err(Error::Decode(format!(
                "unsupported groups {} / {}",
                file.plain_group, file.pairing_group
            )));
        }
        if file.order_q != Self::order_q_hex() || file.pairing_field_p != Self::pairing_field_hex()
        {
            return Err(Error::Decode("group order or field modulus mismatch".into()));
        }
        let g = GroupPoint::from_bytes(&decode_hex(&file.generator_g)?)?;
        let g2 = PairingPoint::from_bytes(&decode_hex(&file.generator_g2)?)?;
        if g.is_identity() || g2.is_identity() {
            return Err(Error::Decode("generator is the identity".into()));
        }
        Ok(SystemParams {
            g,
            g2,
            h1_domain: file.h1_domain.clone(),
            h2_domain: file.h2_domain.clone(),
            codec: FixedPointCodec::new(file.reading_scale, file.weight_scale_bits)?,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("params serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ParamsFile =
            toml::from_str(text).map_err(|e| Error::Decode(format!("params file: {e}")))?;
        Self::from_file(&file)
    }
}

pub(crate) fn decode_hex(text: &str) -> Result<Vec<u8>> {
    hex::decode(text.trim_start_matches("0x")).map_err(|e| Error::Decode(format!("hex: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_the_ristretto_order() {
        assert_eq!(
            SystemParams::order_q_hex(),
            "0x1000000000000000000000000000000014def9dea2f79cd65812631a5cf5d3ed"
        );
    }

    #[test]
    fn toml_round_trip_is_byte_identical() {
        let params = SystemParams::default();
        let text = params.to_toml();
        let back = SystemParams::from_toml(&text).unwrap();
        assert_eq!(back, params);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn rejects_tampered_files() {
        let mut file = SystemParams::default().to_file();
        file.order_q = "0x07".into();
        assert!(SystemParams::from_file(&file).is_err());

        let mut file = SystemParams::default().to_file();
        file.generator_g = hex::encode([0u8; 40]);
        assert!(SystemParams::from_file(&file).is_err());

        let mut file = SystemParams::default().to_file();
        file.reading_scale = 300;
        assert!(SystemParams::from_file(&file).is_err());
    }
}
