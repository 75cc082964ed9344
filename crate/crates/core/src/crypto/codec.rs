use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible half-hourly reading, in kWh.
pub const MAX_READING_KWH: f64 = 65.0;
/// Quantized weights must satisfy `|w| < 2^5`.
pub const MAX_WEIGHT_ABS: f64 = 32.0;

/// Fixed-point bridge between real-valued data and `Z_q`.
///
/// Readings are stored as integer multiples of `1 / reading_scale` kWh and
/// weights as integer multiples of `2^-weight_scale_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointCodec {
    pub reading_scale: i64,
    pub weight_scale_bits: u32,
}

impl Default for FixedPointCodec {
    fn default() -> Self {
        FixedPointCodec {
            reading_scale: 1000,
            weight_scale_bits: 10,
        }
    }
}

impl FixedPointCodec {
    pub fn new(reading_scale: i64, weight_scale_bits: u32) -> Result<Self> {
        let codec = FixedPointCodec {
            reading_scale,
            weight_scale_bits,
        };
        codec.validate()?;
        Ok(codec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut s = self.reading_scale;
        if s < 1 {
            return Err(Error::Range("reading scale must be positive".into()));
        }
        while s % 10 == 0 {
            s /= 10;
        }
        if s != 1 {
            return Err(Error::Range(format!(
                "reading scale {} is not a power of ten",
                self.reading_scale
            )));
        }
        if self.reading_scale > 1_000_000 || self.weight_scale_bits > 20 {
            return Err(Error::Range("fixed-point scale too large".into()));
        }
        Ok(())
    }

    /// Number of decimal fraction digits carried by a reading.
    pub fn reading_digits(&self) -> usize {
        (self.reading_scale as f64).log10().round() as usize
    }

    pub fn weight_scale(&self) -> i64 {
        1i64 << self.weight_scale_bits
    }

    /// Scale of a reading × weight product.
    pub fn product_scale(&self) -> f64 {
        (self.reading_scale * self.weight_scale()) as f64
    }

    pub fn max_reading_units(&self) -> i64 {
        (MAX_READING_KWH * self.reading_scale as f64) as i64
    }

    /// `round(kwh · reading_scale)`.
    pub fn encode_reading(&self, kwh: f64) -> Result<i64> {
        if !kwh.is_finite() || kwh.abs() > MAX_READING_KWH {
            return Err(Error::Range(format!(
                "reading {kwh} kWh outside ±{MAX_READING_KWH}"
            )));
        }
        Ok((kwh * self.reading_scale as f64).round() as i64)
    }

    pub fn decode_reading(&self, units: i64) -> f64 {
        units as f64 / self.reading_scale as f64
    }

    /// Exact decimal parse of a kWh string such as `"1.234"`, without a
    /// round-trip through binary floating point.
    pub fn parse_reading(&self, text: &str) -> Result<i64> {
        let text = text.trim();
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        let digits = self.reading_digits();
        let well_formed = !(int_part.is_empty() && frac_part.is_empty())
            && int_part.bytes().all(|b| b.is_ascii_digit())
            && frac_part.bytes().all(|b| b.is_ascii_digit());
        if !well_formed {
            return Err(Error::Decode(format!("malformed reading {text:?}")));
        }
        if frac_part.len() > digits {
            return Err(Error::Decode(format!(
                "reading {text:?} has more than {digits} fraction digits"
            )));
        }
        let int_val: i64 = if int_part.is_empty() {
            0
        } else {
            int_part
                .parse()
                .map_err(|_| Error::Range(format!("reading {text:?} too large")))?
        };
        let mut frac_val: i64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().expect("ascii digits")
        };
        for _ in frac_part.len()..digits {
            frac_val *= 10;
        }
        let units = int_val
            .checked_mul(self.reading_scale)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(|| Error::Range(format!("reading {text:?} too large")))?;
        if units > self.max_reading_units() {
            return Err(Error::Range(format!(
                "reading {text:?} kWh outside ±{MAX_READING_KWH}"
            )));
        }
        Ok(if neg { -units } else { units })
    }

    /// `round(w · 2^weight_scale_bits)`.
    pub fn encode_weight(&self, w: f64) -> Result<i64> {
        if !w.is_finite() || w.abs() >= MAX_WEIGHT_ABS {
            return Err(Error::Range(format!(
                "weight {w} outside (−{MAX_WEIGHT_ABS}, {MAX_WEIGHT_ABS})"
            )));
        }
        Ok((w * self.weight_scale() as f64).round() as i64)
    }

    pub fn decode_weight(&self, q: i64) -> f64 {
        q as f64 / self.weight_scale() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reading_examples() {
        let c = FixedPointCodec::default();
        assert_eq!(c.encode_reading(0.0).unwrap(), 0);
        assert_eq!(c.encode_reading(1.234).unwrap(), 1234);
        assert_eq!(c.parse_reading("1.234").unwrap(), 1234);
        assert_eq!(c.parse_reading("0.5").unwrap(), 500);
        assert_eq!(c.parse_reading("65").unwrap(), 65_000);
        assert_eq!(c.parse_reading("-0.001").unwrap(), -1);
        assert_eq!(c.parse_reading(".25").unwrap(), 250);
    }

    #[test]
    fn weight_examples() {
        let c = FixedPointCodec::default();
        assert_eq!(c.encode_weight(0.5).unwrap(), 512);
        assert_eq!(c.encode_weight(-0.5).unwrap(), -512);
        assert_eq!(c.decode_weight(512), 0.5);
    }

    #[test]
    fn range_errors() {
        let c = FixedPointCodec::default();
        assert!(matches!(c.encode_reading(65.001), Err(Error::Range(_))));
        assert!(matches!(c.encode_reading(f64::NAN), Err(Error::Range(_))));
        assert!(matches!(c.encode_weight(32.0), Err(Error::Range(_))));
        assert!(matches!(c.encode_weight(-40.0), Err(Error::Range(_))));
        assert!(matches!(c.parse_reading("70.0"), Err(Error::Range(_))));
        assert!(c.parse_reading("1.2345").is_err());
        assert!(c.parse_reading("abc").is_err());
        assert!(c.parse_reading("").is_err());
        assert!(c.parse_reading("1e3").is_err());
    }

    #[test]
    fn scales_must_be_powers() {
        assert!(FixedPointCodec::new(100, 8).is_ok());
        assert!(FixedPointCodec::new(250, 8).is_err());
        assert!(FixedPointCodec::new(0, 8).is_err());
    }

    proptest! {
        #[test]
        fn reading_round_trip_within_one_ulp(kwh in -65.0f64..65.0) {
            let c = FixedPointCodec::default();
            let back = c.decode_reading(c.encode_reading(kwh).unwrap());
            prop_assert!((back - kwh).abs() <= 0.5 / c.reading_scale as f64 + 1e-12);
        }

        #[test]
        fn weight_round_trip_within_one_ulp(w in -31.9f64..31.9) {
            let c = FixedPointCodec::default();
            let back = c.decode_weight(c.encode_weight(w).unwrap());
            prop_assert!((back - w).abs() <= 0.5 / c.weight_scale() as f64 + 1e-12);
        }

        #[test]
        fn parse_agrees_with_encode(units in 0i64..65_000) {
            let c = FixedPointCodec::default();
            let text = format!("{}.{:03}", units / 1000, units % 1000);
            prop_assert_eq!(c.parse_reading(&text).unwrap(), units);
            prop_assert_eq!(c.encode_reading(c.decode_reading(units)).unwrap(), units);
        }
    }
}
