use serde::{Deserialize, Serialize};

use crate::crypto::FixedPointCodec;
use crate::error::{Error, Result};

/// Quantized weights must stay strictly below this magnitude.
pub const MAX_QUANT_WEIGHT: i64 = 1 << 16;

/// The first dense layer `W ∈ Z^{d×n}` with a public real bias.
///
/// `n < d` is enforced: with `n ≥ d` inner products the operator could solve
/// for the individual readings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedFirstLayer {
    d: usize,
    n: usize,
    /// Row-major `d × n`: `w[t * n + c]` is `w_c[t]`.
    w: Vec<i64>,
    bias: Vec<f64>,
    codec: FixedPointCodec,
}

impl QuantizedFirstLayer {
    pub fn new(
        d: usize,
        n: usize,
        w: Vec<i64>,
        bias: Vec<f64>,
        codec: FixedPointCodec,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("first layer needs at least one neuron".into()));
        }
        if n >= d {
            return Err(Error::Shape(format!(
                "first layer must have fewer neurons than inputs (n = {n}, d = {d})"
            )));
        }
        if w.len() != d * n {
            return Err(Error::Shape(format!(
                "first-layer weights hold {} values, expected {d}×{n}",
                w.len()
            )));
        }
        if bias.len() != n {
            return Err(Error::Shape(format!(
                "first-layer bias holds {} values, expected {n}",
                bias.len()
            )));
        }
        if let Some(v) = w.iter().find(|v| v.abs() >= MAX_QUANT_WEIGHT) {
            return Err(Error::Range(format!(
                "quantized weight {v} exceeds 2^16"
            )));
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("first-layer bias".into()));
        }
        codec.validate()?;
        Ok(QuantizedFirstLayer {
            d,
            n,
            w,
            bias,
            codec,
        })
    }

    /// Quantizes real weights (row-major `d × n`).
    pub fn from_real(
        d: usize,
        n: usize,
        weights: &[f64],
        bias: Vec<f64>,
        codec: FixedPointCodec,
    ) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("first-layer weights".into()));
        }
        let w = weights
            .iter()
            .map(|&x| codec.encode_weight(x))
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, n, w, bias, codec)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn codec(&self) -> &FixedPointCodec {
        &self.codec
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights(&self) -> &[i64] {
        &self.w
    }

    pub fn weight(&self, t: usize, c: usize) -> i64 {
        self.w[t * self.n + c]
    }

    /// Column `w_c` as a length-`d` vector.
    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.d).map(|t| self.weight(t, c)).collect()
    }

    pub fn max_abs_weight(&self) -> i64 {
        self.w.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// `d · max|w| · max_reading`, the signed dlog bound for inner products.
    pub fn detection_bound(&self, max_reading_units: i64) -> i64 {
        self.d as i64 * self.max_abs_weight() * max_reading_units
    }

    /// Exact integer inner products `Σ_t w_c[t]·r[t]` for every neuron.
    pub fn integer_products(&self, readings: &[i64]) -> Result<Vec<i64>> {
        if readings.len() != self.d {
            return Err(Error::Shape(format!(
                "expected {} readings, got {}",
                self.d,
                readings.len()
            )));
        }
        let mut out = vec![0i64; self.n];
        for (t, r) in readings.iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                *o += self.weight(t, c) * r;
            }
        }
        Ok(out)
    }
}
