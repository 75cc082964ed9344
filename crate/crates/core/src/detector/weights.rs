//! Versioned JSON weight file. Reals are written as decimal strings.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::nn::{DenseLayer, LstmLayer, Matrix};
use super::ModelWeights;
use crate::crypto::FixedPointCodec;
use crate::error::{Error, Result};
use crate::fe::QuantizedFirstLayer;

pub const WEIGHT_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightFile {
    pub version: u32,
    pub d: usize,
    pub n: usize,
    pub reading_scale: i64,
    pub weight_scale_bits: u32,
    pub first: FirstLayerFile,
    pub lstm: Vec<LstmFile>,
    pub output: DenseFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FirstLayerFile {
    pub w_quant: Vec<Vec<i64>>,
    pub bias: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LstmFile {
    pub input_dim: usize,
    pub units: usize,
    #[serde(rename = "W")]
    pub w: Vec<Vec<String>>,
    #[serde(rename = "U")]
    pub u: Vec<Vec<String>>,
    pub b: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseFile {
    #[serde(rename = "W")]
    pub w: Vec<Vec<String>>,
    pub b: Vec<String>,
}

fn real(text: &str, what: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::Parse {
            row: 0,
            msg: format!("{what}: {text:?} is not a decimal number"),
        })?;
    if !v.is_finite() {
        return Err(Error::NonFinite(what.to_string()));
    }
    Ok(v)
}

fn reals(v: &[String], what: &str) -> Result<Vec<f64>> {
    v.iter().map(|t| real(t, what)).collect()
}

fn matrix(rows: &[Vec<String>], what: &str) -> Result<Matrix> {
    let parsed = rows
        .iter()
        .map(|r| reals(r, what))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(&parsed).map_err(|_| Error::Shape(format!("{what} is ragged")))
}

fn text(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x}")).collect()
}

fn text_rows(m: &Matrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| text(r)).collect()
}

impl WeightFile {
    pub fn into_model(self) -> Result<ModelWeights> {
        if self.version != WEIGHT_FILE_VERSION {
            return Err(Error::Parse {
                row: 0,
                msg: format!("unsupported weight file version {}", self.version),
            });
        }
        let codec = FixedPointCodec::new(self.reading_scale, self.weight_scale_bits)?;
        if self.first.w_quant.len() != self.d
            || self.first.w_quant.iter().any(|r| r.len() != self.n)
        {
            return Err(Error::Shape(format!(
                "first.w_quant must be {}×{}",
                self.d, self.n
            )));
        }
        let first = QuantizedFirstLayer::new(
            self.d,
            self.n,
            self.first.w_quant.concat(),
            reals(&self.first.bias, "first.bias")?,
            codec,
        )?;
        let lstm = self
            .lstm
            .iter()
            .enumerate()
            .map(|(i, l)| {
                LstmLayer::new(
                    l.input_dim,
                    l.units,
                    matrix(&l.w, &format!("lstm[{i}].W"))?,
                    matrix(&l.u, &format!("lstm[{i}].U"))?,
                    reals(&l.b, &format!("lstm[{i}].b"))?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let output = DenseLayer::new(
            matrix(&self.output.w, "output.W")?,
            reals(&self.output.b, "output.b")?,
        )?;
        ModelWeights::new(first, lstm, output)
    }

    pub fn from_model(m: &ModelWeights) -> Self {
        let first = &m.first;
        WeightFile {
            version: WEIGHT_FILE_VERSION,
            d: first.d(),
            n: first.n(),
            reading_scale: first.codec().reading_scale,
            weight_scale_bits: first.codec().weight_scale_bits,
            first: FirstLayerFile {
                w_quant: first.weights().chunks(first.n()).map(|r| r.to_vec()).collect(),
                bias: text(first.bias()),
            },
            lstm: m
                .lstm
                .iter()
                .map(|l| LstmFile {
                    input_dim: l.input_dim,
                    units: l.units,
                    w: text_rows(&l.w),
                    u: text_rows(&l.u),
                    b: text(&l.b),
                })
                .collect(),
            output: DenseFile {
                w: text_rows(&m.output.w),
                b: text(&m.output.b),
            },
        }
    }
}

pub fn parse_weights(json: &str) -> Result<ModelWeights> {
    let file: WeightFile = serde_json::from_str(json).map_err(|e| Error::Parse {
        row: e.line(),
        msg: format!("weight file: {e}"),
    })?;
    file.into_model()
}

pub fn load_weights(path: &Path) -> Result<ModelWeights> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_weights(&text).map_err(|e| e.context(path.display().to_string()))
}

pub fn weights_to_json(m: &ModelWeights) -> String {
    serde_json::to_string(&WeightFile::from_model(m)).expect("weight file serializes")
}

pub fn save_weights(m: &ModelWeights, path: &Path) -> Result<()> {
    std::fs::write(path, weights_to_json(m))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Shape of a generated model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelShape {
    pub d: usize,
    pub n: usize,
    pub units: usize,
    pub lstm_layers: usize,
}

impl Default for ModelShape {
    /// 48 → 10 → 300 → 300 → 2.
    fn default() -> Self {
        ModelShape {
            d: 48,
            n: 10,
            units: 300,
            lstm_layers: 2,
        }
    }
}

fn uniform(rng: &mut ChaCha20Rng, limit: f64) -> f64 {
    // Six decimals keep the text file compact and round-trip exactly.
    (rng.gen_range(-limit..limit) * 1e6).round() / 1e6
}

fn glorot(rng: &mut ChaCha20Rng, rows: usize, cols: usize, fan: (usize, usize)) -> Matrix {
    let limit = (6.0 / (fan.0 + fan.1) as f64).sqrt();
    Matrix {
        rows,
        cols,
        data: (0..rows * cols).map(|_| uniform(rng, limit)).collect(),
    }
}

/// Deterministic, shape-valid, untrained weights.
pub fn generate_weights(shape: ModelShape, codec: FixedPointCodec, seed: u64) -> Result<ModelWeights> {
    if shape.lstm_layers == 0 {
        return Err(Error::Shape("at least one lstm layer is required".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let ModelShape { d, n, units, .. } = shape;
    let limit = (6.0 / (d + n) as f64).sqrt();
    let real_w: Vec<f64> = (0..d * n).map(|_| uniform(&mut rng, limit)).collect();
    let bias: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.1)).collect();
    let first = QuantizedFirstLayer::from_real(d, n, &real_w, bias, codec)?;
    let mut lstm = Vec::with_capacity(shape.lstm_layers);
    let mut input = 1;
    for _ in 0..shape.lstm_layers {
        let w = glorot(&mut rng, input, 4 * units, (input, 4 * units));
        let u = glorot(&mut rng, units, 4 * units, (units, 4 * units));
        let mut b = vec![0.0; 4 * units];
        // Forget-gate bias of one, as Keras initializes it.
        b[units..2 * units].iter_mut().for_each(|v| *v = 1.0);
        lstm.push(LstmLayer::new(input, units, w, u, b)?);
        input = units;
    }
    let output = DenseLayer::new(
        glorot(&mut rng, units, 2, (units, 2)),
        (0..2).map(|_| uniform(&mut rng, 0.05)).collect(),
    )?;
    ModelWeights::new(first, lstm, output)
}
