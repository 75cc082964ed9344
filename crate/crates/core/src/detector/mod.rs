//! Theft classifier: a `d × n` tanh layer whose outputs feed an LSTM stack as
//! a length-`n` sequence of scalars, then a dense softmax layer.
//!
//! The operator never sees readings; it evaluates the first layer from the
//! functionally decrypted integer products `Σ_t w_c[t]·r[t]`. Because the
//! plain path on quantized weights computes the same integers, both paths
//! produce identical logits.

pub mod metrics;
pub mod nn;
pub mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fe::QuantizedFirstLayer;

pub use metrics::{evaluate, Metrics};
pub use nn::{lstm_parameter_count, softmax, DenseLayer, LstmLayer, Matrix};
pub use weights::{
    generate_weights, load_weights, parse_weights, save_weights, weights_to_json, ModelShape,
    WeightFile,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub first: QuantizedFirstLayer,
    pub lstm: Vec<LstmLayer>,
    pub output: DenseLayer,
}

impl ModelWeights {
    pub fn new(first: QuantizedFirstLayer, lstm: Vec<LstmLayer>, output: DenseLayer) -> Result<Self> {
        if lstm.is_empty() {
            return Err(Error::Shape("model has no lstm layer".into()));
        }
        let mut input = 1;
        for (i, l) in lstm.iter().enumerate() {
            if l.input_dim != input {
                return Err(Error::Shape(format!(
                    "lstm[{i}] expects input {}, previous layer gives {input}",
                    l.input_dim
                )));
            }
            input = l.units;
        }
        if output.w.rows != input || output.w.cols != 2 {
            return Err(Error::Shape(format!(
                "output layer is {}×{}, expected {input}×2",
                output.w.rows, output.w.cols
            )));
        }
        let finite = lstm
            .iter()
            .flat_map(|l| l.w.data.iter().chain(&l.u.data).chain(&l.b))
            .chain(output.w.data.iter().chain(&output.b))
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("model weights".into()));
        }
        Ok(ModelWeights {
            first,
            lstm,
            output,
        })
    }

    pub fn d(&self) -> usize {
        self.first.d()
    }

    pub fn n(&self) -> usize {
        self.first.n()
    }

    /// Neuron counts per layer, e.g. `[10, 300, 300, 2]`.
    pub fn layer_widths(&self) -> Vec<usize> {
        std::iter::once(self.n())
            .chain(self.lstm.iter().map(|l| l.units))
            .chain(std::iter::once(2))
            .collect()
    }

    /// Parameters per layer of this model.
    pub fn parameter_counts(&self) -> Vec<usize> {
        std::iter::once(self.d() * self.n() + self.n())
            .chain(self.lstm.iter().map(|l| l.parameter_count()))
            .chain(std::iter::once(self.output.parameter_count()))
            .collect()
    }
}

/// Parameter counts of a dense layer applied per timestep to `step_input`
/// features, followed by the LSTM stack and a 2-way dense output.
pub fn per_timestep_parameter_counts(
    step_input: usize,
    n: usize,
    units: &[usize],
    classes: usize,
) -> Vec<usize> {
    let mut out = vec![step_input * n + n];
    let mut input = n;
    for &u in units {
        out.push(lstm_parameter_count(input, u));
        input = u;
    }
    out.push(input * classes + classes);
    out
}

/// `tanh(p_c / (reading_scale · 2^bits) + b_c)` from exact integer products.
pub fn first_layer_private(products: &[i64], layer: &QuantizedFirstLayer) -> Result<Vec<f64>> {
    if products.len() != layer.n() {
        return Err(Error::Shape(format!(
            "{} products for {} neurons",
            products.len(),
            layer.n()
        )));
    }
    let scale = layer.codec().product_scale();
    Ok(products
        .iter()
        .zip(layer.bias())
        .map(|(&p, b)| (p as f64 / scale + b).tanh())
        .collect())
}

/// Same activations computed locally from fixed-point readings.
pub fn first_layer_quantized(reading_units: &[i64], layer: &QuantizedFirstLayer) -> Result<Vec<f64>> {
    first_layer_private(&layer.integer_products(reading_units)?, layer)
}

/// `tanh(x·W + b)` on real readings with the dequantized weights.
pub fn first_layer_plain(readings_kwh: &[f64], layer: &QuantizedFirstLayer) -> Result<Vec<f64>> {
    first_layer_real(readings_kwh, &dequantized(layer), layer.n(), layer.bias())
}

/// Dequantized first-layer weights, row-major `d × n`.
pub fn dequantized(layer: &QuantizedFirstLayer) -> Vec<f64> {
    layer
        .weights()
        .iter()
        .map(|&q| layer.codec().decode_weight(q))
        .collect()
}

/// Pre-activations `x·W + b` for a real row-major `d × n` matrix.
pub fn first_layer_preactivation(
    readings_kwh: &[f64],
    w: &[f64],
    n: usize,
    bias: &[f64],
) -> Result<Vec<f64>> {
    let d = readings_kwh.len();
    if w.len() != d * n || bias.len() != n {
        return Err(Error::Shape(format!(
            "{} readings do not match a {}-entry weight matrix with {n} neurons",
            d,
            w.len()
        )));
    }
    let mut out = bias.to_vec();
    for (t, x) in readings_kwh.iter().enumerate() {
        for (c, o) in out.iter_mut().enumerate() {
            *o += x * w[t * n + c];
        }
    }
    Ok(out)
}

fn first_layer_real(readings_kwh: &[f64], w: &[f64], n: usize, bias: &[f64]) -> Result<Vec<f64>> {
    Ok(first_layer_preactivation(readings_kwh, w, n, bias)?
        .into_iter()
        .map(f64::tanh)
        .collect())
}

/// Runs the LSTM stack and output layer on first-layer activations.
pub fn head_logits(activations: &[f64], weights: &ModelWeights) -> Result<[f64; 2]> {
    if activations.len() != weights.n() {
        return Err(Error::Shape(format!(
            "{} activations for {} neurons",
            activations.len(),
            weights.n()
        )));
    }
    let mut seq: Vec<Vec<f64>> = activations.iter().map(|a| vec![*a]).collect();
    let last = weights.lstm.len() - 1;
    for (i, layer) in weights.lstm.iter().enumerate() {
        if i == last {
            seq = vec![layer.last_hidden(&seq)?];
        } else {
            seq = layer.forward(&seq)?;
        }
    }
    let logits = weights.output.forward(&seq[0])?;
    Ok([logits[0], logits[1]])
}

/// Input of one inference call.
#[derive(Debug, Clone, PartialEq)]
pub enum DetectorInput<'a> {
    /// Real readings in kWh, evaluated with dequantized weights.
    Plain(&'a [f64]),
    /// Fixed-point readings, evaluated with the integer products.
    Quantized(&'a [i64]),
    /// Functionally decrypted products.
    Private(&'a [i64]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inference {
    pub logits: [f64; 2],
    /// `(honest, theft)`.
    pub probs: [f64; 2],
}

impl Inference {
    pub fn is_theft(&self) -> bool {
        self.probs[1] > self.probs[0]
    }
}

pub fn infer(input: DetectorInput<'_>, weights: &ModelWeights) -> Result<Inference> {
    let acts = match input {
        DetectorInput::Plain(x) => first_layer_plain(x, &weights.first)?,
        DetectorInput::Quantized(r) => first_layer_quantized(r, &weights.first)?,
        DetectorInput::Private(p) => first_layer_private(p, &weights.first)?,
    };
    let logits = head_logits(&acts, weights)?;
    let p = softmax(&logits);
    Ok(Inference {
        logits,
        probs: [p[0], p[1]],
    })
}
