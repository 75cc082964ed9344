//! Dense and LSTM layers in the Keras weight layout.

use crate::error::{Error, Result};

/// Row-major `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged matrix".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(|c| c.to_vec()).collect()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out += x · M` for a row vector `x`.
    pub fn accumulate_vecmul(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (k, &xk) in x.iter().enumerate() {
            if xk == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(k)) {
                *o += xk * w;
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `n_in × n_out`.
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl DenseLayer {
    pub fn new(w: Matrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != w.cols {
            return Err(Error::Shape(format!(
                "dense bias has {} entries for {} outputs",
                b.len(),
                w.cols
            )));
        }
        Ok(DenseLayer { w, b })
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.w.rows {
            return Err(Error::Shape(format!(
                "dense layer expects {} inputs, got {}",
                self.w.rows,
                x.len()
            )));
        }
        let mut out = self.b.clone();
        self.w.accumulate_vecmul(x, &mut out);
        Ok(out)
    }

    pub fn parameter_count(&self) -> usize {
        self.w.data.len() + self.b.len()
    }
}

/// LSTM layer with kernel `W: input × 4u`, recurrent kernel `U: u × 4u` and
/// bias `b: 4u`; gate blocks are ordered input, forget, candidate, output.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    pub input_dim: usize,
    pub units: usize,
    pub w: Matrix,
    pub u: Matrix,
    pub b: Vec<f64>,
}

impl LstmLayer {
    pub fn new(input_dim: usize, units: usize, w: Matrix, u: Matrix, b: Vec<f64>) -> Result<Self> {
        let g = 4 * units;
        if units == 0 || input_dim == 0 {
            return Err(Error::Shape("lstm layer with zero width".into()));
        }
        if w.rows != input_dim || w.cols != g {
            return Err(Error::Shape(format!(
                "lstm W is {}×{}, expected {input_dim}×{g}",
                w.rows, w.cols
            )));
        }
        if u.rows != units || u.cols != g {
            return Err(Error::Shape(format!(
                "lstm U is {}×{}, expected {units}×{g}",
                u.rows, u.cols
            )));
        }
        if b.len() != g {
            return Err(Error::Shape(format!(
                "lstm b has {} entries, expected {g}",
                b.len()
            )));
        }
        Ok(LstmLayer {
            input_dim,
            units,
            w,
            u,
            b,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.w.data.len() + self.u.data.len() + self.b.len()
    }

    /// Runs the sequence from zero state and returns every hidden state.
    pub fn forward(&self, sequence: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let u = self.units;
        let mut h = vec![0.0; u];
        let mut c = vec![0.0; u];
        let mut z = vec![0.0; 4 * u];
        let mut out = Vec::with_capacity(sequence.len());
        for x in sequence {
            if x.len() != self.input_dim {
                return Err(Error::Shape(format!(
                    "lstm expects {}-dimensional inputs, got {}",
                    self.input_dim,
                    x.len()
                )));
            }
            z.copy_from_slice(&self.b);
            self.w.accumulate_vecmul(x, &mut z);
            self.u.accumulate_vecmul(&h, &mut z);
            for j in 0..u {
                let i = sigmoid(z[j]);
                let f = sigmoid(z[u + j]);
                let g = z[2 * u + j].tanh();
                let o = sigmoid(z[3 * u + j]);
                c[j] = f * c[j] + i * g;
                h[j] = o * c[j].tanh();
            }
            out.push(h.clone());
        }
        Ok(out)
    }

    /// Final hidden state.
    pub fn last_hidden(&self, sequence: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(self
            .forward(sequence)?
            .pop()
            .unwrap_or_else(|| vec![0.0; self.units]))
    }
}

/// `4·u·(input + u + 1)`.
pub fn lstm_parameter_count(input_dim: usize, units: usize) -> usize {
    4 * units * (input_dim + units + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(rows: usize, cols: usize, v: f64) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    #[test]
    fn zero_lstm_stays_zero() {
        let l = LstmLayer::new(3, 5, filled(3, 20, 0.0), filled(5, 20, 0.0), vec![0.0; 20]).unwrap();
        let h = l.last_hidden(&[vec![0.0; 3], vec![0.0; 3]]).unwrap();
        assert!(h.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_unit_cell_by_hand() {
        // All weights 0.5, input 1.0, one step from zero state:
        // every gate pre-activation is 0.5·1 + 0.5·0 + 0.5 = 1.0.
        let l = LstmLayer::new(1, 1, filled(1, 4, 0.5), filled(1, 4, 0.5), vec![0.5; 4]).unwrap();
        let h = l.last_hidden(&[vec![1.0]]).unwrap()[0];
        let s = 1.0 / (1.0 + (-1.0f64).exp());
        let c = s * 1.0f64.tanh();
        assert!((h - s * c.tanh()).abs() < 1e-15);

        // Second step by hand from (h, c).
        let z = 0.5 + 0.5 * h + 0.5;
        let sz = 1.0 / (1.0 + (-z).exp());
        let c2 = sz * c + sz * z.tanh();
        let h2 = l.last_hidden(&[vec![1.0], vec![1.0]]).unwrap()[0];
        assert!((h2 - sz * c2.tanh()).abs() < 1e-15);
    }

    #[test]
    fn shape_errors() {
        assert!(LstmLayer::new(2, 3, filled(2, 11, 0.0), filled(3, 12, 0.0), vec![0.0; 12]).is_err());
        let l = LstmLayer::new(2, 3, filled(2, 12, 0.0), filled(3, 12, 0.0), vec![0.0; 12]).unwrap();
        assert!(l.forward(&[vec![0.0; 3]]).is_err());
        let d = DenseLayer::new(filled(3, 2, 1.0), vec![0.0; 2]).unwrap();
        assert!(d.forward(&[1.0]).is_err());
        assert_eq!(d.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![6.0, 6.0]);
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(lstm_parameter_count(10, 300), 373_200);
        assert_eq!(lstm_parameter_count(300, 300), 721_200);
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1000.0, -1000.0]);
        assert_eq!(p, vec![1.0, 0.0]);
        let p = softmax(&[0.3, -0.2]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
    }
}
