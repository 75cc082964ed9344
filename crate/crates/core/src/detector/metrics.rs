use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion counts with theft as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// `TP / (TP + FN)`.
    pub dr: f64,
    /// `FP / (TN + FP)`.
    pub fa: f64,
    /// `DR − FA`.
    pub hd: f64,
    pub accuracy: f64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Metrics {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        let dr = ratio(tp, tp + fn_);
        let fa = ratio(fp, tn + fp);
        Metrics {
            tp,
            fp,
            tn,
            fn_,
            dr,
            fa,
            hd: dr - fa,
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
        }
    }

    /// `[[TN, FP], [FN, TP]]`: rows are true labels, columns predictions.
    pub fn confusion_matrix(&self) -> [[u64; 2]; 2] {
        [[self.tn, self.fp], [self.fn_, self.tp]]
    }
}

/// `true` means theft.
pub fn evaluate(predictions: &[bool], labels: &[bool]) -> Result<Metrics> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(Metrics::from_counts(tp, fp, tn, fn_))
}
