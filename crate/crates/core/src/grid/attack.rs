//! The six false-data injection attacks f1–f6, on fixed-point readings.
//!
//! Every real-valued intermediate is rounded half away from zero back to
//! reading units.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::dataset::ReadingSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    /// `α·x_t`.
    F1,
    /// `β_t·x_t`.
    F2,
    /// `mean(x)`.
    F3,
    /// `β_t·mean(x)`.
    F4,
    /// `x_{d+1−t}`.
    F5,
    /// zero for `ts < t < te`.
    F6,
}

impl AttackKind {
    pub const ALL: [AttackKind; 6] = [
        AttackKind::F1,
        AttackKind::F2,
        AttackKind::F3,
        AttackKind::F4,
        AttackKind::F5,
        AttackKind::F6,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub ts: usize,
    #[serde(default = "default_te")]
    pub te: usize,
    /// Seed of the per-slot `β_t` draws.
    #[serde(default)]
    pub seed: u64,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_te() -> usize {
    48
}

pub const ALPHA_RANGE: (f64, f64) = (0.1, 0.8);

impl AttackSpec {
    pub fn new(kind: AttackKind) -> Self {
        AttackSpec {
            kind,
            alpha: default_alpha(),
            ts: 0,
            te: default_te(),
            seed: 0,
        }
    }

    pub fn f1(alpha: f64) -> Self {
        AttackSpec {
            alpha,
            ..Self::new(AttackKind::F1)
        }
    }

    pub fn f6(ts: usize, te: usize) -> Self {
        AttackSpec {
            ts,
            te,
            ..Self::new(AttackKind::F6)
        }
    }

    /// Draws the attack parameters the way the training data is synthesized.
    pub fn random(kind: AttackKind, rng: &mut impl Rng) -> Self {
        let ts = rng.gen_range(0..=42);
        AttackSpec {
            kind,
            alpha: rng.gen_range(ALPHA_RANGE.0..ALPHA_RANGE.1),
            ts,
            te: ts + rng.gen_range(6..=48),
            seed: rng.gen(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            AttackKind::F1 if !(self.alpha > ALPHA_RANGE.0 && self.alpha < ALPHA_RANGE.1) => Err(
                Error::Range(format!("alpha {} outside (0.1, 0.8)", self.alpha)),
            ),
            AttackKind::F6 if self.ts > 42 || !(6..=48).contains(&(self.te.saturating_sub(self.ts))) || self.te < self.ts => {
                Err(Error::Range(format!(
                    "f6 window ({}, {}) needs ts ≤ 42 and 6 ≤ te − ts ≤ 48",
                    self.ts, self.te
                )))
            }
            _ => Ok(()),
        }
    }

    /// `β_1 … β_d`, uniform in (0.1, 0.8), one per slot.
    pub fn betas(&self, d: usize) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        (0..d).map(|_| rng.gen_range(ALPHA_RANGE.0..ALPHA_RANGE.1)).collect()
    }
}

fn units(x: f64) -> i64 {
    x.round() as i64
}

pub fn apply_attack_to(spec: &AttackSpec, x: &[i64]) -> Result<Vec<i64>> {
    spec.validate()?;
    let d = x.len();
    let mean = x.iter().sum::<i64>() as f64 / d.max(1) as f64;
    Ok(match spec.kind {
        AttackKind::F1 => x.iter().map(|&v| units(spec.alpha * v as f64)).collect(),
        AttackKind::F2 => x
            .iter()
            .zip(spec.betas(d))
            .map(|(&v, b)| units(b * v as f64))
            .collect(),
        AttackKind::F3 => vec![units(mean); d],
        AttackKind::F4 => spec.betas(d).into_iter().map(|b| units(b * mean)).collect(),
        AttackKind::F5 => x.iter().rev().copied().collect(),
        AttackKind::F6 => x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let t = i + 1;
                if spec.ts < t && t < spec.te {
                    0
                } else {
                    v
                }
            })
            .collect(),
    })
}

pub fn apply_attack(spec: &AttackSpec, x: &ReadingSeries) -> Result<ReadingSeries> {
    Ok(ReadingSeries {
        meter: x.meter,
        day: x.day.clone(),
        readings: apply_attack_to(spec, &x.readings)?,
    })
}
