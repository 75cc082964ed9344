//! Area-level theft judgement, technical-loss estimation, attack success
//! probabilities and report sizing.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-area quantities in reading units for one slot or one day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JudgementInput {
    /// Distribution transformer meter reading `E_DTM`.
    pub e_dtm: f64,
    /// Decrypted aggregate of the reported readings `E_Σ`.
    pub e_sum: f64,
    /// Estimated technical loss `E_TL`.
    pub e_tl: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Theft,
    Clear,
}

impl Verdict {
    pub fn is_theft(self) -> bool {
        self == Verdict::Theft
    }
}

pub fn judge_area(input: &JudgementInput) -> Verdict {
    if input.e_dtm > input.e_sum + input.e_tl + input.epsilon {
        Verdict::Theft
    } else {
        Verdict::Clear
    }
}

pub const DEFAULT_MIN_HISTORY: usize = 7;

/// `(E_TL, ε)` from historical `E_DTM − E_Σ` gaps: the mean gap and three
/// sample standard deviations.
pub fn estimate_technical_loss(gaps: &[f64]) -> Result<(f64, f64)> {
    estimate_technical_loss_with_min(gaps, DEFAULT_MIN_HISTORY)
}

pub fn estimate_technical_loss_with_min(gaps: &[f64], min_points: usize) -> Result<(f64, f64)> {
    let need = min_points.max(2);
    if gaps.len() < need {
        return Err(Error::InsufficientHistory { need, got: gaps.len() });
    }
    if let Some(v) = gaps.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("history gap {v}")));
    }
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, 3.0 * var.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// The attacker compromises smart meters, communication links or the
    /// miner node on the path.
    One,
    /// As `One`, but each hop also needs the hop's key.
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Pre,
    Transit,
    Received,
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "one" => Ok(Scenario::One),
            "2" | "two" => Ok(Scenario::Two),
            _ => Err(Error::Parse { row: 0, msg: format!("unknown scenario {s:?}") }),
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pre" => Ok(Stage::Pre),
            "transit" => Ok(Stage::Transit),
            "received" => Ok(Stage::Received),
            _ => Err(Error::Parse { row: 0, msg: format!("unknown stage {s:?}") }),
        }
    }
}

/// Per-component compromise probabilities; every meter, link and key is
/// treated alike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackProbabilityParams {
    pub meters: u32,
    /// Compromising one smart meter.
    pub p_sm: f64,
    /// Compromising one communication link.
    pub p_c: f64,
    /// Compromising the miner node.
    pub p_mn: f64,
    /// Recovering one key.
    pub p_k: f64,
}

pub fn attack_success_probability(
    scenario: Scenario,
    stage: Stage,
    p: &AttackProbabilityParams,
) -> Result<f64> {
    for (name, v) in [("p_sm", p.p_sm), ("p_c", p.p_c), ("p_mn", p.p_mn), ("p_k", p.p_k)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Range(format!("{name} = {v} is not a probability")));
        }
    }
    if p.meters == 0 {
        return Err(Error::Topology("attack needs at least one meter".into()));
    }
    let m = p.meters as i32;
    let keys = p.p_k.powi(m);
    Ok(match (scenario, stage) {
        (Scenario::One, Stage::Pre) => p.p_sm.powi(m),
        (Scenario::One, Stage::Transit) => p.p_c.powi(m),
        (Scenario::One, Stage::Received) => p.p_mn,
        (Scenario::Two, Stage::Pre | Stage::Received) => p.p_sm.powi(m) * keys,
        (Scenario::Two, Stage::Transit) => p.p_c.powi(m) * keys,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeMode {
    /// Every report carries its detection keys.
    PerReport,
    /// Detection keys are sent once per period and amortized over its slots.
    PerPeriod,
}

/// Bytes per report: `C` 40, `TS` 80, `DW` 40·n_dw, `σ` 40, `PK` 40.
pub fn report_size_bytes(n_dw: usize, mode: SizeMode, d: usize) -> Result<Ratio<u64>> {
    if n_dw == 0 {
        return Err(Error::Range("n_dw must be positive".into()));
    }
    let fixed = 40 + 80 + 40 + 40;
    let dw = 40 * n_dw as u64;
    match mode {
        SizeMode::PerReport => Ok(Ratio::from_integer(fixed + dw)),
        SizeMode::PerPeriod => {
            if d == 0 {
                return Err(Error::Range("d must be positive".into()));
            }
            Ok(Ratio::from_integer(fixed) + Ratio::new(dw, d as u64))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(e_dtm: f64, e_sum: f64, e_tl: f64, epsilon: f64) -> Verdict {
        judge_area(&JudgementInput { e_dtm, e_sum, e_tl, epsilon })
    }

    #[test]
    fn judgement_examples() {
        assert_eq!(j(100.0, 90.0, 5.0, 2.0), Verdict::Theft);
        assert_eq!(j(100.0, 95.0, 5.0, 2.0), Verdict::Clear);
        assert_eq!(j(97.0, 90.0, 5.0, 2.0), Verdict::Clear);
    }

    #[test]
    fn loss_estimator() {
        assert_eq!(estimate_technical_loss(&[5.0; 7]).unwrap(), (5.0, 0.0));
        assert!(matches!(
            estimate_technical_loss(&[1.0, 2.0]),
            Err(Error::InsufficientHistory { need: 7, got: 2 })
        ));
        let (tl, eps) = estimate_technical_loss_with_min(&[4.0, 5.0, 6.0], 3).unwrap();
        assert_eq!(tl, 5.0);
        assert!((eps - 3.0).abs() < 1e-12);
        assert!(estimate_technical_loss(&[4.0, 5.0, 6.0]).is_err());
    }

    #[test]
    fn probability_examples() {
        let p = AttackProbabilityParams {
            meters: 3,
            p_sm: 0.1,
            p_c: 0.5,
            p_mn: 0.2,
            p_k: 0.5,
        };
        assert!((attack_success_probability(Scenario::One, Stage::Pre, &p).unwrap() - 0.001).abs() < 1e-15);
        assert_eq!(attack_success_probability(Scenario::One, Stage::Received, &p).unwrap(), 0.2);
        let p2 = AttackProbabilityParams { meters: 2, ..p };
        assert_eq!(attack_success_probability(Scenario::Two, Stage::Transit, &p2).unwrap(), 0.0625);
        for stage in [Stage::Pre, Stage::Transit, Stage::Received] {
            assert!(
                attack_success_probability(Scenario::Two, stage, &p).unwrap()
                    <= attack_success_probability(Scenario::One, stage, &p).unwrap()
                    || stage == Stage::Received
            );
        }
        let bad = AttackProbabilityParams { p_c: 1.5, ..p };
        assert!(attack_success_probability(Scenario::One, Stage::Transit, &bad).is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(report_size_bytes(10, SizeMode::PerReport, 48).unwrap(), Ratio::from_integer(600));
        assert_eq!(
            report_size_bytes(10, SizeMode::PerPeriod, 48).unwrap(),
            Ratio::new(200 * 48 + 400, 48)
        );
        assert!(report_size_bytes(0, SizeMode::PerReport, 48).is_err());
    }
}
