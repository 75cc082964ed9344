//! Scenario configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//!
//! [topology]
//! areas = 2
//! meters_per_area = 10
//! period_slots = 48
//! days = 3
//!
//! [dataset]            # omit `path` for seeded synthetic readings
//! path = "readings.csv"
//!
//! [model]              # omit `weights` for generated, untrained weights
//! weights = "weights.json"
//!
//! [loss]
//! fixed_units = 40
//! rate = 0.02
//! noise_units = 20
//! history_days = 30
//!
//! [consensus]
//! quorum = "2/3"
//! max_retries = 1
//!
//! [[attacks]]
//! area = 0
//! meter = 3            # index within the area
//! kind = "f1"
//! alpha = 0.3
//!
//! [[faults]]
//! area = 1
//! meter = 0
//! behavior = "AlwaysDissent"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::attack::AttackSpec;
use crate::crypto::FixedPointCodec;
use crate::detector::ModelShape;
use crate::error::{Error, Result};
use crate::ledger::{Behavior, ConsensusConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub areas: usize,
    pub meters_per_area: usize,
    #[serde(default = "default_d")]
    pub period_slots: usize,
    #[serde(default = "default_days")]
    pub days: usize,
}

fn default_d() -> usize {
    48
}

fn default_days() -> usize {
    1
}

impl TopologyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.areas == 0 || self.meters_per_area == 0 {
            return Err(Error::Topology(format!(
                "{} areas of {} meters: every area needs at least one meter",
                self.areas, self.meters_per_area
            )));
        }
        if self.period_slots < 2 {
            return Err(Error::Topology("a period needs at least two slots".into()));
        }
        if self.days == 0 {
            return Err(Error::Topology("at least one day must be simulated".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub weights: Option<PathBuf>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_units")]
    pub units: usize,
    #[serde(default = "default_layers")]
    pub lstm_layers: usize,
}

fn default_n() -> usize {
    10
}

fn default_units() -> usize {
    300
}

fn default_layers() -> usize {
    2
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            weights: None,
            n: default_n(),
            units: default_units(),
            lstm_layers: default_layers(),
        }
    }
}

impl ModelConfig {
    pub fn shape(&self, d: usize) -> ModelShape {
        ModelShape {
            d,
            n: self.n,
            units: self.units,
            lstm_layers: self.lstm_layers,
        }
    }
}

/// Per-slot supply lost between the transformer and the meters:
/// `fixed_units + rate·load` plus integer noise uniform in `±noise_units`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub fixed_units: i64,
    pub rate: f64,
    pub noise_units: i64,
    /// Honest days used to estimate `(E_TL, ε)`.
    pub history_days: usize,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            fixed_units: 40,
            rate: 0.02,
            noise_units: 20,
            history_days: 30,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fixed_units < 0 || self.noise_units < 0 || !(0.0..1.0).contains(&self.rate) {
            return Err(Error::Range("technical loss must be non-negative with rate < 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackEntry {
    pub area: usize,
    pub meter: usize,
    /// Day indices under attack; every day when absent.
    #[serde(default)]
    pub days: Option<Days>,
    #[serde(flatten)]
    pub spec: AttackSpec,
}

/// Half-open day range `[from, to)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Days {
    pub from: usize,
    pub to: usize,
}

impl AttackEntry {
    pub fn active_on(&self, day: usize) -> bool {
        self.days.is_none_or(|r| (r.from..r.to).contains(&day))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultEntry {
    pub area: usize,
    pub meter: usize,
    pub behavior: Behavior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub topology: TopologyConfig,
    #[serde(default)]
    pub scales: FixedPointCodec,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub loss: LossConfig,
    #[serde(default)]
    pub consensus: ConsensusConfig,
    #[serde(default)]
    pub attacks: Vec<AttackEntry>,
    #[serde(default)]
    pub faults: Vec<FaultEntry>,
}

impl SimConfig {
    pub fn new(seed: u64, topology: TopologyConfig) -> Self {
        SimConfig {
            seed,
            topology,
            scales: FixedPointCodec::default(),
            dataset: DatasetConfig::default(),
            model: ModelConfig::default(),
            loss: LossConfig::default(),
            consensus: ConsensusConfig::default(),
            attacks: Vec::new(),
            faults: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Parse {
            row: e.span().map_or(0, |s| line_of(text, s.start)),
            msg: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse { row: 0, msg: format!("{}: {e}", path.display()) })?;
        let mut cfg = Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = &mut cfg.dataset.path {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = &mut cfg.model.weights {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.scales.validate()?;
        self.loss.validate()?;
        self.consensus.validate()?;
        if self.model.n >= self.topology.period_slots {
            return Err(Error::Shape(format!(
                "first layer width {} must be below the period length {}",
                self.model.n, self.topology.period_slots
            )));
        }
        let t = &self.topology;
        for a in &self.attacks {
            if a.area >= t.areas || a.meter >= t.meters_per_area {
                return Err(Error::Topology(format!(
                    "attack on area {} meter {} is outside the topology",
                    a.area, a.meter
                )));
            }
            a.spec.validate()?;
        }
        for f in &self.faults {
            if f.area >= t.areas || f.meter >= t.meters_per_area {
                return Err(Error::Topology(format!(
                    "fault on area {} meter {} is outside the topology",
                    f.area, f.meter
                )));
            }
        }
        Ok(())
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}
