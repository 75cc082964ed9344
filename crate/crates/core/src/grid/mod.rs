//! Scenario engine: topology, readings, attacks, judgement and accounting.

pub mod attack;
pub mod config;
pub mod dataset;
pub mod judge;
pub mod sim;

pub use attack::{apply_attack, apply_attack_to, AttackKind, AttackSpec};
pub use config::{AttackEntry, Days, FaultEntry, LossConfig, SimConfig, TopologyConfig};
pub use dataset::{load_readings, read_readings, synthetic_readings, write_readings, ReadingSeries, SyntheticSpec};
pub use judge::{
    attack_success_probability, estimate_technical_loss, estimate_technical_loss_with_min,
    judge_area, report_size_bytes, AttackProbabilityParams, JudgementInput, Scenario, SizeMode,
    Stage, Verdict,
};
pub use sim::{
    detect_chain, judgement_experiment, recheck_report, run_period, run_period_with, PeriodReport,
    SimOutcome,
};
