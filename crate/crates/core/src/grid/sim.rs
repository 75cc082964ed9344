//! End-to-end scenario engine: key setup, encrypted reporting, ledger
//! consensus, aggregate decryption, judgement and private detection.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::attack::{apply_attack_to, AttackSpec};
use super::config::{LossConfig, SimConfig};
use super::dataset::{load_readings, slot_label, synthetic_readings, ReadingSeries, SyntheticSpec};
use super::judge::{
    estimate_technical_loss, judge_area, report_size_bytes, JudgementInput, SizeMode, Verdict,
};
use crate::bls::SigningKey;
use crate::crypto::hash::hash_parts;
use crate::crypto::{FixedPointCodec, SystemParams};
use crate::detector::{evaluate, generate_weights, infer, load_weights, DetectorInput, Metrics, ModelWeights};
use crate::error::{Error, Result};
use crate::fe::{
    decrypt_aggregate, decrypt_first_layer, encrypt_reading, gen_detection_keys, CipherReading,
    DetectionKeySet, TimestampPoints,
};
use crate::ledger::{
    build_block, consensus_round, elect_miner, validate_chain, Behavior, Chain, ChainStatus,
    ConsensusOutcome, Report, Validator,
};
use crate::secure_agg::{setup_area_key, AggregationKey, MeterSecret};
use crate::MeterId;

pub const REPORT_VERSION: u32 = 1;

/// A 64-bit seed for one named stream of one area.
pub fn sub_seed(seed: u64, stream: &str, index: u64) -> u64 {
    let h = hash_parts(
        b"petd/v1/sim/seed",
        &[&seed.to_be_bytes(), stream.as_bytes(), &index.to_be_bytes()],
    );
    u64::from_be_bytes(h[..8].try_into().unwrap())
}

/// Keys of one area's meters.
pub struct AreaKeys {
    pub meters: Vec<MeterId>,
    pub secrets: BTreeMap<MeterId, MeterSecret>,
    pub signing: BTreeMap<MeterId, SigningKey>,
    pub da: AggregationKey,
}

pub fn setup_area(meters: &[MeterId], seed: u64) -> Result<AreaKeys> {
    if meters.is_empty() {
        return Err(Error::Topology("area without meters".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let secrets: BTreeMap<MeterId, MeterSecret> = meters
        .iter()
        .map(|id| (*id, MeterSecret::generate(&mut rng)))
        .collect();
    if secrets.len() != meters.len() {
        return Err(Error::Topology("duplicate meter id in area".into()));
    }
    let signing = secrets
        .iter()
        .map(|(id, s)| Ok((*id, SigningKey::new(s.x)?)))
        .collect::<Result<_>>()?;
    let da = setup_area_key(&secrets)?;
    Ok(AreaKeys {
        meters: secrets.keys().copied().collect(),
        secrets,
        signing,
        da,
    })
}

/// Transformer readings for one day: `load + fixed + round(rate·load) + noise`
/// per slot.
pub fn dtm_slots(true_totals: &[i64], loss: &LossConfig, rng: &mut impl Rng) -> Vec<i64> {
    true_totals
        .iter()
        .map(|&load| {
            let noise = if loss.noise_units > 0 {
                rng.gen_range(-loss.noise_units..=loss.noise_units)
            } else {
                0
            };
            load + loss.fixed_units + (loss.rate * load as f64).round() as i64 + noise
        })
        .collect()
}

fn slot_sums(day: &[Vec<i64>], d: usize) -> Vec<i64> {
    (0..d).map(|t| day.iter().map(|r| r[t]).sum()).collect()
}

/// `(E_TL, ε)` from honest history days of one area.
pub fn history_estimate(history: &[Vec<Vec<i64>>], d: usize, loss: &LossConfig, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let gaps: Vec<f64> = history
        .iter()
        .map(|day| {
            let load = slot_sums(day, d);
            let dtm = dtm_slots(&load, loss, rng);
            (dtm.iter().sum::<i64>() - load.iter().sum::<i64>()) as f64
        })
        .collect();
    estimate_technical_loss(&gaps)
}

/// Readings of one area, split into history and simulated days; meters in
/// ascending id order inside every day.
#[derive(Debug, Clone)]
pub struct AreaData {
    pub meters: Vec<MeterId>,
    pub history: Vec<Vec<ReadingSeries>>,
    pub days: Vec<Vec<ReadingSeries>>,
}

fn group_by_day(series: Vec<ReadingSeries>) -> BTreeMap<String, BTreeMap<MeterId, ReadingSeries>> {
    let mut by_day: BTreeMap<String, BTreeMap<MeterId, ReadingSeries>> = BTreeMap::new();
    for s in series {
        by_day.entry(s.day.clone()).or_default().insert(s.meter, s);
    }
    by_day
}

/// Assigns meters to areas in ascending id order and days in date order.
pub fn partition_dataset(
    series: Vec<ReadingSeries>,
    areas: usize,
    meters_per_area: usize,
    history_days: usize,
    days: usize,
) -> Result<Vec<AreaData>> {
    let by_day = group_by_day(series);
    let all_meters: BTreeSet<MeterId> = by_day.values().flat_map(|m| m.keys().copied()).collect();
    let need = areas * meters_per_area;
    if all_meters.len() < need {
        return Err(Error::Topology(format!(
            "dataset has {} meters, topology needs {need}",
            all_meters.len()
        )));
    }
    let chosen: Vec<MeterId> = all_meters.into_iter().take(need).collect();
    let complete: Vec<&BTreeMap<MeterId, ReadingSeries>> = by_day
        .values()
        .filter(|m| chosen.iter().all(|id| m.contains_key(id)))
        .collect();
    if complete.len() < history_days + days {
        return Err(Error::Topology(format!(
            "dataset has {} complete days, need {history_days} history plus {days} simulated",
            complete.len()
        )));
    }
    Ok(chosen
        .chunks(meters_per_area)
        .map(|ids| {
            let pick = |day: &BTreeMap<MeterId, ReadingSeries>| -> Vec<ReadingSeries> {
                ids.iter().map(|id| day[id].clone()).collect()
            };
            AreaData {
                meters: ids.to_vec(),
                history: complete[..history_days].iter().map(|d| pick(d)).collect(),
                days: complete[history_days..history_days + days]
                    .iter()
                    .map(|d| pick(d))
                    .collect(),
            }
        })
        .collect())
}

/// Seeded synthetic readings for every area; meter ids `1000·(a+1) + i + 1`.
pub fn synthetic_areas(cfg: &SimConfig) -> Result<Vec<AreaData>> {
    let t = &cfg.topology;
    let mut series = Vec::new();
    for a in 0..t.areas {
        let spec = SyntheticSpec {
            meters: t.meters_per_area,
            days: cfg.loss.history_days + t.days,
            d: t.period_slots,
            first_meter: 1000 * (a as u32 + 1) + 1,
            seed: sub_seed(cfg.seed, "readings", a as u64),
        };
        series.extend(synthetic_readings(&spec, &cfg.scales)?);
    }
    partition_dataset(series, t.areas, t.meters_per_area, cfg.loss.history_days, t.days)
}

pub fn load_areas(cfg: &SimConfig) -> Result<Vec<AreaData>> {
    match &cfg.dataset.path {
        None => synthetic_areas(cfg),
        Some(path) => {
            let t = &cfg.topology;
            let series = load_readings(path, &cfg.scales, t.period_slots)?;
            partition_dataset(series, t.areas, t.meters_per_area, cfg.loss.history_days, t.days)
        }
    }
}

pub fn load_model(cfg: &SimConfig) -> Result<ModelWeights> {
    let d = cfg.topology.period_slots;
    let model = match &cfg.model.weights {
        Some(path) => load_weights(path)?,
        None => generate_weights(cfg.model.shape(d), cfg.scales, sub_seed(cfg.seed, "model", 0))?,
    };
    if model.d() != d {
        return Err(Error::Shape(format!("model expects d = {}, topology has {d}", model.d())));
    }
    if *model.first.codec() != cfg.scales {
        return Err(Error::Shape("model fixed-point scales differ from the config".into()));
    }
    Ok(model)
}

/// Per-slot ciphertexts of one area-day, meters in id order.
pub struct EncryptedDay {
    pub slots: Vec<TimestampPoints>,
    pub ciphers: Vec<Vec<CipherReading>>,
}

pub fn encrypt_day(
    params: &SystemParams,
    keys: &AreaKeys,
    day: &str,
    reported: &[Vec<i64>],
) -> Result<EncryptedDay> {
    let d = reported.first().map_or(0, Vec::len);
    let slots: Vec<TimestampPoints> = (1..=d)
        .map(|t| TimestampPoints::derive(params, &slot_label(day, t, d)))
        .collect();
    let ciphers = keys
        .meters
        .iter()
        .zip(reported)
        .map(|(id, r)| {
            let s = &keys.secrets[id].s;
            slots
                .iter()
                .zip(r)
                .map(|(ts, &v)| encrypt_reading(s, ts, v, &params.codec))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.context(format!("meter {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncryptedDay { slots, ciphers })
}

/// Decrypted area total of every slot.
pub fn decrypt_day(params: &SystemParams, keys: &AreaKeys, day: &EncryptedDay) -> Result<Vec<i64>> {
    let bound = keys.meters.len() as u64 * params.codec.max_reading_units() as u64;
    day.slots
        .iter()
        .enumerate()
        .map(|(t, ts)| {
            let column: Vec<CipherReading> = day.ciphers.iter().map(|c| c[t]).collect();
            decrypt_aggregate(&column, &keys.da, ts, bound)
        })
        .collect()
}

fn reported_day(
    honest: &[ReadingSeries],
    area: usize,
    day: usize,
    attacks: &[(usize, usize, AttackSpec, Option<(usize, usize)>)],
) -> Result<(Vec<Vec<i64>>, Vec<bool>)> {
    let mut out: Vec<Vec<i64>> = honest.iter().map(|s| s.readings.clone()).collect();
    let mut attacked = vec![false; out.len()];
    for (a, m, spec, days) in attacks {
        let active = days.is_none_or(|(from, to)| (from..to).contains(&day));
        if *a == area && active {
            out[*m] = apply_attack_to(spec, &out[*m])?;
            attacked[*m] = true;
        }
    }
    Ok((out, attacked))
}

/// One day of the judgement experiment without the ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayJudgement {
    pub day: String,
    pub e_dtm: i64,
    pub e_sum: i64,
    pub true_sum: i64,
    pub reported_sum: i64,
    pub verdict: Verdict,
    pub attacked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgementRun {
    pub e_tl: f64,
    pub epsilon: f64,
    pub days: Vec<DayJudgement>,
}

/// Encrypts every reading of a synthetic area, decrypts the slot totals and
/// judges every day against estimator-derived `(E_TL, ε)`.
pub fn judgement_experiment(
    params: &SystemParams,
    meters: usize,
    days: usize,
    attack: Option<(usize, AttackSpec)>,
    loss: &LossConfig,
    seed: u64,
) -> Result<JudgementRun> {
    let d = 48;
    let spec = SyntheticSpec {
        meters,
        days: loss.history_days + days,
        d,
        first_meter: 1,
        seed: sub_seed(seed, "readings", 0),
    };
    let series = synthetic_readings(&spec, &params.codec)?;
    let area = partition_dataset(series, 1, meters, loss.history_days, days)?.remove(0);
    let keys = setup_area(&area.meters, sub_seed(seed, "keys", 0))?;
    let mut loss_rng = ChaCha20Rng::seed_from_u64(sub_seed(seed, "loss", 0));
    let history: Vec<Vec<Vec<i64>>> = area
        .history
        .iter()
        .map(|day| day.iter().map(|s| s.readings.clone()).collect())
        .collect();
    let (e_tl, epsilon) = history_estimate(&history, d, loss, &mut loss_rng)?;
    let attacks: Vec<_> = attack.into_iter().map(|(m, s)| (0, m, s, None)).collect();
    let mut out = Vec::with_capacity(days);
    for (k, honest) in area.days.iter().enumerate() {
        let label = honest[0].day.clone();
        let (reported, attacked) = reported_day(honest, 0, k, &attacks)?;
        let enc = encrypt_day(params, &keys, &label, &reported)?;
        let totals = decrypt_day(params, &keys, &enc)?;
        let true_load = slot_sums(&honest.iter().map(|s| s.readings.clone()).collect::<Vec<_>>(), d);
        let dtm = dtm_slots(&true_load, loss, &mut loss_rng);
        let e_dtm: i64 = dtm.iter().sum();
        let e_sum: i64 = totals.iter().sum();
        let verdict = judge_area(&JudgementInput {
            e_dtm: e_dtm as f64,
            e_sum: e_sum as f64,
            e_tl,
            epsilon,
        });
        out.push(DayJudgement {
            day: label,
            e_dtm,
            e_sum,
            true_sum: true_load.iter().sum(),
            reported_sum: reported.iter().flatten().sum(),
            verdict,
            attacked: attacked.iter().any(|a| *a),
        });
    }
    Ok(JudgementRun { e_tl, epsilon, days: out })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeterDetection {
    pub meter: MeterId,
    pub period: String,
    pub prob_theft: f64,
    pub flagged: bool,
}

/// Runs the classifier on every complete meter-period stored in `chain`,
/// from ciphertexts and detection keys alone.
pub fn detect_chain(chain: &Chain, model: &ModelWeights) -> Result<Vec<MeterDetection>> {
    let d = model.d();
    let mut series: BTreeMap<(String, MeterId), (Vec<CipherReading>, crate::crypto::Digest32)> = BTreeMap::new();
    for block in &chain.blocks {
        for r in &block.records {
            let keys = chain
                .registry()
                .get(&r.dw_ref)
                .ok_or_else(|| Error::Decode(format!("block {}: unknown detection keys", block.height)))?;
            let entry = series
                .entry((keys.period.clone(), r.meter))
                .or_insert_with(|| (Vec::with_capacity(d), r.dw_ref));
            entry.0.push(r.cipher);
        }
    }
    let max_units = model.first.codec().max_reading_units();
    let mut out = Vec::new();
    for ((period, meter), (ciphers, dw_ref)) in series {
        if ciphers.len() != d {
            continue;
        }
        let keys: &DetectionKeySet = chain.registry().get(&dw_ref).expect("checked above");
        let products = decrypt_first_layer(&ciphers, &model.first, keys, max_units)
            .map_err(|e| e.context(format!("meter {meter}, period {period}")))?;
        let inf = infer(DetectorInput::Private(&products), model)?;
        out.push(MeterDetection {
            meter,
            period,
            prob_theft: inf.probs[1],
            flagged: inf.is_theft(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByteAccounting {
    pub n_dw: usize,
    /// Wire size of a real serialized report.
    pub measured_per_report: usize,
    pub per_report: u64,
    /// `num/den` bytes with detection keys sent once per period.
    pub per_period: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayReport {
    pub day: String,
    pub miner: MeterId,
    pub reelections: usize,
    pub slot_totals: Vec<i64>,
    pub dtm: Vec<i64>,
    pub e_dtm: i64,
    pub e_sum: i64,
    /// Plaintext sum of what the meters reported; equals `e_sum`.
    pub reported_sum: i64,
    pub verdict: Verdict,
    pub attacked_meters: Vec<MeterId>,
    /// Classifier outputs; present on flagged days only.
    pub detection: Vec<MeterDetection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub area: usize,
    pub meters: Vec<MeterId>,
    pub e_tl: f64,
    pub epsilon: f64,
    pub chain_file: String,
    pub chain_head: String,
    pub blocks: usize,
    pub chain_valid: bool,
    pub days: Vec<DayReport>,
    /// Day verdicts against whether any meter was attacked.
    pub judgement: Metrics,
    /// Meter verdicts on flagged days against the attack roster.
    pub detection: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub version: u32,
    pub seed: u64,
    pub topology: super::config::TopologyConfig,
    pub bytes: ByteAccounting,
    pub areas: Vec<AreaReport>,
}

impl PeriodReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { row: e.line(), msg: e.to_string() })
    }
}

/// Wall-clock of each stage; kept out of the report so reports stay
/// reproducible.
#[derive(Debug, Clone, Default)]
pub struct Timings {
    pub setup: Duration,
    pub reporting: Duration,
    pub consensus: Duration,
    pub decryption: Duration,
    pub detection: Duration,
}

#[derive(Debug)]
pub struct SimOutcome {
    pub report: PeriodReport,
    pub chains: Vec<Chain>,
    pub timings: Timings,
}

/// Chain file name of area `a` for a report written to `report_name`.
pub fn chain_file_name(report_name: &str, area: usize) -> String {
    let stem = report_name.strip_suffix(".json").unwrap_or(report_name);
    format!("{stem}.area{area}.chain.json")
}

/// Checks every stored day verdict against the judgement rule.
pub fn recheck_report(report: &PeriodReport) -> Vec<(usize, String, Verdict, Verdict)> {
    let mut mismatches = Vec::new();
    for a in &report.areas {
        for d in &a.days {
            let v = judge_area(&JudgementInput {
                e_dtm: d.e_dtm as f64,
                e_sum: d.e_sum as f64,
                e_tl: a.e_tl,
                epsilon: a.epsilon,
            });
            if v != d.verdict {
                mismatches.push((a.area, d.day.clone(), d.verdict, v));
            }
        }
    }
    mismatches
}

/// Runs the whole period for every area. `report_name` only names the chain
/// files inside the report.
pub fn run_period(cfg: &SimConfig, report_name: &str) -> Result<SimOutcome> {
    cfg.validate()?;
    let areas = load_areas(cfg)?;
    let model = load_model(cfg)?;
    run_period_with(cfg, areas, &model, report_name)
}

pub fn run_period_with(
    cfg: &SimConfig,
    areas: Vec<AreaData>,
    model: &ModelWeights,
    report_name: &str,
) -> Result<SimOutcome> {
    cfg.validate()?;
    let params = params_for(cfg.scales);
    let d = cfg.topology.period_slots;
    let attacks: Vec<_> = cfg
        .attacks
        .iter()
        .map(|a| (a.area, a.meter, a.spec, a.days.map(|r| (r.from, r.to))))
        .collect();
    let mut timings = Timings::default();
    let mut reports = Vec::new();
    let mut chains = Vec::new();
    let mut measured = 0;
    for (a, data) in areas.into_iter().enumerate() {
        let (area, chain, bytes) = run_area(&params, cfg, a, data, model, &attacks, report_name, &mut timings)
            .map_err(|e| e.context(format!("area {a}")))?;
        measured = bytes;
        reports.push(area);
        chains.push(chain);
    }
    let n_dw = model.n();
    let per_period = report_size_bytes(n_dw, SizeMode::PerPeriod, d)?;
    let report = PeriodReport {
        version: REPORT_VERSION,
        seed: cfg.seed,
        topology: cfg.topology,
        bytes: ByteAccounting {
            n_dw,
            measured_per_report: measured,
            per_report: report_size_bytes(n_dw, SizeMode::PerReport, d)?.to_integer(),
            per_period: format!("{}/{}", per_period.numer(), per_period.denom()),
        },
        areas: reports,
    };
    Ok(SimOutcome { report, chains, timings })
}

#[allow(clippy::too_many_arguments)]
fn run_area(
    params: &SystemParams,
    cfg: &SimConfig,
    a: usize,
    data: AreaData,
    model: &ModelWeights,
    attacks: &[(usize, usize, AttackSpec, Option<(usize, usize)>)],
    report_name: &str,
    timings: &mut Timings,
) -> Result<(AreaReport, Chain, usize)> {
    let d = cfg.topology.period_slots;
    let start = Instant::now();
    let keys = setup_area(&data.meters, sub_seed(cfg.seed, "keys", a as u64))?;
    let mut loss_rng = ChaCha20Rng::seed_from_u64(sub_seed(cfg.seed, "loss", a as u64));
    let history: Vec<Vec<Vec<i64>>> = data
        .history
        .iter()
        .map(|day| day.iter().map(|s| s.readings.clone()).collect())
        .collect();
    let (e_tl, epsilon) = history_estimate(&history, d, &cfg.loss, &mut loss_rng)?;
    let behaviors: BTreeMap<MeterId, Behavior> = cfg
        .faults
        .iter()
        .filter(|f| f.area == a)
        .map(|f| (keys.meters[f.meter], f.behavior))
        .collect();
    timings.setup += start.elapsed();

    let mut chain = Chain::new();
    let mut failed: BTreeSet<MeterId> = BTreeSet::new();
    let mut days = Vec::with_capacity(data.days.len());
    let mut wire_bytes = 0;
    let (mut day_pred, mut day_label) = (Vec::new(), Vec::new());
    let (mut meter_pred, mut meter_label) = (Vec::new(), Vec::new());
    for (k, honest) in data.days.iter().enumerate() {
        let label = honest[0].day.clone();
        let (reported, attacked) = reported_day(honest, a, k, attacks)?;

        let start = Instant::now();
        let enc = encrypt_day(params, &keys, &label, &reported)?;
        let dw: Vec<DetectionKeySet> = keys
            .meters
            .iter()
            .map(|id| gen_detection_keys(&keys.secrets[id].s, &model.first, &enc.slots))
            .collect::<Result<_>>()?;
        let slot_reports: Vec<Vec<Report>> = (0..d)
            .map(|t| {
                keys.meters
                    .iter()
                    .enumerate()
                    .map(|(i, id)| {
                        Report::sign(*id, &keys.signing[id], enc.ciphers[i][t], enc.slots[t].clone(), dw[i].clone())
                    })
                    .collect()
            })
            .collect();
        wire_bytes = slot_reports[0][0].to_wire_bytes().len();
        timings.reporting += start.elapsed();

        let start = Instant::now();
        let mut election = elect_miner(&keys.meters, k as u64, &failed)?;
        let mut reelections = 0;
        for (t, reports) in slot_reports.iter().enumerate() {
            let timestamp = (k * d + t + 1) as u64;
            loop {
                let tip = chain.tip();
                let block = build_block(params, tip, reports, timestamp, &enc.slots[t], chain.registry())?;
                let validators: Vec<Validator> = reports
                    .iter()
                    .map(|r| Validator {
                        id: r.meter,
                        behavior: behaviors.get(&r.meter).copied().unwrap_or(Behavior::Honest),
                        own_record: Some(r.record()),
                    })
                    .collect();
                let outcome = consensus_round(params, &tip, chain.registry(), &block, &validators, &cfg.consensus)?;
                match outcome {
                    ConsensusOutcome::Committed { .. } => {
                        chain.push(block);
                        break;
                    }
                    ConsensusOutcome::Rejected { .. } => {
                        failed.insert(election.miner);
                        election = elect_miner(&keys.meters, k as u64, &failed)
                            .map_err(|e| e.context(format!("slot {} of {label}", t + 1)))?;
                        reelections += 1;
                    }
                }
            }
        }
        timings.consensus += start.elapsed();

        let start = Instant::now();
        let totals = decrypt_day(params, &keys, &enc)?;
        let true_load = slot_sums(&honest.iter().map(|s| s.readings.clone()).collect::<Vec<_>>(), d);
        let dtm = dtm_slots(&true_load, &cfg.loss, &mut loss_rng);
        let e_dtm: i64 = dtm.iter().sum();
        let e_sum: i64 = totals.iter().sum();
        let verdict = judge_area(&JudgementInput {
            e_dtm: e_dtm as f64,
            e_sum: e_sum as f64,
            e_tl,
            epsilon,
        });
        timings.decryption += start.elapsed();

        let start = Instant::now();
        let mut detection = Vec::new();
        if verdict.is_theft() {
            for (i, id) in keys.meters.iter().enumerate() {
                let products = decrypt_first_layer(&enc.ciphers[i], &model.first, &dw[i], params.codec.max_reading_units())?;
                let inf = infer(DetectorInput::Private(&products), model)?;
                meter_pred.push(inf.is_theft());
                meter_label.push(attacked[i]);
                detection.push(MeterDetection {
                    meter: *id,
                    period: dw[i].period.clone(),
                    prob_theft: inf.probs[1],
                    flagged: inf.is_theft(),
                });
            }
        }
        timings.detection += start.elapsed();

        day_pred.push(verdict.is_theft());
        day_label.push(attacked.iter().any(|x| *x));
        days.push(DayReport {
            day: label,
            miner: election.miner,
            reelections,
            slot_totals: totals,
            dtm,
            e_dtm,
            e_sum,
            reported_sum: reported.iter().flatten().sum(),
            verdict,
            attacked_meters: keys
                .meters
                .iter()
                .zip(&attacked)
                .filter(|(_, x)| **x)
                .map(|(id, _)| *id)
                .collect(),
            detection,
        });
    }
    let chain_valid = validate_chain(params, &chain) == ChainStatus::Ok;
    let report = AreaReport {
        area: a,
        meters: keys.meters.clone(),
        e_tl,
        epsilon,
        chain_file: chain_file_name(report_name, a),
        chain_head: chain.blocks.last().map(|b| hex::encode(b.hash)).unwrap_or_default(),
        blocks: chain.len(),
        chain_valid,
        days,
        judgement: evaluate(&day_pred, &day_label)?,
        detection: if meter_pred.is_empty() {
            None
        } else {
            Some(evaluate(&meter_pred, &meter_label)?)
        },
    };
    Ok((report, chain, wire_bytes))
}

/// The codec-consistent system parameters of a config.
pub fn params_for(codec: FixedPointCodec) -> SystemParams {
    SystemParams {
        codec,
        ..SystemParams::default()
    }
}

#[cfg(test)]
#[path = "sim_tests.rs"]
mod tests;
