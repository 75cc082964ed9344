use super::*;
use crate::grid::attack::AttackKind;
use crate::grid::config::{AttackEntry, FaultEntry, TopologyConfig};

fn small(seed: u64, meters: usize, days: usize) -> SimConfig {
    let mut cfg = SimConfig::new(
        seed,
        TopologyConfig {
            areas: 1,
            meters_per_area: meters,
            period_slots: 48,
            days,
        },
    );
    cfg.model.units = 6;
    cfg.loss.history_days = 10;
    cfg
}

#[test]
fn honest_area_is_clear_and_conserves() {
    let out = run_period(&small(1, 4, 2), "r.json").unwrap();
    let area = &out.report.areas[0];
    assert!(area.chain_valid);
    assert_eq!(area.blocks, 96);
    assert_eq!(area.chain_file, "r.area0.chain.json");
    for day in &area.days {
        assert_eq!(day.verdict, Verdict::Clear);
        assert_eq!(day.e_sum, day.reported_sum);
        assert!(day.detection.is_empty());
    }
    assert_eq!(out.report.bytes.measured_per_report, 600);
    assert_eq!(out.report.bytes.per_report, 600);
    assert!(recheck_report(&out.report).is_empty());
}

#[test]
fn f1_half_is_flagged_and_detected_privately() {
    let mut cfg = small(2, 4, 1);
    cfg.attacks.push(AttackEntry {
        area: 0,
        meter: 1,
        days: None,
        spec: AttackSpec::f1(0.5),
    });
    let out = run_period(&cfg, "r.json").unwrap();
    let area = &out.report.areas[0];
    let day = &area.days[0];
    assert_eq!(day.verdict, Verdict::Theft);
    assert_eq!(day.attacked_meters, vec![area.meters[1]]);
    assert_eq!(day.detection.len(), 4);
    assert_eq!(area.judgement.tp, 1);

    let model = load_model(&cfg).unwrap();
    let from_chain = detect_chain(&out.chains[0], &model).unwrap();
    assert_eq!(from_chain, day.detection);
}

#[test]
fn runs_are_deterministic() {
    let mut cfg = small(3, 3, 1);
    cfg.attacks.push(AttackEntry {
        area: 0,
        meter: 0,
        days: None,
        spec: AttackSpec::new(AttackKind::F4),
    });
    let a = run_period(&cfg, "x.json").unwrap();
    let b = run_period(&cfg, "x.json").unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());
    assert_eq!(a.chains[0].to_json(), b.chains[0].to_json());
    let c = run_period(&small(4, 3, 1), "x.json").unwrap();
    assert_ne!(a.report.to_json(), c.report.to_json());
}

#[test]
fn zero_meters_is_a_topology_error() {
    let cfg = small(1, 0, 1);
    assert!(matches!(run_period(&cfg, "r.json"), Err(Error::Topology(_))));
}

#[test]
fn dissent_beyond_quorum_exhausts_miners() {
    let mut cfg = small(5, 3, 1);
    for m in 0..2 {
        cfg.faults.push(FaultEntry {
            area: 0,
            meter: m,
            behavior: Behavior::AlwaysDissent,
        });
    }
    let err = run_period(&cfg, "r.json").unwrap_err();
    assert!(matches!(err.root(), Error::NoCandidate), "{err}");

    let mut cfg = small(5, 4, 1);
    cfg.faults.push(FaultEntry {
        area: 0,
        meter: 3,
        behavior: Behavior::AlwaysDissent,
    });
    let out = run_period(&cfg, "r.json").unwrap();
    assert!(out.report.areas[0].chain_valid);
    assert_eq!(out.report.areas[0].days[0].reelections, 0);
}

#[test]
fn csv_dataset_drives_the_period() {
    let c = FixedPointCodec::default();
    let series = synthetic_readings(
        &SyntheticSpec {
            meters: 3,
            days: 11,
            d: 48,
            first_meter: 500,
            seed: 8,
        },
        &c,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    crate::grid::dataset::write_readings(std::fs::File::create(&path).unwrap(), &series, &c).unwrap();
    let mut cfg = small(6, 3, 1);
    cfg.dataset.path = Some(path);
    let out = run_period(&cfg, "r.json").unwrap();
    assert_eq!(out.report.areas[0].meters, vec![MeterId(500), MeterId(501), MeterId(502)]);
    assert_eq!(out.report.areas[0].days[0].day, "2009-07-25");

    cfg.topology.days = 2;
    assert!(matches!(run_period(&cfg, "r.json"), Err(Error::Topology(_))));
    cfg.dataset.path = Some(dir.path().join("missing.csv"));
    assert!(matches!(run_period(&cfg, "r.json"), Err(Error::Parse { .. })));
}

#[test]
fn judgement_experiment_small() {
    let loss = LossConfig::default();
    let params = SystemParams::default();
    let honest = judgement_experiment(&params, 5, 5, None, &loss, 11).unwrap();
    for d in &honest.days {
        assert_eq!(d.e_sum, d.true_sum);
        assert_eq!(d.verdict, Verdict::Clear);
    }
    let attacked = judgement_experiment(&params, 5, 5, Some((2, AttackSpec::f1(0.3))), &loss, 11).unwrap();
    assert!(attacked.days.iter().all(|d| d.verdict == Verdict::Theft));
    assert!(attacked.days.iter().all(|d| d.e_sum == d.reported_sum));
}

#[test]
fn dtm_without_noise_is_exact() {
    let loss = LossConfig {
        fixed_units: 5,
        rate: 0.0,
        noise_units: 0,
        history_days: 7,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    assert_eq!(dtm_slots(&[10, 20], &loss, &mut rng), vec![15, 25]);
}
