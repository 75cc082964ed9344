use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use petd_core::bls::SigningKey;
use petd_core::fe::{decrypt_aggregate, encrypt_reading, gen_detection_keys, TimestampPoints};
use petd_core::grid::{run_period, SimConfig};
use petd_core::ledger::bench::synthetic_reports;
use petd_core::ledger::{build_block, validate_chain, Chain, ChainStatus, Report};
use petd_core::secure_agg::{setup_area_key, MeterSecret};
use petd_core::{detector, MeterId, SystemParams};

#[test]
fn three_meters_aggregate_through_a_signed_block() {
    let params = SystemParams::default();
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let secrets: std::collections::BTreeMap<_, _> =
        (1..=3).map(|i| (MeterId(i), MeterSecret::generate(&mut rng))).collect();
    let key = setup_area_key(&secrets).unwrap();
    let model = detector::parse_weights(include_str!("../fixtures/weights_small.json")).unwrap();
    let period: Vec<TimestampPoints> = (0..48)
        .map(|t| TimestampPoints::derive(&params, &format!("2009-07-15/slot{t}")))
        .collect();
    let slot = &period[0];

    let readings = [1200, 0, 65000];
    let reports: Vec<Report> = secrets
        .iter()
        .zip(readings)
        .map(|((id, s), r)| {
            let sk = SigningKey::new(s.x).unwrap();
            let dw = gen_detection_keys(&s.s, &model.first, &period).unwrap();
            let c = encrypt_reading(&s.s, slot, r, &params.codec).unwrap();
            Report::sign(*id, &sk, c, slot.clone(), dw)
        })
        .collect();

    let mut chain = Chain::new();
    let block = build_block(&params, chain.tip(), &reports, 1, slot, chain.registry()).unwrap();
    chain.push(block);
    assert_eq!(validate_chain(&params, &chain), ChainStatus::Ok);

    let ciphers: Vec<_> = chain.blocks[0].records.iter().map(|r| r.cipher).collect();
    assert_eq!(decrypt_aggregate(&ciphers, &key, slot, 3 * 65000).unwrap(), 66200);
}

#[test]
fn chain_survives_a_json_round_trip() {
    let params = SystemParams::default();
    let mut chain = Chain::new();
    for b in 0..2u64 {
        let ts = TimestampPoints::derive(&params, &format!("2009-07-15/slot{b}"));
        let reports = synthetic_reports(&params, 4, &ts, 40 + b).unwrap();
        let block = build_block(&params, chain.tip(), &reports, b + 1, &ts, chain.registry()).unwrap();
        chain.push(block);
    }
    let back = Chain::from_json(&chain.to_json()).unwrap();
    assert_eq!(back, chain);
    assert_eq!(validate_chain(&params, &back), ChainStatus::Ok);

    let mut bad = back.clone();
    bad.blocks.swap(0, 1);
    assert_eq!(validate_chain(&params, &bad), ChainStatus::BadHeight(0));
}

#[test]
fn config_text_round_trips_and_runs() {
    let text = "seed = 4\n[topology]\nareas = 1\nmeters_per_area = 2\n[model]\nunits = 4\n[loss]\nhistory_days = 8\n";
    let cfg = SimConfig::from_toml(text).unwrap();
    let again = SimConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, again);
    let out = run_period(&cfg, "p.json").unwrap();
    assert!(out.report.areas[0].chain_valid);
    assert_eq!(out.chains[0].len(), 48);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let err = SimConfig::from_toml("seed = 1\ncolour = 3\n[topology]\nareas = 1\nmeters_per_area = 2\n").unwrap_err();
    assert!(err.to_string().contains("colour"), "{err}");
}
