use petd_bench::{random_scalars, slot_fixture};
use petd_core::fe::decrypt_aggregate;
use petd_core::SystemParams;

#[test]
fn slot_fixture_decrypts_to_its_total() {
    let params = SystemParams::default();
    let f = slot_fixture(&params, 12, 3);
    let bound = 12 * params.codec.max_reading_units() as u64;
    assert_eq!(decrypt_aggregate(&f.ciphers, &f.da, &f.ts, bound).unwrap(), f.total);
}

#[test]
fn fixtures_are_seeded() {
    assert_eq!(random_scalars(4, 9), random_scalars(4, 9));
    assert_ne!(random_scalars(4, 9), random_scalars(4, 10));
    let params = SystemParams::default();
    assert_eq!(slot_fixture(&params, 3, 1).total, slot_fixture(&params, 3, 1).total);
}
