mod common;

use std::f64::consts::PI;

use steerlab::states::{load_state, make_family_state, save_state, FamilyParams, StateMeta};
use steerlab::Error;

#[test]
fn family_state_round_trips_through_a_file() {
    let rho = make_family_state(FamilyParams::new(0.7, PI / 6.0).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    let meta = StateMeta { p: 0.7, theta: PI / 6.0 };
    save_state(&path, &rho, Some(meta)).unwrap();
    let (back, back_meta) = load_state(&path).unwrap();
    assert_eq!(back_meta, Some(meta));
    let diff = (back.matrix() - rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff <= 1e-15, "{diff}");
}

#[test]
fn random_states_round_trip_exactly() {
    let mut rng = common::rng(3);
    let dir = tempfile::tempdir().unwrap();
    for i in 0..10 {
        let rho = common::random_state(&mut rng);
        let path = dir.path().join(format!("s{i}.json"));
        save_state(&path, &rho, None).unwrap();
        let (back, meta) = load_state(&path).unwrap();
        assert!(meta.is_none());
        assert_eq!(back.matrix(), rho.matrix());
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_state(&dir.path().join("absent.json")), Err(Error::Io(_))));
}
