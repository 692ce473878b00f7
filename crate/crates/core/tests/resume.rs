use holoflow_core::construct::{build, ConstructConfig, ConstructionState, Outcome};
use holoflow_core::spaces::Space;

const G: &str = "sqrt(log(e/(1-z)))";

#[test]
fn resumed_bloch_run_matches_direct_run() {
    let cfg = |n| ConstructConfig { n_max: n, ..ConstructConfig::default() };
    let direct = build(Space::Bloch, G, &cfg(4), None).unwrap();
    let half = build(Space::Bloch, G, &cfg(2), None).unwrap();
    assert_eq!(half.n(), 2);
    let saved = half.to_json().unwrap();
    let resumed = build(Space::Bloch, G, &cfg(4), Some(ConstructionState::from_json(&saved).unwrap())).unwrap();
    assert_eq!(resumed.n(), 4);
    assert_eq!(resumed.steps, direct.steps);
    assert_eq!(resumed.outcome, Outcome::Completed);
    assert_eq!(resumed.to_json().unwrap(), direct.to_json().unwrap());
}

#[test]
fn state_from_another_construction_is_rejected() {
    let st = build(Space::Bloch, G, &ConstructConfig { n_max: 1, ..ConstructConfig::default() }, None).unwrap();
    assert!(build(Space::Bloch, "log(e/(1-z))", &ConstructConfig::default(), Some(st.clone())).is_err());
    let mut text = st.to_json().unwrap();
    text = text.replacen("\"version\": 1", "\"version\": 99", 1);
    assert!(ConstructionState::from_json(&text).is_err());
}
