use lattice_fm::claims::{run_suite, topics};

#[test]
fn every_registered_check_passes() {
    let outcomes = run_suite(None, false);
    assert_eq!(outcomes.len(), 18);
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| format!("{}: {}", o.id, o.detail)).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn corruption_flips_exactly_the_corrupted_entries() {
    let failed: Vec<&str> = run_suite(None, true).into_iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert_eq!(
        failed,
        vec![
            "binary-forms/disc-A",
            "overlattices/unimodular-gluings",
            "picard-rank-one/oguiso",
            "definite-transcendental/vc-orbits",
        ]
    );
}

#[test]
fn every_topic_selects_something() {
    for t in topics() {
        assert!(!run_suite(Some(t), false).is_empty(), "{t}");
    }
}
