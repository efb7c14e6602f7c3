use std::time::Instant;

use superchannel::demo::{run_all, DemoOptions};

#[test]
fn acceptance_suite() {
    let start = Instant::now();
    let outcomes = run_all(&DemoOptions { parallel: true, ..Default::default() });
    for o in &outcomes {
        println!("{o}");
    }
    let total = start.elapsed().as_secs_f64();
    println!("suite wall clock {total:.1} s");
    assert!(total < 300.0, "suite took {total:.1} s");
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn forced_failure_path() {
    let strict = DemoOptions { tol: Some(1e-30), max_iter: Some(500), ..Default::default() };
    for id in [3, 7, 8, 12] {
        let o = superchannel::demo::run_criterion(id, &strict);
        println!("{o}");
        assert!(!o.passed, "criterion {id} passed with tolerance 1e-30");
        assert!(!o.detail.is_empty());
    }
}
