mod common;

use common::{sweep, Run};

#[test]
fn every_feasible_configuration_passes() {
    let mut feasible = 0;
    for (name, run) in sweep(100, 20240601) {
        if let Run::Done(report) = run {
            feasible += 1;
            assert_eq!(report.passed, 100, "{name}: {:?}", report.failures.first());
        }
    }
    // every (p, e, v_a) admits at least the item 3 trial
    assert!(feasible >= common::field_grid().len());
}
