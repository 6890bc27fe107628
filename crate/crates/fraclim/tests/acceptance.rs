//! Full acceptance suite; one PASS/FAIL line per criterion.

use fraclim::acceptance::{run_acceptance_with, IDS};
use fraclim::AcceptanceOptions;

#[test]
fn acceptance_suite() {
    let report = run_acceptance_with(&AcceptanceOptions::default(), |c| println!("{}", c.line()));
    assert_eq!(report.criteria.len(), IDS.len());
    let failed: Vec<&str> = report.criteria.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    println!("{} of {} criteria pass", IDS.len() - failed.len(), IDS.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
