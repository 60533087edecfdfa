//! End-to-end verification: runs every numbered check and prints one
//! pass/fail line each. Run with `--nocapture` to see the lines for
//! passing checks too.

use horocorr_core::acceptance::{run_all, CRITERION_COUNT};

#[test]
fn all_criteria_pass() {
    let results = run_all();
    assert_eq!(results.len(), CRITERION_COUNT);
    let mut failures = Vec::new();
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("criterion {:2} {:<18} {status} — {}", r.index, r.name, r.details);
        if !r.passed {
            failures.push(format!("criterion {} ({}): {}", r.index, r.name, r.details));
        }
    }
    assert!(
        failures.is_empty(),
        "{} criterion(s) failed:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
