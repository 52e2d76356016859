//! Acceptance criteria at full scale, one PASS/FAIL line each.

use noisy_clustering::verify::{acceptance_suite, Level};

#[test]
fn acceptance_criteria() {
    let results = acceptance_suite(Level::Full);
    for (i, r) in results.iter().enumerate() {
        println!("[{:>2}] {}", i + 1, r.line());
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
