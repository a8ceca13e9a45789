//! Release gate: one test per acceptance criterion. The default harness
//! output gives one pass/fail line per criterion; each test also prints the
//! detailed one-line report (visible with `--nocapture` or on failure).

use ergolab::acceptance::run_criterion;

fn check(id: usize) {
    let report = run_criterion(id);
    let verdict = if report.passed { "pass" } else { "FAIL" };
    println!("C{:02} {verdict} — {}: {}", report.id, report.name, report.details);
    assert!(report.passed, "C{:02} {}: {}", report.id, report.name, report.details);
}

#[test]
fn c01_exact_distance_identities() {
    check(1);
}

#[test]
fn c02_jump_inner_products_match_segment_integration() {
    check(2);
}

#[test]
fn c03_process_expectation_matches_monte_carlo() {
    check(3);
}

#[test]
fn c04_preimage_recursions_match_oracles() {
    check(4);
}

#[test]
fn c05_injectivity_rates_track_the_mean_density_limit() {
    check(5);
}

#[test]
fn c06_short_term_distances_track_the_prediction() {
    check(6);
}

#[test]
fn c07_doubling_map_collapses_exactly() {
    check(7);
}

#[test]
fn c08_orbit_cardinality_laws_hold() {
    check(8);
}

#[test]
fn c09_transfer_operator_is_healthy() {
    check(9);
}

#[test]
fn c10_interrupted_run_resumes_to_identical_bytes() {
    check(10);
}
