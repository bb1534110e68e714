//! One test per acceptance criterion, at full trial counts. Each prints its
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Criteria 6 and 7 cannot hold as stated: the witness set of criterion 6
//! double-counts each alpha with -alpha, and J_{8,3}(H) exceeds H^10.5 for
//! every H >= 4. Those two tests print FAIL and assert the failure is exactly
//! the one we expect, so any other change in behaviour still breaks the build.

use smallbox::acceptance::{run_criterion, AcceptanceOptions, CriterionOutcome, DEFAULT_SEED};

fn run(id: u32) -> CriterionOutcome {
    let opts = AcceptanceOptions {
        seed: DEFAULT_SEED,
        quick: false,
    };
    let o = run_criterion(id, &opts).unwrap_or_else(|e| panic!("criterion {id}: {e}"));
    println!("{}", o.line());
    o
}

fn must_pass(id: u32) {
    let o = run(id);
    assert!(o.pass, "{}", o.line());
}

#[test]
fn c01_counting_oracle_equivalence() {
    must_pass(1);
}

#[test]
fn c02_weil_regime() {
    must_pass(2);
}

#[test]
fn c03_trivial_class_size_bound() {
    must_pass(3);
}

#[test]
fn c04_census_identities() {
    must_pass(4);
}

#[test]
fn c05_class_count_shape() {
    must_pass(5);
}

#[test]
fn c06_sharpness_expected_failure() {
    let o = run(6);
    assert!(!o.pass);
    // class of x^3 + x in [0, 64]^2 mod 1009: 6 vectors, all found by the scan
    assert_eq!(o.value, 6.0);
    assert_eq!(o.oracle, Some(6.0));
    assert_eq!(o.bound, Some(8.0));
}

#[test]
fn c07_vinogradov_expected_failure() {
    let o = run(7);
    assert!(!o.pass);
    assert!(o.detail.contains("2:12870"), "{}", o.detail);
    assert!(
        o.detail.contains("J_2,2 = 2H^2-H up to 50: true"),
        "{}",
        o.detail
    );
    assert!(o.detail.contains("exhaustive agrees"), "{}", o.detail);
    assert_eq!(o.oracle, Some(12870.0));
    // worst J / H^10.5 over H >= 4
    assert!(o.value > 1.0);
}

#[test]
fn c08_successive_minima_inequality() {
    must_pass(8);
}

#[test]
fn c09_determinant_congruence_cap() {
    must_pass(9);
}

#[test]
fn c10_dynamical_systems() {
    must_pass(10);
}

#[test]
fn c11_erdos_turan() {
    must_pass(11);
}

#[test]
fn c12_weyl_identity_and_majorant() {
    must_pass(12);
}

#[test]
fn c13_isomorphism_relation_algebra() {
    must_pass(13);
}
