//! One test per acceptance criterion. Each prints a single PASS/FAIL line.
//! The three flow runs are computed once and shared across tests.

use std::io::Write;
use std::sync::LazyLock;

use iamcf::acceptance::{self, Criterion, Runs};

static RUNS: LazyLock<Runs> = LazyLock::new(Runs::new);

fn check(c: Criterion) {
    // Written to the handle directly so the line survives test output capture.
    let _ = writeln!(std::io::stdout(), "{}", c.line());
    assert!(c.passed, "{}", c.line());
}

#[test]
fn criterion_1_radial_exactness() {
    check(acceptance::radial_exactness());
}

#[test]
fn criterion_2_barrier_sandwich() {
    check(acceptance::barrier_sandwich(&RUNS));
}

#[test]
fn criterion_3_asymptotic_constant() {
    check(acceptance::asymptotic_constant(&RUNS));
}

#[test]
fn criterion_4_eccentricity_decay() {
    check(acceptance::eccentricity_decay(&RUNS));
}

#[test]
fn criterion_5_gradient_bound() {
    check(acceptance::gradient_bound(&RUNS));
}

#[test]
fn criterion_6_norm_suite() {
    check(acceptance::norm_suite());
}

#[test]
fn criterion_7_minimality() {
    check(acceptance::minimality(&RUNS));
}

#[test]
fn criterion_8_estimates_harness() {
    check(acceptance::estimates_harness());
}
