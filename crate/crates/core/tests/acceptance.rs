//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use std::time::Duration;

use bittery::verify::{self, CriterionReport};

const SEED: u64 = 20_240_601;

fn gate(report: CriterionReport, budget: Option<Duration>) {
    let in_time = budget.is_none_or(|b| report.elapsed <= b);
    let verdict = if report.passed && in_time { "PASS" } else { "FAIL" };
    println!(
        "[{verdict}] criterion {} ({}): {} [{:.2} s]",
        report.id,
        report.name,
        report.detail,
        report.elapsed.as_secs_f64()
    );
    assert!(report.passed, "criterion {} failed: {}", report.id, report.detail);
    if let Some(b) = budget {
        assert!(report.elapsed <= b, "criterion {} took {:?}, budget {:?}", report.id, report.elapsed, b);
    }
}

#[test]
fn criterion_1_scheme_independence() {
    gate(verify::scheme_independence(SEED), Some(Duration::from_secs(10)));
}

#[test]
fn criterion_2_formula_vs_oracle() {
    gate(verify::formula_vs_oracle(), Some(Duration::from_secs(120)));
}

#[test]
fn criterion_3_schur_property() {
    gate(verify::schur_property(SEED), None);
}

#[test]
fn criterion_4_landauer_convergence() {
    gate(verify::landauer_convergence(), Some(Duration::from_secs(5)));
}

#[test]
fn criterion_5_additional_work() {
    gate(verify::additional_work_properties(), None);
}

#[test]
fn criterion_6_entropy_certificates() {
    gate(verify::entropy_certificates(SEED), None);
}

#[test]
fn criterion_7_free_energy_invariance() {
    gate(verify::free_energy_invariance(SEED), None);
}

#[test]
fn criterion_8_thermal_fixed_point() {
    gate(verify::thermal_fixed_point(SEED), None);
}

#[test]
fn criterion_9_pure_state_smoothing() {
    gate(verify::pure_state_smoothing(), None);
}
