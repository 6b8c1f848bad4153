//! One test per acceptance criterion; each prints a PASS/FAIL line.

use std::io::Write;

use spinchain::acceptance::{run_one, Settings};

fn check(id: u8) {
    let r = run_one(id, &Settings::default());
    // bypasses the harness capture so passing rows show too
    let _ = writeln!(std::io::stderr(), "{r}");
    assert!(r.passed, "{r}");
}

#[test]
fn c01_entangling_gate() {
    check(1);
}

#[test]
fn c02_cnot_truth_table() {
    check(2);
}

#[test]
fn c03_passivation_fidelity() {
    check(3);
}

#[test]
fn c04_raman_rate_law() {
    check(4);
}

#[test]
fn c05_leakage_bound() {
    check(5);
}

#[test]
fn c06_purity_ordering() {
    check(6);
}

#[test]
fn c07_two_pulse_z() {
    check(7);
}

#[test]
fn c08_trion_selectivity() {
    check(8);
}

#[test]
fn c09_crosstalk_correction() {
    check(9);
}

#[test]
fn c10_open_system() {
    check(10);
}

#[test]
fn c11_figures_of_merit() {
    check(11);
}

#[test]
fn corrupted_coupling_fails_entangling_criterion() {
    let r = run_one(1, &Settings { j: 0.9, timing_j: 1.0 });
    println!("{r}");
    assert!(!r.passed);
}
