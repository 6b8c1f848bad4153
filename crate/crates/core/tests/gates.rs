use std::f64::consts::PI;

use spinchain::acceptance::{cnot_populations, ue_target_matrix, phase_aligned_error};
use spinchain::dynamics::propagator;
use spinchain::linalg::max_abs;
use spinchain::metrics::{gate_fidelity, project_qubits};
use spinchain::pulses::{cnot_gates, compile, GateSpec, PulseParams, PulseSchedule};
use spinchain::statespace::compose_chain;
use spinchain::{ChainConfig, Level, Operator, UnitKind, C64};

fn abc() -> ChainConfig {
    ChainConfig::from_pattern("ABC", 1.0).unwrap()
}

fn ac_block(u: &Operator, cfg: &ChainConfig) -> Operator {
    project_qubits(u, &compose_chain(cfg).unwrap(), &[0, 2], &[(1, Level::One)]).unwrap()
}

#[test]
fn compiled_ue_matches_target_matrix() {
    let cfg = abc();
    let s = compile(&[GateSpec::Ue(UnitKind::B)], &cfg, &PulseParams::default()).unwrap();
    let block = ac_block(&propagator(&s, &cfg).unwrap(), &cfg);
    let err = phase_aligned_error(&block, &ue_target_matrix());
    assert!(err < 2e-3, "{err}");
}

#[test]
fn cnot_sequence_carries_a_control_z() {
    let cfg = abc();
    let params = PulseParams { passivation_rabi: 400.0, ..PulseParams::default() };
    let s = compile(&cnot_gates(), &cfg, &params).unwrap();
    let block = ac_block(&propagator(&s, &cfg).unwrap(), &cfg);
    let one = C64::new(1.0, 0.0);
    let mut zcnot = Operator::zeros(4, 4);
    zcnot[(0, 0)] = -one;
    zcnot[(1, 1)] = -one;
    zcnot[(3, 2)] = one;
    zcnot[(2, 3)] = one;
    assert!(gate_fidelity(&zcnot, &block).unwrap() > 0.99);
}

#[test]
fn stronger_passivation_restores_truth_table() {
    let pops = cnot_populations(&abc(), &PulseParams::default()).unwrap();
    assert!(pops.iter().all(|&p| p > 0.98), "{pops:?}");
    let strong = PulseParams { passivation_rabi: 400.0, ..PulseParams::default() };
    let pops = cnot_populations(&abc(), &strong).unwrap();
    assert!(pops.iter().all(|&p| p > 0.995), "{pops:?}");
}

#[test]
fn schedule_text_preserves_propagator() {
    let cfg = abc();
    let s = compile(&cnot_gates(), &cfg, &PulseParams::default()).unwrap();
    let back: PulseSchedule = s.to_text().parse().unwrap();
    let d = max_abs(&(propagator(&s, &cfg).unwrap() - propagator(&back, &cfg).unwrap()));
    assert!(d < 1e-9, "{d}");
}

#[test]
fn crosstalk_mode_compiles_on_a_longer_chain() {
    let cfg = ChainConfig::from_pattern("ABCDA", 1.0).unwrap().with_crosstalk(true);
    let gates = [GateSpec::Rx(UnitKind::A, PI / 2.0), GateSpec::Ue(UnitKind::B), GateSpec::Rz(UnitKind::C, PI)];
    let s = compile(&gates, &cfg, &PulseParams::default()).unwrap();
    s.validate(Some(1.0)).unwrap();
    assert!(s.len() > 3);
}
