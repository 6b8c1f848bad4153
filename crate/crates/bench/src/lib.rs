//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use spinchain::pulses::{cnot_gates, compile, GateSpec, PulseParams, PulseSchedule, ZProtocol};
use spinchain::{ChainConfig, Result, StateVector};

pub struct Fixture {
    pub config: ChainConfig,
    pub schedule: PulseSchedule,
}

/// Compiled CNOT on `ABC` with the default pulse parameters.
pub fn cnot() -> Result<Fixture> {
    let config = ChainConfig::from_pattern("ABC", 1.0)?;
    let schedule = compile(&cnot_gates(), &config, &PulseParams::default())?;
    Ok(Fixture { config, schedule })
}

/// Detuned-cycle `R_z(π)` on one unit at `α = 0.1`.
pub fn detuned_z(rabi: f64) -> Result<Fixture> {
    let config = ChainConfig::from_pattern("A", 1.0)?;
    let params = PulseParams { z_protocol: ZProtocol::DetunedCycles { rabi, detuning: 10.0 * rabi }, ..PulseParams::default() };
    let schedule = compile(&[GateSpec::Rz(spinchain::UnitKind::A, PI)], &config, &params)?;
    Ok(Fixture { config, schedule })
}

/// Computational basis state with barriers in `|1⟩`, from qubit bits.
pub fn basis(config: &ChainConfig, bits: &str) -> Result<StateVector> {
    let space = spinchain::statespace::compose_chain(config)?;
    let mut q = bits.chars();
    let labels: Vec<_> = config
        .kinds()
        .iter()
        .map(|k| {
            if k.is_barrier() || (k.is_computational() && q.next() == Some('1')) {
                spinchain::Level::One
            } else {
                spinchain::Level::Zero
            }
        })
        .collect();
    space.basis_state(&labels)
}
