//! Executable acceptance criteria. Each check returns a [`CriterionResult`]
//! with the measured figure, its threshold and the verdict.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::time::Instant;

use nalgebra::DVector;

use crate::dynamics::{propagate_lindblad, propagate_lindblad_with, propagate_unitary, propagator, DecoherenceSpec};
use crate::error::Result;
use crate::hamiltonians::{raman_rate, spin_frame_drive, LaserParams, Transition};
use crate::linalg::{re, HermitianEigen, Operator, C64};
use crate::metrics::{gate_fidelity, leakage, project_qubits, purity, state_fidelity};
use crate::ode::OdeOptions;
use crate::pulses::{
    cnot_gates, compile, nominal_entangling_time, passivation_pulse, window_interval, GateSpec, Interval, PulseParams,
    PulseSchedule, ZProtocol,
};
use crate::statespace::{compose_chain, ChainConfig, DensityMatrix, Level, StateVector, UnitKind, UnitSpec};
use crate::trion::{
    crosstalk_report, dipole_hamiltonian, exact_flip_rate, rz, CrosstalkParams, Polarization, TrionParams, TRION_DOWN,
    TRION_UP, UP,
};
use crate::metrics::{fom_raman, fom_z, FomParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.comparison {
            Comparison::AtLeast => ">=",
            Comparison::AtMost => "<=",
        };
        write!(
            f,
            "[{}] {:>2} {:<17} measured={:<12.6e} threshold {op} {:<10.3e} ({:.2}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.threshold,
            self.seconds,
            self.detail
        )
    }
}

/// Chain coupling used in the simulations and the coupling assumed when
/// timing the entangling window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub j: f64,
    pub timing_j: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { j: 1.0, timing_j: 1.0 }
    }
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "entangling-gate"),
    (2, "cnot"),
    (3, "passivation"),
    (4, "raman-rate"),
    (5, "leakage"),
    (6, "purity-ordering"),
    (7, "two-pulse-z"),
    (8, "trion"),
    (9, "crosstalk"),
    (10, "open-system"),
    (11, "figures-of-merit"),
];

fn name_of(id: u8) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown")
}

struct Outcome {
    measured: f64,
    threshold: f64,
    comparison: Comparison,
    extra_ok: bool,
    detail: String,
}

impl Outcome {
    fn passed(&self) -> bool {
        let ok = match self.comparison {
            Comparison::AtLeast => self.measured >= self.threshold,
            Comparison::AtMost => self.measured <= self.threshold,
        };
        ok && self.extra_ok
    }
}

fn timed(id: u8, f: impl FnOnce() -> Result<Outcome>) -> CriterionResult {
    let start = Instant::now();
    let out = f();
    let seconds = start.elapsed().as_secs_f64();
    match out {
        Ok(o) => CriterionResult {
            id,
            name: name_of(id),
            measured: o.measured,
            threshold: o.threshold,
            comparison: o.comparison,
            passed: o.passed(),
            detail: o.detail,
            seconds,
        },
        Err(e) => CriterionResult {
            id,
            name: name_of(id),
            measured: f64::NAN,
            threshold: f64::NAN,
            comparison: Comparison::AtMost,
            passed: false,
            detail: format!("error: {e}"),
            seconds,
        },
    }
}

/// Runs the criteria whose name contains `filter` (all when `None`).
pub fn run(settings: &Settings, filter: Option<&str>) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|(id, name)| filter.is_none_or(|f| name.contains(f) || id.to_string() == f))
        .map(|&(id, _)| run_one(id, settings))
        .collect()
}

pub fn run_one(id: u8, settings: &Settings) -> CriterionResult {
    match id {
        1 => entangling_gate(settings),
        2 => cnot_truth_table(settings),
        3 => passivation_fidelity(),
        4 => raman_rate_law(),
        5 => leakage_bound(),
        6 => purity_ordering(),
        7 => two_pulse_z_gate(),
        8 => trion_selectivity(),
        9 => crosstalk_correction(),
        10 => open_system(),
        11 => figures_of_merit(),
        _ => timed(id, || Err(crate::Error::param("criterion", format!("no criterion {id}")))),
    }
}

/// The two-qubit gate produced by the entangling window.
pub fn ue_target_matrix() -> Operator {
    let mut m = Operator::zeros(4, 4);
    m[(0, 0)] = re(1.0);
    m[(1, 2)] = re(-1.0);
    m[(2, 1)] = re(-1.0);
    m[(3, 3)] = re(-1.0);
    m
}

/// Largest entry of `|a·e^{-iγ} − b|` with γ aligning the traces.
pub fn phase_aligned_error(a: &Operator, b: &Operator) -> f64 {
    let tr: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let g = if tr.norm() > 0.0 { tr.conj() / tr.norm() } else { re(1.0) };
    (a * g - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn abc(j: f64) -> Result<ChainConfig> {
    ChainConfig::from_pattern("ABC", j)
}

/// Projected (A,C) block with the barrier pinned to |1⟩, and the smallest
/// probability of the barrier returning to |1⟩ over qubit inputs.
fn ac_block(u: &Operator, cfg: &ChainConfig) -> Result<(Operator, f64)> {
    let space = compose_chain(cfg)?;
    let p = project_qubits(u, &space, &[0, 2], &[(1, Level::One)])?;
    let mut worst: f64 = 1.0;
    for c in 0..4 {
        let col = p.column(c);
        worst = worst.min(col.iter().map(|z| z.norm_sqr()).sum());
    }
    Ok((p, worst))
}

pub fn entangling_gate(settings: &Settings) -> CriterionResult {
    timed(1, || {
        let cfg = abc(settings.j)?;
        let t = nominal_entangling_time(settings.timing_j);
        let s = PulseSchedule::from_intervals(vec![window_interval(UnitKind::B, t, 100.0, settings.j)?]);
        let (p, ret) = ac_block(&propagator(&s, &cfg)?, &cfg)?;
        let err = phase_aligned_error(&p, &ue_target_matrix());

        let compiled = compile(&[GateSpec::Ue(UnitKind::B)], &cfg, &PulseParams::default())?;
        let (pc, _) = ac_block(&propagator(&compiled, &cfg)?, &cfg)?;
        let compiled_err = phase_aligned_error(&pc, &ue_target_matrix());
        Ok(Outcome {
            measured: err,
            threshold: 1e-6,
            comparison: Comparison::AtMost,
            extra_ok: ret >= 1.0 - 1e-6,
            detail: format!(
                "t={t:.4}ps barrier_return={ret:.9} fidelity_vs_Ue={:.6}; compiled Ue window error={compiled_err:.2e}",
                gate_fidelity(&p, &ue_target_matrix())?
            ),
        })
    })
}

/// Final populations of the CNOT-correct outputs for inputs 00, 01, 10, 11
/// (control A, target C).
pub fn cnot_populations(cfg: &ChainConfig, params: &PulseParams) -> Result<[f64; 4]> {
    let s = compile(&cnot_gates(), cfg, params)?;
    let (p, _) = ac_block(&propagator(&s, cfg)?, cfg)?;
    let mut out = [0.0; 4];
    for (input, o) in out.iter_mut().enumerate() {
        let a = input >> 1;
        let c = input & 1;
        let expected = (a << 1) | (c ^ a);
        *o = p[(expected, input)].norm_sqr();
    }
    Ok(out)
}

pub fn cnot_truth_table(settings: &Settings) -> CriterionResult {
    timed(2, || {
        let cfg = abc(settings.j)?;
        let pops = cnot_populations(&cfg, &PulseParams::default())?;
        Ok(Outcome {
            measured: pops.iter().copied().fold(f64::INFINITY, f64::min),
            threshold: 0.99,
            comparison: Comparison::AtLeast,
            extra_ok: true,
            detail: format!("00:{:.4} 01:{:.4} 10:{:.4} 11:{:.4}", pops[0], pops[1], pops[2], pops[3]),
        })
    })
}

fn qubit_ket(a: C64, b: C64) -> StateVector {
    StateVector::new(DVector::from_vec(vec![a, b, re(0.0)]))
}

/// Input pair states used for pair fidelities: 00, 01, 10, 11 and ++.
pub fn probe_pairs() -> Vec<(&'static str, StateVector, StateVector)> {
    let zero = qubit_ket(re(1.0), re(0.0));
    let one = qubit_ket(re(0.0), re(1.0));
    let plus = qubit_ket(re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2));
    vec![
        ("00", zero.clone(), zero.clone()),
        ("01", zero.clone(), one.clone()),
        ("10", one.clone(), zero.clone()),
        ("11", one.clone(), one.clone()),
        ("++", plus.clone(), plus),
    ]
}

pub fn passivation_fidelity() -> CriterionResult {
    timed(3, || {
        let j = 1.0;
        let t = nominal_entangling_time(j);
        let cfg = abc(j)?.with_tau_x(t)?;
        let hold = Interval::new(t)
            .with(passivation_pulse(UnitKind::B, 100.0, t, j)?)?
            .with(passivation_pulse(UnitKind::D, 100.0, t, j)?)?;
        let s = PulseSchedule::from_intervals(vec![hold]);
        let space = compose_chain(&cfg)?;
        let barrier = qubit_ket(re(0.0), re(1.0));
        let deco = DecoherenceSpec::new(t)?;
        let mut worst: f64 = 1.0;
        let mut parts = Vec::new();
        for (label, a, c) in probe_pairs() {
            let psi = StateVector::product(&[a.clone(), barrier.clone(), c.clone()]);
            let tr = propagate_lindblad(&s, &cfg, &psi.to_density(), &deco, t)?;
            let pair = space.reduce(&tr.final_density(), &[0, 2])?;
            let ideal = StateVector::product(&[a, c]);
            let f = state_fidelity(&pair, &ideal.0)?;
            parts.push(format!("{label}:{f:.5}"));
            worst = worst.min(f);
        }
        Ok(Outcome {
            measured: worst,
            threshold: 0.995,
            comparison: Comparison::AtLeast,
            extra_ok: true,
            detail: format!("Ω=100 τ_X=t_R={t:.4}ps {}", parts.join(" ")),
        })
    })
}

/// Rate `π/t*` from the first population maximum of `|1⟩` under a
/// Raman drive started in `|0⟩`, searched over one predicted period.
pub fn measured_raman_rate(rabi: f64, detuning: f64) -> Result<f64> {
    let unit = UnitSpec::with_defaults(UnitKind::A, 0.0);
    let lasers = [
        LaserParams::new(UnitKind::A, Transition::ZeroX, rabi, detuning, 0.0),
        LaserParams::new(UnitKind::A, Transition::OneX, rabi, detuning, 0.0),
    ];
    let (h, _) = spin_frame_drive(&unit, &lasers)?;
    let eig = HermitianEigen::new(&h);
    let psi0 = DVector::from_vec(vec![re(1.0), re(0.0), re(0.0)]);
    let window = 2.0 * PI / raman_rate(rabi, rabi, detuning);
    let steps = 200_000;
    let dt = window / steps as f64;
    let (best, _) = (1..steps)
        .map(|k| (k, eig.evolve(&psi0, k as f64 * dt)[1].norm_sqr()))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(PI / (best as f64 * dt))
}

pub fn raman_rate_law() -> CriterionResult {
    timed(4, || {
        let rabi = 5.0;
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for alpha in [0.05, 0.1] {
            let delta = rabi / alpha;
            let m = measured_raman_rate(rabi, delta)?;
            let p = raman_rate(rabi, rabi, delta);
            let rel = (m - p).abs() / p;
            parts.push(format!("α={alpha}: {m:.5} vs {p:.5}"));
            worst = worst.max(rel);
        }
        Ok(Outcome {
            measured: worst,
            threshold: 0.05,
            comparison: Comparison::AtMost,
            extra_ok: true,
            detail: parts.join(", "),
        })
    })
}

pub fn leakage_bound() -> CriterionResult {
    timed(5, || {
        let rabi = 5.0;
        let cfg = ChainConfig::from_pattern("A", 1.0)?;
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for alpha in [0.05, 0.1, 0.25] {
            let params = PulseParams { raman_rabi: rabi, raman_detuning: rabi / alpha, ..PulseParams::default() };
            let s = compile(&[GateSpec::Rx(UnitKind::A, PI)], &cfg, &params)?;
            let psi = qubit_ket(re(1.0), re(0.0));
            let tr = propagate_unitary(&s, &cfg, &psi, 1e-3)?;
            let ratio = leakage(&tr) / (4.0 * alpha * alpha);
            parts.push(format!("α={alpha}: peak/4α²={ratio:.4}"));
            worst = worst.max(ratio);
        }
        Ok(Outcome {
            measured: worst,
            threshold: 1.5,
            comparison: Comparison::AtMost,
            extra_ok: true,
            detail: parts.join(", "),
        })
    })
}

/// Final purity of a single qubit starting in `|+⟩` after a detuned-cycle
/// `R_z(π)` with `τ_X = 0.1/Ω`.
pub fn detuned_z_purity(rabi: f64, alpha: f64, opts: &OdeOptions) -> Result<f64> {
    let tau = 0.1 / rabi;
    let cfg = ChainConfig::from_pattern("A", 1.0)?.with_tau_x(tau)?;
    let params = PulseParams {
        z_protocol: ZProtocol::DetunedCycles { rabi, detuning: rabi / alpha },
        ..PulseParams::default()
    };
    let s = compile(&[GateSpec::Rz(UnitKind::A, PI)], &cfg, &params)?;
    let plus = qubit_ket(re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2));
    let dur = s.total_duration();
    let tr = propagate_lindblad_with(&s, &cfg, &plus.to_density(), &DecoherenceSpec::new(tau)?, dur, opts)?;
    Ok(purity(&tr.final_density()))
}

pub fn purity_ordering() -> CriterionResult {
    timed(6, || {
        let rabi = 10.0;
        let alphas = [0.5, 0.25, 0.1];
        let opts = OdeOptions::default();
        let mut purities = Vec::new();
        let mut drift: f64 = 0.0;
        for &a in &alphas {
            let p = detuned_z_purity(rabi, a, &opts)?;
            let q = detuned_z_purity(rabi, a, &opts.halved())?;
            drift = drift.max((p - q).abs());
            purities.push(p);
        }
        let min_step = purities.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Ok(Outcome {
            measured: min_step,
            threshold: 0.0,
            comparison: Comparison::AtLeast,
            extra_ok: min_step > 0.0 && drift <= 1e-6,
            detail: format!(
                "purity α=0.5:{:.6} α=0.25:{:.6} α=0.1:{:.6}; step-halving drift={drift:.2e}",
                purities[0], purities[1], purities[2]
            ),
        })
    })
}

pub fn two_pulse_z_gate() -> CriterionResult {
    timed(7, || {
        let cfg = ChainConfig::from_pattern("A", 1.0)?;
        let space = compose_chain(&cfg)?;
        let mut worst: f64 = 1.0;
        let mut parts = Vec::new();
        for dphi in [0.0, PI / 2.0, PI] {
            let s = compile(&[GateSpec::Rz(UnitKind::A, dphi + PI)], &cfg, &PulseParams::default())?;
            let u = project_qubits(&propagator(&s, &cfg)?, &space, &[0], &[])?;
            let f = gate_fidelity(&rz(dphi + PI), &u)?;
            parts.push(format!("Δφ={dphi:.4}: {f:.12}"));
            worst = worst.min(f);
        }
        Ok(Outcome {
            measured: worst,
            threshold: 1.0 - 1e-6,
            comparison: Comparison::AtLeast,
            extra_ok: true,
            detail: parts.join(", "),
        })
    })
}

pub fn trion_selectivity() -> CriterionResult {
    timed(8, || {
        let (omega, delta) = (5.0, 100.0);
        let h = dipole_hamiltonian(&Polarization::Circular, omega, 0.0)?;
        let eig = HermitianEigen::new(&h);
        let mut up = DVector::zeros(4);
        up[UP] = re(1.0);
        let trion = (0..=2000)
            .map(|k| {
                let v = eig.evolve(&up, k as f64 * 0.01);
                v[TRION_UP].norm_sqr() + v[TRION_DOWN].norm_sqr()
            })
            .fold(0.0, f64::max);
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * PI / 40.0).collect();
        let rates = grid
            .iter()
            .map(|&th| TrionParams::new(omega, th, delta).map(|p| exact_flip_rate(&p)))
            .collect::<Result<Vec<_>>>()?;
        let argmax = rates.iter().enumerate().fold(0, |b, (i, r)| if *r > rates[b] { i } else { b });
        let zero_ok = rates[0] <= 1e-4;
        let peak_ok = argmax == 10;
        Ok(Outcome {
            measured: trion,
            threshold: 1e-6,
            comparison: Comparison::AtMost,
            extra_ok: zero_ok && peak_ok,
            detail: format!("rate(0)={:.2e} argmax θ={:.4} rate(π/4)={:.5}", rates[0], grid[argmax], rates[10]),
        })
    })
}

pub fn crosstalk_correction() -> CriterionResult {
    timed(9, || {
        let p = CrosstalkParams::default();
        let bare = crosstalk_report(&p, PI / 2.0, false)?;
        let fixed = crosstalk_report(&p, PI / 2.0, true)?;
        Ok(Outcome {
            measured: fixed.other_population_change,
            threshold: 0.01,
            comparison: Comparison::AtMost,
            extra_ok: bare.other_population_change >= 0.1 && fixed.target_fidelity >= 0.99,
            detail: format!(
                "uncorrected ΔC={:.4} corrected ΔC={:.4} F_A={:.5}",
                bare.other_population_change, fixed.other_population_change, fixed.target_fidelity
            ),
        })
    })
}

pub fn open_system() -> CriterionResult {
    timed(10, || {
        let cfg = abc(1.0)?;
        let s = compile(&[GateSpec::Rx(UnitKind::A, PI / 2.0), GateSpec::Ue(UnitKind::B)], &cfg, &PulseParams::default())?;
        let plus = qubit_ket(re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2));
        let one = qubit_ket(re(0.0), re(1.0));
        let psi = StateVector::product(&[plus, one.clone(), one]);
        let rho0 = psi.to_density();

        let lossy = propagate_lindblad(&s, &cfg, &rho0, &DecoherenceSpec::new(2.0)?, 0.5)?;
        let trace_drift = (0..lossy.len()).map(|k| (lossy.density(k).trace().re - 1.0).abs()).fold(0.0, f64::max);

        let closed = propagate_lindblad(&s, &cfg, &rho0, &DecoherenceSpec::new(f64::INFINITY)?, 0.5)?;
        let unitary = propagate_unitary(&s, &cfg, &psi, 0.5)?;
        let mut closed_err: f64 = 0.0;
        for k in 0..closed.len() {
            let d = closed.density(k).0 - unitary.density(k).0;
            closed_err = closed_err.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }

        let single = ChainConfig::from_pattern("A", 1.0)?;
        let idle = PulseSchedule::from_intervals(vec![Interval::new(3.0)
            .with(crate::pulses::PulseSpec::idle(UnitKind::A, 3.0))?
            .with(passivation_pulse(UnitKind::B, 100.0, 3.0, 1.0)?)?]);
        let x = StateVector::new(DVector::from_vec(vec![re(0.0), re(0.0), re(1.0)]));
        let tau = 1.0;
        let decay = propagate_lindblad(&idle, &single, &DensityMatrix::from_pure(&x), &DecoherenceSpec::new(tau)?, 0.05)?;
        let decay_err = (0..decay.len())
            .map(|k| (decay.populations(k)[2] - (-decay.times[k] / tau).exp()).abs())
            .fold(0.0, f64::max);

        let ratio = (trace_drift / 1e-9).max(closed_err / 1e-6).max(decay_err / 1e-6);
        Ok(Outcome {
            measured: ratio,
            threshold: 1.0,
            comparison: Comparison::AtMost,
            extra_ok: true,
            detail: format!(
                "worst error/tolerance; trace drift={trace_drift:.2e} closed-limit={closed_err:.2e} decay={decay_err:.2e}"
            ),
        })
    })
}

pub fn figures_of_merit() -> CriterionResult {
    timed(11, || {
        let p = FomParams::new(10.0, 0.1, 1.0, 100.0)?;
        let e1 = (fom_raman(&p) - 10.0 * 1.0 / (4.0 * PI * 0.1)).abs();
        let z = FomParams::new(10.0, 0.1, 0.01, 100.0)?;
        let e2 = (fom_z(&z) - 0.01 * 100.0 / (4.0 * PI)).abs();
        let z2 = FomParams { delta: 200.0, ..z };
        let e3 = (fom_z(&z2) / fom_z(&z) - 2.0).abs();
        let worst = e1.max(e2).max(e3);
        Ok(Outcome {
            measured: worst,
            threshold: 1e-12,
            comparison: Comparison::AtMost,
            extra_ok: true,
            detail: format!("fom_raman={:.6} fom_z={:.6} fom_z(2δ)/fom_z(δ)={:.6}", fom_raman(&p), fom_z(&z), fom_z(&z2) / fom_z(&z)),
        })
    })
}
