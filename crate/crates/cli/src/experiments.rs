//! Named experiments. Each writes CSVs, `schedule.txt` where a chain
//! schedule exists, and `summary.txt` into its output directory.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use spinchain::dynamics::{propagate_lindblad, propagate_unitary, propagator, DecoherenceSpec, Trajectory};
use spinchain::metrics::{gate_fidelity, leakage, project_qubits, qubit_indices};
use spinchain::pulses::{cnot_gates, compile, parse_circuit, GateSpec, PulseParams, PulseSchedule, ZProtocol};
use spinchain::statespace::compose_chain;
use spinchain::trion::{crosstalk_report, crosstalk_segments, crosstalk_trajectory, TrionSample};
use spinchain::{ChainConfig, Level, Operator, StateVector, UnitKind, C64};

use crate::config::{resolve, ExperimentConfig, ExperimentName};
use crate::error::{io, setup, sim, CliError, CliResult};

/// Files written by one run, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

pub const DEFAULT_ALPHAS: [f64; 3] = [0.5, 0.25, 0.1];
const CROSSTALK_LEVELS: [&str; 4] = ["up", "down", "trion_up", "trion_down"];

/// Expands a label to one character per unit. Labels may cover every unit or
/// only the computational ones, in which case barriers are set to `1`.
pub fn expand_label(label: &str, kinds: &[UnitKind]) -> CliResult<Vec<char>> {
    let chars: Vec<char> = label.chars().collect();
    if let Some(c) = chars.iter().find(|c| !matches!(c, '0' | '1' | 'X' | '+' | '-')) {
        return Err(CliError::config(format!("experiment.initial: bad level {c:?} in {label:?}")));
    }
    let full = if chars.len() == kinds.len() {
        chars
    } else {
        let comp = kinds.iter().filter(|k| k.is_computational()).count();
        if chars.len() != comp {
            return Err(CliError::config(format!(
                "experiment.initial: {label:?} needs {} or {comp} labels",
                kinds.len()
            )));
        }
        let mut it = chars.into_iter();
        kinds.iter().map(|k| if k.is_computational() { it.next().expect("counted") } else { '1' }).collect()
    };
    for (i, (&c, k)) in full.iter().zip(kinds).enumerate() {
        if k.is_barrier() && c != '1' {
            return Err(CliError::config(format!("experiment.initial: barrier unit {i} in {label:?} must start in 1")));
        }
    }
    Ok(full)
}

fn unit_ket(c: char) -> StateVector {
    let h = FRAC_1_SQRT_2;
    let amps = match c {
        '0' => [1.0, 0.0, 0.0],
        '1' => [0.0, 1.0, 0.0],
        'X' => [0.0, 0.0, 1.0],
        '+' => [h, h, 0.0],
        _ => [h, -h, 0.0],
    };
    StateVector::new(DVector::from_iterator(3, amps.into_iter().map(|a| C64::new(a, 0.0))))
}

pub fn initial_state(label: &str, kinds: &[UnitKind]) -> CliResult<StateVector> {
    let parts: Vec<StateVector> = expand_label(label, kinds)?.into_iter().map(unit_ket).collect();
    Ok(StateVector::product(&parts))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, text: &str, files: &mut Vec<String>) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| io(&path, e))?;
    files.push(name.to_string());
    Ok(())
}

/// Compiles a circuit file against the config's chain and pulse parameters.
pub fn compile_circuit(path: &Path, cfg: &ExperimentConfig) -> CliResult<PulseSchedule> {
    let gates = parse_circuit(&read(path)?).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    compile(&gates, &cfg.chain_config()?, &cfg.pulse_params()).map_err(setup)
}

fn chain_schedule(cfg: &ExperimentConfig, base: &Path, chain: &ChainConfig) -> CliResult<PulseSchedule> {
    let exp = &cfg.experiment;
    if let Some(p) = &exp.schedule {
        let path = resolve(base, p);
        let s: PulseSchedule = read(&path)?.parse().map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        s.validate(Some(chain.j)).map_err(setup)?;
        return Ok(s);
    }
    if let Some(c) = &exp.circuit {
        return compile_circuit(&resolve(base, c), cfg);
    }
    if exp.name == ExperimentName::CnotDemo {
        return compile(&cnot_gates(), chain, &cfg.pulse_params()).map_err(setup);
    }
    Err(CliError::config("experiment: circuit or schedule is required"))
}

fn decoherence(cfg: &ExperimentConfig, rabi: f64) -> CliResult<Option<DecoherenceSpec>> {
    let tau = cfg.tau_x_for(rabi);
    if tau.is_infinite() {
        return Ok(None);
    }
    DecoherenceSpec::with_branch(tau, cfg.branch_to_zero()).map(Some).map_err(setup)
}

fn evolve(
    schedule: &PulseSchedule,
    chain: &ChainConfig,
    psi: &StateVector,
    dec: Option<&DecoherenceSpec>,
    dt: f64,
) -> CliResult<Trajectory> {
    match dec {
        None => propagate_unitary(schedule, chain, psi, dt),
        Some(d) => propagate_lindblad(schedule, chain, &psi.to_density(), d, dt),
    }
    .map_err(sim)
}

fn final_summary(out: &mut String, key: &str, traj: &Trajectory) {
    let last = traj.len() - 1;
    let inside: f64 = qubit_indices(&traj.space).iter().map(|&i| traj.populations(last)[i]).sum();
    let _ = writeln!(out, "peak_leakage_{key} = {:.11e}", leakage(traj));
    let _ = writeln!(out, "final_leakage_{key} = {:.11e}", 1.0 - inside);
    let _ = writeln!(out, "final_purity_{key} = {:.11e}", traj.purity(last));
    for (i, p) in traj.populations(last).into_iter().enumerate() {
        if p >= 1e-6 {
            let _ = writeln!(out, "final_pop_{key}_{} = {p:.11e}", traj.space.label_string(i));
        }
    }
}

fn header(cfg: &ExperimentConfig, schedule: Option<&PulseSchedule>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment = {}", name_of(cfg.experiment.name));
    let _ = writeln!(s, "pattern = {}", cfg.chain.pattern);
    let _ = writeln!(s, "j = {}", cfg.chain.j);
    if let Some(sc) = schedule {
        let _ = writeln!(s, "intervals = {}", sc.len());
        let _ = writeln!(s, "duration_ps = {:.11e}", sc.total_duration());
    }
    s
}

fn name_of(n: ExperimentName) -> &'static str {
    match n {
        ExperimentName::CnotDemo => "cnot-demo",
        ExperimentName::PuritySweep => "purity-sweep",
        ExperimentName::CrosstalkDemo => "crosstalk-demo",
        ExperimentName::Circuit => "circuit",
    }
}

/// Runs the experiment named in `cfg`, resolving relative input paths
/// against `base` and writing into `out`.
pub fn run(cfg: &ExperimentConfig, base: &Path, out: &Path) -> CliResult<RunOutput> {
    fs::create_dir_all(out).map_err(|e| io(out, e))?;
    let mut files = Vec::new();
    match cfg.experiment.name {
        ExperimentName::CnotDemo => cnot_demo(cfg, base, out, &mut files)?,
        ExperimentName::Circuit => circuit(cfg, base, out, &mut files)?,
        ExperimentName::PuritySweep => purity_sweep(cfg, out, &mut files)?,
        ExperimentName::CrosstalkDemo => crosstalk_demo(cfg, out, &mut files)?,
    }
    Ok(RunOutput { dir: out.to_path_buf(), files })
}

fn cnot_expected(label: &str) -> Option<String> {
    let b: Vec<u8> = label.bytes().collect();
    match b.as_slice() {
        [a @ (b'0' | b'1'), c @ (b'0' | b'1')] => {
            let t = if *a == b'1' { if *c == b'0' { '1' } else { '0' } } else { *c as char };
            Some(format!("{}1{t}", *a as char))
        }
        _ => None,
    }
}

/// CNOT with control first, big-endian, times `control_sign` on the
/// control-`|0⟩` block.
fn cnot_matrix(control_sign: f64) -> Operator {
    let perm = [0, 1, 3, 2];
    Operator::from_fn(4, 4, |r, c| {
        let s = if c < 2 { control_sign } else { 1.0 };
        C64::new(if perm[c] == r { s } else { 0.0 }, 0.0)
    })
}

fn cnot_demo(cfg: &ExperimentConfig, base: &Path, out: &Path, files: &mut Vec<String>) -> CliResult<()> {
    if cfg.chain.pattern != "ABC" {
        return Err(CliError::config("chain.pattern: cnot-demo needs the chain ABC"));
    }
    let chain = cfg.chain_config()?;
    let kinds = chain.kinds();
    let space = compose_chain(&chain).map_err(setup)?;
    let schedule = chain_schedule(cfg, base, &chain)?;
    write(out, "schedule.txt", &schedule.to_text(), files)?;
    let dec = decoherence(cfg, cfg.pulses.raman_rabi)?;
    let labels: Vec<String> = if cfg.experiment.initial.is_empty() {
        ["00", "01", "10", "11"].map(String::from).to_vec()
    } else {
        cfg.experiment.initial.clone()
    };
    let mut summary = header(cfg, Some(&schedule));
    for label in &labels {
        let psi = initial_state(label, &kinds)?;
        let traj = evolve(&schedule, &chain, &psi, dec.as_ref(), cfg.experiment.sample_dt)?;
        write(out, &format!("cnot_{label}.csv"), &traj.to_csv(), files)?;
        if let Some(expected) = cnot_expected(label) {
            let levels: Vec<Level> = expected.chars().map(|c| Level::from_char(c).expect("binary label")).collect();
            let idx = space.index(&levels).map_err(sim)?;
            let p = traj.populations(traj.len() - 1)[idx];
            let _ = writeln!(summary, "correct_population_{label} = {p:.11e}");
        }
        final_summary(&mut summary, label, &traj);
    }
    if dec.is_none() {
        let u = propagator(&schedule, &chain).map_err(sim)?;
        let block = project_qubits(&u, &space, &[0, 2], &[(1, Level::One)]).map_err(sim)?;
        let f = gate_fidelity(&cnot_matrix(1.0), &block).map_err(sim)?;
        let fz = gate_fidelity(&cnot_matrix(-1.0), &block).map_err(sim)?;
        let _ = writeln!(summary, "cnot_gate_fidelity = {f:.11e}");
        let _ = writeln!(summary, "cnot_gate_fidelity_z_control = {fz:.11e}");
    }
    write(out, "summary.txt", &summary, files)
}

fn default_label(kinds: &[UnitKind]) -> String {
    kinds.iter().filter(|k| k.is_computational()).map(|_| '0').collect()
}

fn circuit(cfg: &ExperimentConfig, base: &Path, out: &Path, files: &mut Vec<String>) -> CliResult<()> {
    let chain = cfg.chain_config()?;
    let kinds = chain.kinds();
    let schedule = chain_schedule(cfg, base, &chain)?;
    write(out, "schedule.txt", &schedule.to_text(), files)?;
    let dec = decoherence(cfg, cfg.pulses.raman_rabi)?;
    let labels = if cfg.experiment.initial.is_empty() { vec![default_label(&kinds)] } else { cfg.experiment.initial.clone() };
    let mut summary = header(cfg, Some(&schedule));
    for label in &labels {
        let psi = initial_state(label, &kinds)?;
        let traj = evolve(&schedule, &chain, &psi, dec.as_ref(), cfg.experiment.sample_dt)?;
        write(out, &format!("trajectory_{label}.csv"), &traj.to_csv(), files)?;
        final_summary(&mut summary, label, &traj);
    }
    write(out, "summary.txt", &summary, files)
}

fn purity_sweep(cfg: &ExperimentConfig, out: &Path, files: &mut Vec<String>) -> CliResult<()> {
    let chain = cfg.chain_config()?;
    let kinds = chain.kinds();
    let target = *kinds
        .iter()
        .find(|k| k.is_computational())
        .ok_or_else(|| CliError::config("chain.pattern: purity-sweep needs a computational unit"))?;
    let rabi = cfg.pulses.detuned_rabi;
    let dec = decoherence(cfg, rabi)?;
    let alphas = if cfg.experiment.alphas.is_empty() { DEFAULT_ALPHAS.to_vec() } else { cfg.experiment.alphas.clone() };
    let label = cfg.experiment.initial.first().cloned().unwrap_or_else(|| "+".repeat(kinds.iter().filter(|k| k.is_computational()).count()));
    let psi = initial_state(&label, &kinds)?;
    let gate = [GateSpec::Rz(target, cfg.rotation_angle(PI))];
    let mut summary = header(cfg, None);
    let _ = writeln!(summary, "tau_x_ps = {:.11e}", cfg.tau_x_for(rabi));
    for &alpha in &alphas {
        let params = PulseParams {
            z_protocol: ZProtocol::DetunedCycles { rabi, detuning: rabi / alpha },
            ..cfg.pulse_params()
        };
        let schedule = compile(&gate, &chain, &params).map_err(setup)?;
        let traj = evolve(&schedule, &chain, &psi, dec.as_ref(), cfg.experiment.sample_dt)?;
        write(out, &format!("purity_alpha_{alpha}.csv"), &traj.to_csv(), files)?;
        let _ = writeln!(summary, "duration_alpha_{alpha} = {:.11e}", schedule.total_duration());
        let _ = writeln!(summary, "final_purity_alpha_{alpha} = {:.11e}", traj.purity(traj.len() - 1));
    }
    write(out, "summary.txt", &summary, files)
}

fn spin_ket(c: char) -> CliResult<[C64; 2]> {
    let h = FRAC_1_SQRT_2;
    let r = |a: f64, b: f64| [C64::new(a, 0.0), C64::new(b, 0.0)];
    match c {
        '0' => Ok(r(1.0, 0.0)),
        '1' => Ok(r(0.0, 1.0)),
        '+' => Ok(r(h, h)),
        '-' => Ok(r(h, -h)),
        _ => Err(CliError::config(format!("experiment.initial: bad spin label {c:?}"))),
    }
}

fn crosstalk_csv(samples: &[TrionSample]) -> String {
    let mut s = String::from("t_ps");
    for dot in ["A", "C"] {
        for l in CROSSTALK_LEVELS {
            let _ = write!(s, ",pop_{dot}_{l}");
        }
    }
    s.push_str(",purity\n");
    for x in samples {
        let _ = write!(s, "{:.11e}", x.t);
        for p in x.target.iter().chain(x.other.iter()) {
            let _ = write!(s, ",{p:.11e}");
        }
        let norm: f64 = x.target.iter().sum::<f64>() * x.other.iter().sum::<f64>();
        let _ = writeln!(s, ",{:.11e}", norm * norm);
    }
    s
}

fn crosstalk_demo(cfg: &ExperimentConfig, out: &Path, files: &mut Vec<String>) -> CliResult<()> {
    let p = cfg.crosstalk_params();
    let angle = cfg.rotation_angle(FRAC_PI_2);
    let label = match cfg.experiment.initial.as_slice() {
        [] => "00".to_string(),
        [one] => one.clone(),
        _ => return Err(CliError::config("experiment.initial: crosstalk-demo takes one label")),
    };
    let chars: Vec<char> = label.chars().collect();
    let [a, c] = chars[..] else {
        return Err(CliError::config(format!("experiment.initial: {label:?} needs two spin labels")));
    };
    let (psi_a, psi_c) = (spin_ket(a)?, spin_ket(c)?);
    let mut summary = header(cfg, None);
    let _ = writeln!(summary, "angle = {angle:.11e}");
    for (name, corrected) in [("uncorrected", false), ("corrected", true)] {
        let segs = crosstalk_segments(&p, angle, corrected).map_err(setup)?;
        let samples = crosstalk_trajectory(&segs, &psi_a, &psi_c, cfg.experiment.sample_dt).map_err(sim)?;
        write(out, &format!("crosstalk_{name}.csv"), &crosstalk_csv(&samples), files)?;
        let r = crosstalk_report(&p, angle, corrected).map_err(sim)?;
        let _ = writeln!(summary, "{name}_duration_ps = {:.11e}", r.duration);
        let _ = writeln!(summary, "{name}_target_fidelity = {:.11e}", r.target_fidelity);
        let _ = writeln!(summary, "{name}_other_fidelity = {:.11e}", r.other_fidelity);
        let _ = writeln!(summary, "{name}_other_population_change = {:.11e}", r.other_population_change);
    }
    write(out, "summary.txt", &summary, files)
}
