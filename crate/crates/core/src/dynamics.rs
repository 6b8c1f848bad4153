//! Time evolution under piecewise-constant schedules.
//!
//! States live in the frame where each spin level rotates at its own
//! Zeeman energy and every `|X⟩` at its optical energy. Within an interval
//! a driven unit is propagated in its laser frame; the phase difference is
//! restored on `|X⟩` at the interval end.

use std::fmt::Write as _;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hamiltonians::{rwa_drive, spin_frame_drive, xy_coupling, LaserParams, Transition};
use crate::linalg::{ket_bra, re, HermitianEigen, Operator, C64, I};
use crate::metrics::purity;
use crate::ode::{Dopri5, OdeOptions};
use crate::pulses::{Interval, Protocol, PulseSchedule};
use crate::statespace::{compose_chain, ChainConfig, ChainSpace, DensityMatrix, Level, StateVector, UnitSpec, UNIT_DIM};

const NORM_TOL: f64 = 1e-9;
const BARRIER_TOL: f64 = 1e-9;

/// Lasers acting on one unit during an interval, including crosstalk.
pub fn unit_lasers(interval: &Interval, config: &ChainConfig, unit: usize) -> Result<Vec<LaserParams>> {
    let spec = &config.units[unit];
    let own = interval.pulse(spec.kind);
    let mut lasers: Vec<LaserParams> = own.map(|p| p.lasers.clone()).unwrap_or_default();
    if config.crosstalk_mode && spec.kind.is_computational() {
        let other = spec.kind.partner();
        if let Some(p) = interval.pulse(other).filter(|p| p.protocol == Protocol::RamanX) {
            if own.is_some_and(|o| o.protocol != Protocol::Idle) {
                return Err(Error::CrosstalkConflict(unit));
            }
            let shift = spec.omega1 - config.omega1_of(other).unwrap_or(spec.omega1);
            lasers = p
                .lasers
                .iter()
                .map(|l| LaserParams { target_kind: spec.kind, detuning: l.detuning + shift, ..*l })
                .collect();
        }
    }
    Ok(lasers)
}

/// Rotating-frame Hamiltonian of one interval and the per-basis-state
/// frame rate that is undone at the interval end.
pub fn interval_hamiltonian(interval: &Interval, config: &ChainConfig, space: &ChainSpace) -> Result<(Operator, Vec<f64>)> {
    let mut h = xy_coupling(space, config.j);
    let mut rates = vec![0.0; space.dim()];
    for (u, spec) in config.units.iter().enumerate() {
        let lasers = unit_lasers(interval, config, u)?;
        if lasers.is_empty() {
            continue;
        }
        let (local, detuning) = spin_frame_drive(spec, &lasers)?;
        h += space.embed(&local, u);
        if let Some(d) = detuning {
            for (i, r) in rates.iter_mut().enumerate() {
                if space.labels(i)[u] == Level::X {
                    *r += d;
                }
            }
        }
    }
    Ok((h, rates))
}

fn frame_phases(rates: &[f64], t: f64) -> DVector<C64> {
    DVector::from_iterator(rates.len(), rates.iter().map(|&r| C64::from_polar(1.0, r * t)))
}

struct Prepared {
    duration: f64,
    h: Operator,
    eig: HermitianEigen,
    rates: Vec<f64>,
}

fn prepare(schedule: &PulseSchedule, config: &ChainConfig, space: &ChainSpace) -> Result<Vec<Prepared>> {
    schedule.validate(Some(config.j))?;
    schedule
        .intervals
        .iter()
        .map(|iv| {
            let (h, rates) = interval_hamiltonian(iv, config, space)?;
            let eig = HermitianEigen::new(&h);
            Ok(Prepared { duration: iv.duration, h, eig, rates })
        })
        .collect()
}

/// Sample times `k·dt` inside `[0, total)` plus `total`.
pub fn sample_times(total: f64, dt: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * dt;
        if t >= total - 1e-12 * total.max(1.0) {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.push(total);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum States {
    Pure(Vec<StateVector>),
    Mixed(Vec<DensityMatrix>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: States,
    pub space: ChainSpace,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn populations(&self, k: usize) -> Vec<f64> {
        match &self.states {
            States::Pure(v) => v[k].populations(),
            States::Mixed(v) => v[k].populations(),
        }
    }

    pub fn purity(&self, k: usize) -> f64 {
        match &self.states {
            States::Pure(v) => {
                let n = v[k].norm();
                n * n * n * n
            }
            States::Mixed(v) => purity(&v[k]),
        }
    }

    pub fn density(&self, k: usize) -> DensityMatrix {
        match &self.states {
            States::Pure(v) => v[k].to_density(),
            States::Mixed(v) => v[k].clone(),
        }
    }

    pub fn final_density(&self) -> DensityMatrix {
        self.density(self.len() - 1)
    }

    pub fn final_state(&self) -> Option<&StateVector> {
        match &self.states {
            States::Pure(v) => v.last(),
            States::Mixed(_) => None,
        }
    }

    /// `t_ps,pop_<label>...,purity` with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_ps");
        for i in 0..self.space.dim() {
            let _ = write!(out, ",pop_{}", self.space.label_string(i));
        }
        out.push_str(",purity\n");
        for k in 0..self.len() {
            let _ = write!(out, "{:.11e}", self.times[k]);
            for p in self.populations(k) {
                let _ = write!(out, ",{p:.11e}");
            }
            let _ = writeln!(out, ",{:.11e}", self.purity(k));
        }
        out
    }
}

/// Every barrier unit must start in `|1⟩`.
pub fn check_barriers(config: &ChainConfig, space: &ChainSpace, pops: &[f64]) -> Result<()> {
    for (u, spec) in config.units.iter().enumerate() {
        if !spec.kind.is_barrier() {
            continue;
        }
        let p: f64 = (0..space.dim()).filter(|&i| space.labels(i)[u] == Level::One).map(|i| pops[i]).sum();
        if p < 1.0 - BARRIER_TOL {
            return Err(Error::BarrierNotExcited { unit: u, population: p });
        }
    }
    Ok(())
}

fn check_dt(sample_dt: f64) -> Result<()> {
    if sample_dt > 0.0 && sample_dt.is_finite() {
        Ok(())
    } else {
        Err(Error::param("sample_dt", format!("{sample_dt} must be finite and positive")))
    }
}

pub fn propagate_unitary(schedule: &PulseSchedule, config: &ChainConfig, psi0: &StateVector, sample_dt: f64) -> Result<Trajectory> {
    check_dt(sample_dt)?;
    let space = compose_chain(config)?;
    if psi0.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: psi0.dim() });
    }
    if (psi0.norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::param("psi0", format!("norm {} is not 1", psi0.norm())));
    }
    check_barriers(config, &space, &psi0.populations())?;
    let steps = prepare(schedule, config, &space)?;
    let times = sample_times(schedule.total_duration(), sample_dt);
    let mut states = Vec::with_capacity(times.len());
    let mut psi = psi0.0.clone();
    let mut start = 0.0;
    let mut next = 0;
    for step in &steps {
        let end = start + step.duration;
        while next < times.len() - 1 && times[next] < end {
            let local = times[next] - start;
            let v = step.eig.evolve(&psi, local).component_mul(&frame_phases(&step.rates, local));
            states.push(StateVector(v));
            next += 1;
        }
        psi = step.eig.evolve(&psi, step.duration).component_mul(&frame_phases(&step.rates, step.duration));
        start = end;
    }
    while states.len() < times.len() {
        states.push(StateVector(psi.clone()));
    }
    Ok(Trajectory { times, states: States::Pure(states), space })
}

pub fn propagator(schedule: &PulseSchedule, config: &ChainConfig) -> Result<Operator> {
    let space = compose_chain(config)?;
    let steps = prepare(schedule, config, &space)?;
    let mut u = Operator::identity(space.dim(), space.dim());
    for step in &steps {
        let frame = frame_phases(&step.rates, step.duration);
        let mut p = step.eig.propagator(step.duration);
        for (r, f) in frame.iter().enumerate() {
            p.row_mut(r).scale_mut_c(*f);
        }
        u = p * u;
    }
    Ok(u)
}

trait ScaleRow {
    fn scale_mut_c(&mut self, f: C64);
}

impl<S: nalgebra::StorageMut<C64, nalgebra::U1, nalgebra::Dyn>> ScaleRow for nalgebra::Matrix<C64, nalgebra::U1, nalgebra::Dyn, S> {
    fn scale_mut_c(&mut self, f: C64) {
        for x in self.iter_mut() {
            *x *= f;
        }
    }
}

/// Propagator in the frame where spins keep their Zeeman energy, built
/// from [`rwa_drive`] terms. Schedules containing `1X` lasers are refused.
pub fn zeeman_frame_propagator(schedule: &PulseSchedule, config: &ChainConfig) -> Result<Operator> {
    let space = compose_chain(config)?;
    schedule.validate(Some(config.j))?;
    let mut u = Operator::identity(space.dim(), space.dim());
    for (index, iv) in schedule.intervals.iter().enumerate() {
        let mut h = xy_coupling(&space, config.j);
        let mut rates = vec![0.0; space.dim()];
        for (n, spec) in config.units.iter().enumerate() {
            let lasers = unit_lasers(iv, config, n)?;
            if lasers.iter().any(|l| l.transition == Transition::OneX) {
                return Err(Error::IllegalInterval { index, reason: "1X laser has no static Zeeman frame".into() });
            }
            h += space.embed(&rwa_drive(spec, &lasers)?, n);
            if let Some(l) = lasers.first() {
                for (i, r) in rates.iter_mut().enumerate() {
                    if space.labels(i)[n] == Level::X {
                        *r += l.detuning;
                    }
                }
            }
        }
        let mut p = HermitianEigen::new(&h).propagator(iv.duration);
        for (r, f) in frame_phases(&rates, iv.duration).iter().enumerate() {
            p.row_mut(r).scale_mut_c(*f);
        }
        u = p * u;
    }
    Ok(u)
}

/// Optical decay of every `|X⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceSpec {
    /// Lifetime τ_X in ps; infinite disables decay.
    pub tau_x: f64,
    /// Fraction of decays ending in `|0⟩`, the rest go to `|1⟩`.
    pub branch_to_zero: f64,
}

impl DecoherenceSpec {
    pub fn new(tau_x: f64) -> Result<Self> {
        Self::with_branch(tau_x, 1.0)
    }

    pub fn with_target(tau_x: f64, target: Level) -> Result<Self> {
        match target {
            Level::Zero => Self::with_branch(tau_x, 1.0),
            Level::One => Self::with_branch(tau_x, 0.0),
            Level::X => Err(Error::param("decay_target", "must be 0 or 1")),
        }
    }

    pub fn with_branch(tau_x: f64, branch_to_zero: f64) -> Result<Self> {
        if !(tau_x > 0.0) {
            return Err(Error::param("tau_x", format!("{tau_x} must be positive")));
        }
        if !(0.0..=1.0).contains(&branch_to_zero) {
            return Err(Error::param("branch_to_zero", format!("{branch_to_zero} outside [0, 1]")));
        }
        Ok(DecoherenceSpec { tau_x, branch_to_zero })
    }

    /// Jump operators on one unit.
    pub fn local_jumps(&self) -> Vec<Operator> {
        if self.tau_x.is_infinite() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (target, w) in [(0, self.branch_to_zero), (1, 1.0 - self.branch_to_zero)] {
            if w > 0.0 {
                out.push(ket_bra(UNIT_DIM, target, 2) * re((w / self.tau_x).sqrt()));
            }
        }
        out
    }
}

/// Decay of one unit's `|X⟩` into `target` as a basis-index map.
struct Jump {
    rate: f64,
    pairs: Vec<(usize, usize)>,
}

fn jump_maps(space: &ChainSpace, deco: &DecoherenceSpec) -> Vec<Jump> {
    if deco.tau_x.is_infinite() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for u in 0..space.n_units() {
        for (target, w) in [(Level::Zero, deco.branch_to_zero), (Level::One, 1.0 - deco.branch_to_zero)] {
            if w <= 0.0 {
                continue;
            }
            let pairs = (0..space.dim())
                .filter_map(|i| {
                    let mut l = space.labels(i);
                    (l[u] == Level::X).then(|| {
                        l[u] = target;
                        (i, space.index(&l).expect("same chain"))
                    })
                })
                .collect();
            out.push(Jump { rate: w / deco.tau_x, pairs });
        }
    }
    out
}

/// `H − (i/2) Σ L†L`.
fn effective_hamiltonian(h: &Operator, jumps: &[Jump]) -> Operator {
    let mut h_eff = h.clone();
    for j in jumps {
        for &(x, _) in &j.pairs {
            h_eff[(x, x)] -= I * (0.5 * j.rate);
        }
    }
    h_eff
}

fn lindblad_rhs(h_eff: &Operator, jumps: &[Jump], rho: &Operator) -> Operator {
    let a = h_eff * rho * (-I);
    let mut out = &a + a.adjoint();
    for j in jumps {
        for &(xa, ta) in &j.pairs {
            for &(xb, tb) in &j.pairs {
                out[(ta, tb)] += rho[(xa, xb)] * j.rate;
            }
        }
    }
    out
}

pub fn propagate_lindblad(
    schedule: &PulseSchedule,
    config: &ChainConfig,
    rho0: &DensityMatrix,
    decoherence: &DecoherenceSpec,
    sample_dt: f64,
) -> Result<Trajectory> {
    propagate_lindblad_with(schedule, config, rho0, decoherence, sample_dt, &OdeOptions::default())
}

pub fn propagate_lindblad_with(
    schedule: &PulseSchedule,
    config: &ChainConfig,
    rho0: &DensityMatrix,
    decoherence: &DecoherenceSpec,
    sample_dt: f64,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    check_dt(sample_dt)?;
    let space = compose_chain(config)?;
    if rho0.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: rho0.dim() });
    }
    if !rho0.is_valid(1e-9) {
        return Err(Error::param("rho0", "not a valid density matrix"));
    }
    check_barriers(config, &space, &rho0.populations())?;
    let steps = prepare(schedule, config, &space)?;
    let jumps = jump_maps(&space, decoherence);
    let times = sample_times(schedule.total_duration(), sample_dt);
    let mut states = Vec::with_capacity(times.len());
    let mut rho = rho0.matrix().clone();
    let mut ode = Dopri5::new(*opts);
    let mut start = 0.0;
    let mut next = 0;
    let conj = |m: &Operator, f: &DVector<C64>| Operator::from_fn(m.nrows(), m.ncols(), |r, c| f[r] * m[(r, c)] * f[c].conj());
    for step in &steps {
        let h_eff = effective_hamiltonian(&step.h, &jumps);
        let f = |_: f64, y: &Operator| lindblad_rhs(&h_eff, &jumps, y);
        let end = start + step.duration;
        let mut t = start;
        while next < times.len() - 1 && times[next] < end {
            rho = ode.integrate(&f, t - start, times[next] - start, rho)?;
            t = times[next];
            states.push(DensityMatrix(conj(&rho, &frame_phases(&step.rates, t - start))));
            next += 1;
        }
        rho = ode.integrate(&f, t - start, step.duration, rho)?;
        rho = conj(&rho, &frame_phases(&step.rates, step.duration));
        start = end;
    }
    while states.len() < times.len() {
        states.push(DensityMatrix(rho.clone()));
    }
    Ok(Trajectory { times, states: States::Mixed(states), space })
}

/// Single-unit Schrödinger evolution under the full lab-frame drive.
pub fn propagate_lab_single(
    unit: &UnitSpec,
    lasers: &[LaserParams],
    duration: f64,
    psi0: &StateVector,
    opts: &OdeOptions,
) -> Result<StateVector> {
    if psi0.dim() != UNIT_DIM {
        return Err(Error::DimensionMismatch { expected: UNIT_DIM, got: psi0.dim() });
    }
    let f = |t: f64, y: &Operator| crate::hamiltonians::lab_drive(unit, lasers, t) * y * (-I);
    let y0 = Operator::from_column_slice(UNIT_DIM, 1, psi0.0.as_slice());
    let y = Dopri5::new(*opts).integrate(&f, 0.0, duration, y0)?;
    Ok(StateVector(y.column(0).into_owned()))
}
