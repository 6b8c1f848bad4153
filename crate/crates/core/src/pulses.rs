//! Pulse primitives, schedules, legality rules and the gate compiler.
//!
//! Schedule text format, one interval per line:
//!
//! ```text
//! # comment
//! 3.14159 A:raman_x(0X:10:50:0,1X:10:50:0) B:passivation(0X:100:0:0) D:passivation(0X:100:0:0)
//! 2.2214 B:idle() D:passivation(0X:100:0:0)
//! ```
//!
//! Laser fields are `transition:rabi:detuning:phase[:frequency]`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hamiltonians::{spin_frame_drive, LaserParams, Transition};
use crate::linalg::HermitianEigen;
use crate::statespace::{ChainConfig, UnitKind, UnitSpec};

/// Largest α accepted by the perturbative single-qubit protocols.
pub const MAX_ALPHA: f64 = 0.5;
/// Passivation Rabi frequency must be at least this multiple of J.
pub const BLOCKING_FACTOR: f64 = 10.0;

const DURATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    RamanX,
    TwoPulseZ,
    DetunedZCycles,
    Passivation,
    Idle,
}

impl Protocol {
    pub const ALL: [Protocol; 5] =
        [Protocol::RamanX, Protocol::TwoPulseZ, Protocol::DetunedZCycles, Protocol::Passivation, Protocol::Idle];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::RamanX => "raman_x",
            Protocol::TwoPulseZ => "two_pulse_z",
            Protocol::DetunedZCycles => "detuned_z_cycles",
            Protocol::Passivation => "passivation",
            Protocol::Idle => "idle",
        }
    }

    pub fn parse(s: &str) -> Option<Protocol> {
        Protocol::ALL.into_iter().find(|p| p.as_str() == s)
    }

    /// Protocols that act on a computational qubit.
    pub fn is_single_qubit(self) -> bool {
        matches!(self, Protocol::RamanX | Protocol::TwoPulseZ | Protocol::DetunedZCycles)
    }
}

/// A rectangular pulse applied to every unit of one kind.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub kind: UnitKind,
    pub protocol: Protocol,
    pub lasers: Vec<LaserParams>,
    pub duration: f64,
}

impl PulseSpec {
    pub fn idle(kind: UnitKind, duration: f64) -> Self {
        PulseSpec { kind, protocol: Protocol::Idle, lasers: Vec::new(), duration }
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    /// Largest α = Ω/|δ| over the lasers.
    pub fn alpha(&self) -> f64 {
        self.lasers.iter().map(LaserParams::alpha).fold(0.0, f64::max)
    }
}

/// Simultaneous pulses sharing one duration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Interval {
    pub duration: f64,
    pub pulses: BTreeMap<UnitKind, PulseSpec>,
}

impl Interval {
    pub fn new(duration: f64) -> Self {
        Interval { duration, pulses: BTreeMap::new() }
    }

    /// Adds a pulse, stretching it to the interval duration. Errors if the
    /// kind already carries a protocol.
    pub fn with(mut self, pulse: PulseSpec) -> Result<Self> {
        self.insert(pulse)?;
        Ok(self)
    }

    pub fn insert(&mut self, pulse: PulseSpec) -> Result<()> {
        let kind = pulse.kind;
        if self.pulses.contains_key(&kind) {
            return Err(Error::IllegalGate(format!("two protocols on kind {kind} in one interval")));
        }
        self.pulses.insert(kind, pulse.with_duration(self.duration));
        Ok(())
    }

    pub fn pulse(&self, kind: UnitKind) -> Option<&PulseSpec> {
        self.pulses.get(&kind)
    }

    pub fn lasers_for(&self, kind: UnitKind) -> &[LaserParams] {
        self.pulses.get(&kind).map(|p| p.lasers.as_slice()).unwrap_or(&[])
    }

    fn passivated(&self, kind: UnitKind) -> bool {
        self.pulse(kind).is_some_and(|p| p.protocol == Protocol::Passivation)
    }

    /// Legality of a single interval; `j` enables the blocking-threshold check.
    pub fn check(&self, j: Option<f64>) -> std::result::Result<(), String> {
        if !self.duration.is_finite() || self.duration < 0.0 {
            return Err(format!("duration {} is not a finite non-negative number", self.duration));
        }
        for (kind, p) in &self.pulses {
            if p.kind != *kind {
                return Err(format!("pulse for {} filed under {kind}", p.kind));
            }
            if (p.duration - self.duration).abs() > DURATION_TOL * self.duration.max(1.0) {
                return Err(format!("{kind}:{} lasts {} in a {} interval", p.protocol.as_str(), p.duration, self.duration));
            }
            if let Some(l) = p.lasers.iter().find(|l| l.target_kind != *kind) {
                return Err(format!("laser for {} inside the {kind} pulse", l.target_kind));
            }
            if let Some(l) = p.lasers.iter().find(|l| !(l.rabi >= 0.0) || !l.detuning.is_finite() || !l.phase.is_finite()) {
                return Err(format!("bad laser parameters on {kind}: {l:?}"));
            }
            let unit = UnitSpec::with_defaults(*kind, 0.0);
            if let Err(e) = spin_frame_drive(&unit, &p.lasers) {
                return Err(e.to_string());
            }
            match (kind.is_barrier(), p.protocol) {
                (true, Protocol::Passivation | Protocol::Idle) => {}
                (false, Protocol::Passivation) => return Err(format!("passivation on computational kind {kind}")),
                (true, other) => return Err(format!("{} on barrier kind {kind}", other.as_str())),
                _ => {}
            }
            if p.protocol == Protocol::Idle && !p.lasers.is_empty() {
                return Err(format!("idle pulse on {kind} carries lasers"));
            }
            if p.protocol == Protocol::Passivation {
                if let Some(j) = j {
                    let rabi = p.lasers.iter().map(|l| l.rabi).fold(0.0, f64::max);
                    if rabi < BLOCKING_FACTOR * j {
                        return Err(format!("passivation of {kind} at Ω={rabi} is below {BLOCKING_FACTOR}·J"));
                    }
                }
            }
        }
        let single = self.pulses.values().any(|p| p.protocol.is_single_qubit());
        let passive = UnitKind::BARRIERS.iter().filter(|&&b| self.passivated(b)).count();
        if single && passive != 2 {
            return Err("single-qubit protocol without both barrier kinds passivated".into());
        }
        if passive == 0 {
            return Err("no barrier kind passivated".into());
        }
        Ok(())
    }

    /// True when exactly one barrier kind is left unpassivated.
    pub fn is_entangling(&self) -> bool {
        UnitKind::BARRIERS.iter().filter(|&&b| self.passivated(b)).count() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSchedule {
    pub intervals: Vec<Interval>,
}

impl PulseSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_intervals(intervals: Vec<Interval>) -> Self {
        PulseSchedule { intervals }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn push(&mut self, interval: Interval) {
        self.intervals.push(interval);
    }

    pub fn extend(&mut self, other: PulseSchedule) {
        self.intervals.extend(other.intervals);
    }

    /// `other` applied after `self`.
    pub fn then(mut self, other: &PulseSchedule) -> PulseSchedule {
        self.intervals.extend(other.intervals.iter().cloned());
        self
    }

    pub fn total_duration(&self) -> f64 {
        self.intervals.iter().map(|i| i.duration).sum()
    }

    /// Start time of every interval plus the end time.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = vec![0.0];
        for i in &self.intervals {
            t += i.duration;
            out.push(t);
        }
        out
    }

    pub fn validate(&self, j: Option<f64>) -> Result<()> {
        for (index, interval) in self.intervals.iter().enumerate() {
            interval.check(j).map_err(|reason| Error::IllegalInterval { index, reason })?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PulseSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for interval in &self.intervals {
            write!(f, "{}", interval.duration)?;
            for p in interval.pulses.values() {
                write!(f, " {}:{}(", p.kind, p.protocol.as_str())?;
                for (n, l) in p.lasers.iter().enumerate() {
                    if n > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}:{}:{}:{}", l.transition.as_str(), l.rabi, l.detuning, l.phase)?;
                    if let Some(w) = l.frequency {
                        write!(f, ":{w}")?;
                    }
                }
                f.write_str(")")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for PulseSchedule {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut schedule = PulseSchedule::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fail = |reason: String| Error::ScheduleParse { line: n + 1, reason };
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap_or_default();
            let duration: f64 = head.parse().map_err(|_| fail(format!("bad duration {head:?}")))?;
            let mut interval = Interval::new(duration);
            for tok in tokens {
                let pulse = parse_pulse(tok, duration).map_err(&fail)?;
                interval.insert(pulse).map_err(|e| fail(e.to_string()))?;
            }
            schedule.push(interval);
        }
        Ok(schedule)
    }
}

fn parse_pulse(tok: &str, duration: f64) -> std::result::Result<PulseSpec, String> {
    let (kind_s, rest) = tok.split_once(':').ok_or_else(|| format!("expected kind:protocol(...) in {tok:?}"))?;
    let mut chars = kind_s.chars();
    let kind = match (chars.next().and_then(UnitKind::from_char), chars.next()) {
        (Some(k), None) => k,
        _ => return Err(format!("unknown unit kind {kind_s:?}")),
    };
    let (proto_s, args) = rest
        .strip_suffix(')')
        .and_then(|r| r.split_once('('))
        .ok_or_else(|| format!("missing parentheses in {tok:?}"))?;
    let protocol = Protocol::parse(proto_s).ok_or_else(|| format!("unknown protocol {proto_s:?}"))?;
    let mut lasers = Vec::new();
    for field in args.split(',').filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = field.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(format!("laser {field:?} needs 4 or 5 fields"));
        }
        let transition = Transition::parse(parts[0]).ok_or_else(|| format!("unknown transition {:?}", parts[0]))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number {s:?}"));
        let mut laser = LaserParams::new(kind, transition, num(parts[1])?, num(parts[2])?, num(parts[3])?);
        if parts.len() == 5 {
            laser.frequency = Some(num(parts[4])?);
        }
        lasers.push(laser);
    }
    Ok(PulseSpec { kind, protocol, lasers, duration })
}

fn require_barrier(kind: UnitKind) -> Result<()> {
    if kind.is_barrier() {
        Ok(())
    } else {
        Err(Error::IllegalGate(format!("{kind} is not a barrier kind")))
    }
}

fn require_computational(kind: UnitKind) -> Result<()> {
    if kind.is_computational() {
        Ok(())
    } else {
        Err(Error::IllegalGate(format!("{kind} is not a computational kind")))
    }
}

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} must be finite and positive")))
    }
}

/// Resonant `0X` drive on a barrier kind, blocking transfer through it.
pub fn passivation_pulse(kind: UnitKind, rabi: f64, duration: f64, j: f64) -> Result<PulseSpec> {
    require_barrier(kind)?;
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::param("duration", format!("{duration} must be finite and non-negative")));
    }
    let threshold = BLOCKING_FACTOR * j;
    if !(rabi >= threshold) {
        return Err(Error::BelowBlockingThreshold { rabi, threshold });
    }
    Ok(PulseSpec {
        kind,
        protocol: Protocol::Passivation,
        lasers: vec![LaserParams::resonant(kind, Transition::ZeroX, rabi, 0.0)],
        duration,
    })
}

/// Free-evolution time after which a barrier in |1⟩ mediates the
/// entangling gate (up to single-qubit Z corrections).
pub fn entangling_time(j: f64) -> f64 {
    PI / (SQRT_2 * j)
}

/// `2√2π/J`: one full revival of the three-site single-excitation sector.
pub fn nominal_entangling_time(j: f64) -> f64 {
    2.0 * SQRT_2 * PI / j
}

/// Interval leaving `idle` undriven for `duration` while passivating the
/// other barrier kind.
pub fn window_interval(idle: UnitKind, duration: f64, passivation_rabi: f64, j: f64) -> Result<Interval> {
    require_barrier(idle)?;
    Interval::new(duration)
        .with(PulseSpec::idle(idle, duration))?
        .with(passivation_pulse(idle.partner(), passivation_rabi, duration, j)?)
}

/// Entangling window of length [`entangling_time`].
pub fn entangle_window(idle: UnitKind, j: f64, passivation_rabi: f64) -> Result<Interval> {
    require_positive("j", j)?;
    window_interval(idle, entangling_time(j), passivation_rabi, j)
}

/// Raman x rotation: lasers on `0X` and `1X` with a common detuning,
/// duration `2δθ/(Ω₁Ω₂)`. The angle is reduced to [0, 2π).
pub fn raman_x_pulse(kind: UnitKind, angle: f64, rabi0: f64, rabi1: f64, detuning: f64) -> Result<PulseSpec> {
    require_computational(kind)?;
    if !angle.is_finite() {
        return Err(Error::param("angle", "not finite"));
    }
    require_positive("rabi", rabi0)?;
    require_positive("rabi", rabi1)?;
    require_positive("detuning", detuning)?;
    let alpha = rabi0.max(rabi1) / detuning;
    if alpha > MAX_ALPHA {
        return Err(Error::NonPerturbative { gap: detuning, coupling: rabi0.max(rabi1) });
    }
    let theta = angle.rem_euclid(TAU);
    Ok(PulseSpec {
        kind,
        protocol: Protocol::RamanX,
        lasers: vec![
            LaserParams::new(kind, Transition::ZeroX, rabi0, detuning, 0.0),
            LaserParams::new(kind, Transition::OneX, rabi1, detuning, 0.0),
        ],
        duration: 2.0 * detuning * theta / (rabi0 * rabi1),
    })
}

/// Two resonant `0X` π pulses whose phase difference is `angle − π`,
/// implementing `R_z(angle)`.
pub fn two_pulse_z(kind: UnitKind, angle: f64, rabi: f64) -> Result<[PulseSpec; 2]> {
    require_computational(kind)?;
    require_positive("rabi", rabi)?;
    if !angle.is_finite() {
        return Err(Error::param("angle", "not finite"));
    }
    let t = PI / rabi;
    let pulse = |phase: f64| PulseSpec {
        kind,
        protocol: Protocol::TwoPulseZ,
        lasers: vec![LaserParams::resonant(kind, Transition::ZeroX, rabi, phase)],
        duration: t,
    };
    Ok([pulse(0.0), pulse((angle - PI).rem_euclid(TAU))])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetunedZ {
    pub pulse: PulseSpec,
    /// Number of generalized Rabi cycles.
    pub n_cal: u32,
    /// `1/(2α²)` for the requested α.
    pub nominal_n: f64,
    /// Detuning after calibration.
    pub detuning: f64,
    pub cycle_time: f64,
    /// `π/(δα²)` for the requested parameters.
    pub nominal_total_time: f64,
    /// `|n·φ_cycle − π|` achieved.
    pub phase_error: f64,
}

/// Relative phase of `|0⟩` after one generalized Rabi cycle, measured by
/// propagating the single-unit drive.
pub fn cycle_phase(rabi: f64, detuning: f64) -> f64 {
    let unit = UnitSpec::with_defaults(UnitKind::A, 0.0);
    let laser = LaserParams::new(UnitKind::A, Transition::ZeroX, rabi, detuning, 0.0);
    let (h, _) = spin_frame_drive(&unit, &[laser]).expect("single laser");
    let period = TAU / rabi.hypot(detuning);
    let u = HermitianEigen::new(&h).propagator(period);
    (u[(0, 0)] / u[(1, 1)]).arg().rem_euclid(TAU)
}

/// Repeated detuned `0X` cycles giving `R_z(π)`. The cycle count is the
/// nearest integer to `π/φ_cycle`; the detuning is then adjusted by
/// bisection so the accumulated phase is exactly π.
pub fn detuned_z_cycles(kind: UnitKind, rabi: f64, detuning: f64) -> Result<DetunedZ> {
    require_computational(kind)?;
    require_positive("rabi", rabi)?;
    require_positive("detuning", detuning)?;
    let alpha = rabi / detuning;
    if alpha > MAX_ALPHA {
        return Err(Error::NonPerturbative { gap: detuning, coupling: rabi });
    }
    let phi0 = cycle_phase(rabi, detuning);
    let n = (PI / phi0).round().max(1.0);
    if n > u32::MAX as f64 {
        return Err(Error::Calibration(format!("{n} cycles")));
    }
    let target = PI / n;
    // φ_cycle decreases monotonically with δ
    let (mut lo, mut hi) = (detuning, detuning);
    for _ in 0..200 {
        if cycle_phase(rabi, lo) >= target {
            break;
        }
        lo *= 0.5;
    }
    for _ in 0..200 {
        if cycle_phase(rabi, hi) <= target {
            break;
        }
        hi *= 2.0;
    }
    if cycle_phase(rabi, lo) < target || cycle_phase(rabi, hi) > target {
        return Err(Error::Calibration("could not bracket the target phase".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cycle_phase(rabi, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let cal = 0.5 * (lo + hi);
    let phase_error = (n * cycle_phase(rabi, cal) - PI).abs();
    if phase_error > 1e-3 {
        return Err(Error::Calibration(format!("residual phase {phase_error}")));
    }
    let cycle_time = TAU / rabi.hypot(cal);
    Ok(DetunedZ {
        pulse: PulseSpec {
            kind,
            protocol: Protocol::DetunedZCycles,
            lasers: vec![LaserParams::new(kind, Transition::ZeroX, rabi, cal, 0.0)],
            duration: n * cycle_time,
        },
        n_cal: n as u32,
        nominal_n: 1.0 / (2.0 * alpha * alpha),
        detuning: cal,
        cycle_time,
        nominal_total_time: PI / (detuning * alpha * alpha),
        phase_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateSpec {
    Rx(UnitKind, f64),
    Rz(UnitKind, f64),
    /// Entangling window with the given barrier kind left idle.
    Ue(UnitKind),
}

impl GateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GateSpec::Rx(k, a) | GateSpec::Rz(k, a) => {
                require_computational(k)?;
                if !a.is_finite() {
                    return Err(Error::IllegalGate(format!("non-finite angle {a}")));
                }
                Ok(())
            }
            GateSpec::Ue(k) => require_barrier(k),
        }
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSpec::Rx(k, a) => write!(f, "Rx {k} {a}"),
            GateSpec::Rz(k, a) => write!(f, "Rz {k} {a}"),
            GateSpec::Ue(k) => write!(f, "Ue {k}"),
        }
    }
}

impl FromStr for GateSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let kind = |t: &str| {
            let mut c = t.chars();
            match (c.next().and_then(UnitKind::from_char), c.next()) {
                (Some(k), None) => Ok(k),
                _ => Err(format!("unknown unit kind {t:?}")),
            }
        };
        let angle = |t: &str| t.parse::<f64>().map_err(|_| format!("bad angle {t:?}"));
        let gate = match parts.as_slice() {
            ["Rx", k, a] => GateSpec::Rx(kind(k)?, angle(a)?),
            ["Rz", k, a] => GateSpec::Rz(kind(k)?, angle(a)?),
            ["Ue", k] => GateSpec::Ue(kind(k)?),
            _ => return Err(format!("expected `Rx K angle`, `Rz K angle` or `Ue K`, got {s:?}")),
        };
        gate.validate().map_err(|e| e.to_string())?;
        Ok(gate)
    }
}

/// Parses a circuit file: one gate per line, `#` comments.
pub fn parse_circuit(text: &str) -> Result<Vec<GateSpec>> {
    let mut gates = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        gates.push(line.parse().map_err(|reason| Error::ScheduleParse { line: n + 1, reason })?);
    }
    Ok(gates)
}

/// The CNOT sequence with control A and target C, in application order.
pub fn cnot_gates() -> Vec<GateSpec> {
    use UnitKind::*;
    vec![
        GateSpec::Ue(B),
        GateSpec::Rz(C, PI / 2.0),
        GateSpec::Rz(A, PI),
        GateSpec::Rx(A, PI / 2.0),
        GateSpec::Ue(B),
        GateSpec::Rx(C, PI / 2.0),
        GateSpec::Rz(C, PI),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZProtocol {
    TwoPulse,
    /// Only realizes `R_z(π)`.
    DetunedCycles { rabi: f64, detuning: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    pub raman_rabi: f64,
    pub raman_detuning: f64,
    pub z_rabi: f64,
    pub passivation_rabi: f64,
    pub z_protocol: ZProtocol,
    /// Length of the entangling window; [`entangling_time`] when unset.
    pub window: Option<f64>,
    /// Follow each window with `R_z(π)` on both computational kinds.
    pub window_phase_correction: bool,
}

impl Default for PulseParams {
    fn default() -> Self {
        PulseParams {
            raman_rabi: 10.0,
            raman_detuning: 50.0,
            z_rabi: 10.0,
            passivation_rabi: 100.0,
            z_protocol: ZProtocol::TwoPulse,
            window: None,
            window_phase_correction: true,
        }
    }
}

fn single_qubit_interval(pulses: &[PulseSpec], params: &PulseParams, j: f64) -> Result<Interval> {
    let duration = pulses[0].duration;
    let mut interval = Interval::new(duration);
    for p in pulses {
        interval.insert(p.clone())?;
    }
    for b in UnitKind::BARRIERS {
        interval.insert(passivation_pulse(b, params.passivation_rabi, duration, j)?)?;
    }
    Ok(interval)
}

fn z_intervals(kinds: &[UnitKind], angle: f64, params: &PulseParams, j: f64) -> Result<Vec<Interval>> {
    if angle.rem_euclid(TAU) == 0.0 || kinds.is_empty() {
        return Ok(Vec::new());
    }
    match params.z_protocol {
        ZProtocol::TwoPulse => {
            let pairs = kinds.iter().map(|&k| two_pulse_z(k, angle, params.z_rabi)).collect::<Result<Vec<_>>>()?;
            (0..2)
                .map(|step| {
                    let pulses: Vec<PulseSpec> = pairs.iter().map(|p| p[step].clone()).collect();
                    single_qubit_interval(&pulses, params, j)
                })
                .collect()
        }
        ZProtocol::DetunedCycles { rabi, detuning } => {
            if (angle.rem_euclid(TAU) - PI).abs() > 1e-12 {
                return Err(Error::IllegalGate(format!("detuned-cycle Z only realizes angle π, got {angle}")));
            }
            let pulses = kinds
                .iter()
                .map(|&k| detuned_z_cycles(k, rabi, detuning).map(|d| d.pulse))
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![single_qubit_interval(&pulses, params, j)?])
        }
    }
}

/// Compiles gates (in application order) into a legal schedule.
pub fn compile(gates: &[GateSpec], config: &ChainConfig, params: &PulseParams) -> Result<PulseSchedule> {
    compile_inner(gates, config, params, config.crosstalk_mode)
}

fn compile_inner(gates: &[GateSpec], config: &ChainConfig, params: &PulseParams, expand: bool) -> Result<PulseSchedule> {
    let j = config.j;
    let present = config.kinds();
    let mut schedule = PulseSchedule::new();
    for gate in gates {
        gate.validate()?;
        if let GateSpec::Rx(k, _) | GateSpec::Rz(k, _) = *gate {
            if !present.contains(&k) {
                return Err(Error::IllegalGate(format!("{gate}: no unit of kind {k} in the chain")));
            }
        }
        match *gate {
            GateSpec::Rx(k, angle) if expand => {
                let seq = crate::trion::corrected_rx(k, angle)?;
                schedule.extend(compile_inner(&seq, config, params, false)?);
            }
            GateSpec::Rx(k, angle) => {
                let p = raman_x_pulse(k, angle, params.raman_rabi, params.raman_rabi, params.raman_detuning)?;
                if p.duration > 0.0 {
                    schedule.push(single_qubit_interval(&[p], params, j)?);
                }
            }
            GateSpec::Rz(k, angle) => {
                for i in z_intervals(&[k], angle, params, j)? {
                    schedule.push(i);
                }
            }
            GateSpec::Ue(b) => {
                let t = params.window.unwrap_or_else(|| entangling_time(j));
                schedule.push(window_interval(b, t, params.passivation_rabi, j)?);
                if params.window_phase_correction {
                    let comp: Vec<UnitKind> =
                        UnitKind::COMPUTATIONAL.into_iter().filter(|k| present.contains(k)).collect();
                    for i in z_intervals(&comp, PI, params, j)? {
                        schedule.push(i);
                    }
                }
            }
        }
    }
    schedule.validate(Some(j))?;
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use UnitKind::*;

    fn abc() -> ChainConfig {
        ChainConfig::from_pattern("ABC", 1.0).unwrap()
    }

    #[test]
    fn passivation_threshold() {
        assert!(passivation_pulse(B, 100.0, nominal_entangling_time(1.0), 1.0).is_ok());
        assert!(matches!(passivation_pulse(B, 5.0, 1.0, 1.0), Err(Error::BelowBlockingThreshold { .. })));
        assert_eq!(passivation_pulse(D, 100.0, 0.0, 1.0).unwrap().duration, 0.0);
        assert!(passivation_pulse(A, 100.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn window_durations() {
        assert!((nominal_entangling_time(1.0) - 8.885_765_876_316_732).abs() < 1e-12);
        assert!((nominal_entangling_time(2.0) - 4.442_882_938_158_366).abs() < 1e-12);
        assert!((entangling_time(1.0) - nominal_entangling_time(1.0) / 4.0).abs() < 1e-15);
        let w = entangle_window(B, 1.0, 100.0).unwrap();
        assert_eq!(w.pulse(B).unwrap().protocol, Protocol::Idle);
        assert_eq!(w.pulse(D).unwrap().protocol, Protocol::Passivation);
        assert!(w.is_entangling());
        let ts: Vec<f64> = [0.5, 1.0, 4.0, 100.0].iter().map(|&j| entangling_time(j)).collect();
        assert!(ts.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn raman_durations() {
        assert!((raman_x_pulse(A, PI, 10.0, 10.0, 50.0).unwrap().duration - PI).abs() < 1e-12);
        assert_eq!(raman_x_pulse(A, 0.0, 10.0, 10.0, 50.0).unwrap().duration, 0.0);
        assert!((raman_x_pulse(C, PI / 2.0, 2.0, 3.0, 6.0).unwrap().duration - PI).abs() < 1e-12);
        assert!(matches!(raman_x_pulse(A, PI, 10.0, 10.0, 15.0), Err(Error::NonPerturbative { .. })));
        assert!(raman_x_pulse(B, PI, 10.0, 10.0, 50.0).is_err());
    }

    #[test]
    fn two_pulse_z_phases() {
        let [a, b] = two_pulse_z(A, PI, 10.0).unwrap();
        assert_eq!(a.lasers[0].phase, b.lasers[0].phase);
        assert!((a.duration - PI / 10.0).abs() < 1e-15);
        let [_, b] = two_pulse_z(A, PI / 2.0, 10.0).unwrap();
        assert!((b.lasers[0].phase - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn detuned_cycles_calibrate_to_pi() {
        let mut last = 0;
        for alpha in [0.5, 0.25, 0.1] {
            let d = detuned_z_cycles(A, 10.0, 10.0 / alpha).unwrap();
            assert!(d.phase_error < 1e-9);
            // closed form π(1 − δ/Ω_g)
            let g = 10.0_f64.hypot(d.detuning);
            assert!((cycle_phase(10.0, d.detuning) - PI * (1.0 - d.detuning / g)).abs() < 1e-9);
            assert!(d.n_cal > last);
            last = d.n_cal;
        }
        assert!(detuned_z_cycles(A, 10.0, 10.0).is_err());
    }

    #[test]
    fn compile_window_and_empty() {
        let cfg = abc();
        assert!(compile(&[], &cfg, &PulseParams::default()).unwrap().is_empty());
        let bare = PulseParams { window_phase_correction: false, ..PulseParams::default() };
        let s = compile(&[GateSpec::Ue(B)], &cfg, &bare).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.intervals[0].is_entangling());
        let s = compile(&[GateSpec::Ue(B)], &cfg, &PulseParams::default()).unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn compile_rejects_bad_targets() {
        let cfg = abc();
        let p = PulseParams::default();
        assert!(compile(&[GateSpec::Rx(B, 1.0)], &cfg, &p).is_err());
        assert!(compile(&[GateSpec::Ue(A)], &cfg, &p).is_err());
        let ab = ChainConfig::from_pattern("AB", 1.0).unwrap();
        assert!(compile(&[GateSpec::Rz(C, 1.0)], &ab, &p).is_err());
    }

    #[test]
    fn legality_rules() {
        let j = Some(1.0);
        let raman = raman_x_pulse(A, PI, 10.0, 10.0, 50.0).unwrap();
        let half = Interval::new(raman.duration)
            .with(raman.clone())
            .unwrap()
            .with(passivation_pulse(B, 100.0, 0.0, 1.0).unwrap())
            .unwrap();
        assert!(half.check(j).is_err());
        let free = Interval::new(1.0).with(PulseSpec::idle(B, 1.0)).unwrap();
        assert!(free.check(j).is_err());
        let hold = Interval::new(1.0)
            .with(passivation_pulse(B, 100.0, 1.0, 1.0).unwrap())
            .unwrap()
            .with(passivation_pulse(D, 100.0, 1.0, 1.0).unwrap())
            .unwrap();
        assert!(hold.check(j).is_ok());
        assert!(hold.check(Some(20.0)).is_err());
        assert!(Interval::new(1.0).with(PulseSpec::idle(A, 1.0)).unwrap().with(PulseSpec::idle(A, 1.0)).is_err());
    }

    #[test]
    fn cnot_schedule_is_legal_and_text_round_trips() {
        let s = compile(&cnot_gates(), &abc(), &PulseParams::default()).unwrap();
        let text = s.to_text();
        let back: PulseSchedule = text.parse().unwrap();
        assert_eq!(back, s);
        assert!((s.total_duration() - s.intervals.iter().map(|i| i.duration).sum::<f64>()).abs() < 1e-15);
        assert_eq!(compile(&cnot_gates(), &abc(), &PulseParams::default()).unwrap(), s);
    }

    #[test]
    fn schedule_parse_errors_carry_line() {
        let err = "# header\n1.0 B:passivation(0X:100:0:0) D:bogus()\n".parse::<PulseSchedule>().unwrap_err();
        assert!(matches!(err, Error::ScheduleParse { line: 2, .. }));
        assert!("x".parse::<PulseSchedule>().is_err());
        assert!("".parse::<PulseSchedule>().unwrap().is_empty());
    }

    #[test]
    fn circuit_parsing() {
        let gates = parse_circuit("Ue B\n# c\n\nRx A 1.5708\nRz C 3.1416\n").unwrap();
        assert_eq!(gates.len(), 3);
        assert!(matches!(parse_circuit("Rx B 1"), Err(Error::ScheduleParse { line: 1, .. })));
        assert!(parse_circuit("Foo").is_err());
    }

    fn gate() -> impl Strategy<Value = GateSpec> {
        prop_oneof![
            (prop::sample::select(vec![A, C]), -10.0..10.0f64).prop_map(|(k, a)| GateSpec::Rx(k, a)),
            (prop::sample::select(vec![A, C]), -10.0..10.0f64).prop_map(|(k, a)| GateSpec::Rz(k, a)),
            prop::sample::select(vec![B, D]).prop_map(GateSpec::Ue),
        ]
    }

    proptest! {
        #[test]
        fn compiled_schedules_are_legal_and_round_trip(
            gates in prop::collection::vec(gate(), 0..8),
            crosstalk in any::<bool>(),
        ) {
            let cfg = ChainConfig::from_pattern("ABCDA", 1.0).unwrap().with_crosstalk(crosstalk);
            let s = compile(&gates, &cfg, &PulseParams::default()).unwrap();
            prop_assert!(s.validate(Some(1.0)).is_ok());
            prop_assert!(s.intervals.iter().all(|i| i.duration > 0.0));
            let back: PulseSchedule = s.to_text().parse().unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
