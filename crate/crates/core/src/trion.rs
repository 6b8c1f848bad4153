//! Light-hole trion layer: dipole selection rules, the driven four-level
//! spin/trion Hamiltonian, its effective spin-flip rate and the crosstalk
//! model between two dots sharing one laser.
//!
//! Basis order: `|↑e⟩, |↓e⟩, |T↑h⟩, |T↓h⟩` where `T` is the electron
//! singlet pair plus a hole.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::hamiltonians::{degenerate_pt2, PERTURBATIVE_RATIO};
use crate::linalg::{re, HermitianEigen, Operator, C64, I};
use crate::metrics::gate_fidelity;
use crate::pulses::GateSpec;
use crate::statespace::UnitKind;

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const TRION_UP: usize = 2;
pub const TRION_DOWN: usize = 3;
pub const TRION_DIM: usize = 4;

/// Largest α accepted by [`trion_raman_rate`].
pub const MAX_TRION_ALPHA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrionParams {
    /// Ω = E₀A/√6.
    pub omega: f64,
    /// Polarization angle in the yz plane, measured from z.
    pub theta: f64,
    pub delta: f64,
}

impl TrionParams {
    pub fn new(omega: f64, theta: f64, delta: f64) -> Result<Self> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::param("omega", format!("{omega} must be finite and non-negative")));
        }
        if !(0.0..=PI / 2.0).contains(&theta) {
            return Err(Error::param("theta", format!("{theta} outside [0, π/2]")));
        }
        if !delta.is_finite() {
            return Err(Error::param("delta", "not finite"));
        }
        Ok(TrionParams { omega, theta, delta })
    }

    pub fn alpha(&self) -> f64 {
        self.omega / self.delta.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Polarization {
    /// `sinθ ŷ + cosθ ẑ`.
    Linear(f64),
    /// `(x̂ + iŷ)/√2`.
    Circular,
    Vector([C64; 3]),
}

impl Polarization {
    pub fn vector(&self) -> Result<Vector3<C64>> {
        let v = match *self {
            Polarization::Linear(t) => Vector3::new(re(0.0), re(t.sin()), re(t.cos())),
            Polarization::Circular => Vector3::new(re(FRAC_1_SQRT_2), I * FRAC_1_SQRT_2, re(0.0)),
            Polarization::Vector(v) => Vector3::from(v),
        };
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroPolarization);
        }
        Ok(v / re(n))
    }
}

/// Vacuum-to-exciton dipole vectors in units of the dot constant `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleTable {
    /// `|↑e⟩ ↔ |T↑h⟩`
    pub up_trion_up: Vector3<C64>,
    /// `|↓e⟩ ↔ |T↓h⟩`
    pub down_trion_down: Vector3<C64>,
    /// `|↓e⟩ ↔ |T↑h⟩`
    pub down_trion_up: Vector3<C64>,
    /// `|↑e⟩ ↔ |T↓h⟩`
    pub up_trion_down: Vector3<C64>,
}

impl DipoleTable {
    pub fn new(a: f64) -> Self {
        let s = a / 6f64.sqrt();
        let x = Vector3::new(re(1.0), re(0.0), re(0.0));
        let y = Vector3::new(re(0.0), re(1.0), re(0.0));
        let z = Vector3::new(re(0.0), re(0.0), re(1.0));
        DipoleTable {
            up_trion_up: z * re(2.0 * s),
            down_trion_down: z * re(-2.0 * s),
            down_trion_up: (x - y * I) * re(s),
            up_trion_down: (x + y * I) * re(s),
        }
    }
}

/// Ground-to-trion couplings in units of Ω, i.e. `(√6/2)(M/A)·ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleCouplings {
    pub up_trion_up: C64,
    pub down_trion_down: C64,
    pub down_trion_up: C64,
    pub up_trion_down: C64,
}

pub fn dipole_couplings(polarization: &Polarization) -> Result<DipoleCouplings> {
    let e = polarization.vector()?;
    let t = DipoleTable::new(1.0);
    let k = re(6f64.sqrt() / 2.0);
    let proj = |m: &Vector3<C64>| m.iter().zip(e.iter()).map(|(a, b)| a * b).sum::<C64>() * k;
    Ok(DipoleCouplings {
        up_trion_up: proj(&t.up_trion_up),
        down_trion_down: proj(&t.down_trion_down),
        down_trion_up: proj(&t.down_trion_up),
        up_trion_down: proj(&t.up_trion_down),
    })
}

/// Four-level Hamiltonian built from projected dipole couplings.
pub fn dipole_hamiltonian(polarization: &Polarization, omega: f64, delta: f64) -> Result<Operator> {
    let c = dipole_couplings(polarization)?;
    let mut h = Operator::zeros(TRION_DIM, TRION_DIM);
    for (g, t, v) in [
        (UP, TRION_UP, c.up_trion_up),
        (DOWN, TRION_DOWN, c.down_trion_down),
        (DOWN, TRION_UP, c.down_trion_up),
        (UP, TRION_DOWN, c.up_trion_down),
    ] {
        h[(g, t)] = v * omega;
        h[(t, g)] = (v * omega).conj();
    }
    h[(TRION_UP, TRION_UP)] = re(delta);
    h[(TRION_DOWN, TRION_DOWN)] = re(delta);
    Ok(h)
}

/// Rotating-frame Hamiltonian for linear yz polarization.
pub fn trion_hamiltonian(p: &TrionParams) -> Operator {
    let (s, c) = p.theta.sin_cos();
    let w = p.omega;
    let mut h = Operator::zeros(TRION_DIM, TRION_DIM);
    let mut set = |a: usize, b: usize, v: f64| {
        h[(a, b)] = re(v);
        h[(b, a)] = re(v);
    };
    set(UP, TRION_UP, w * c);
    set(UP, TRION_DOWN, 2.0 * w * s);
    set(DOWN, TRION_UP, -2.0 * w * s);
    set(DOWN, TRION_DOWN, -w * c);
    h[(TRION_UP, TRION_UP)] = re(p.delta);
    h[(TRION_DOWN, TRION_DOWN)] = re(p.delta);
    h
}

/// Resonant circular drive of `|↓e⟩ ↔ |T↑h⟩` with Rabi frequency `rabi`.
pub fn circular_drive_hamiltonian(rabi: f64, detuning: f64, phase: f64) -> Operator {
    let mut h = Operator::zeros(TRION_DIM, TRION_DIM);
    let c = C64::from_polar(rabi / 2.0, phase);
    h[(DOWN, TRION_UP)] = c;
    h[(TRION_UP, DOWN)] = c.conj();
    h[(TRION_UP, TRION_UP)] = re(detuning);
    h[(TRION_DOWN, TRION_DOWN)] = re(detuning);
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrionRate {
    /// Spin-flip rotation rate `2|H_eff[↑,↓]|`.
    pub rate: f64,
    /// Rate with sign such that the spin evolves as `R_x(signed·t)`,
    /// `R_x(θ) = exp(iσ_xθ/2)`.
    pub signed: f64,
    /// `(Ω²/δ) sin 2θ`.
    pub closed_form: f64,
}

pub fn trion_raman_rate(p: &TrionParams) -> Result<TrionRate> {
    if p.delta == 0.0 || p.alpha() > MAX_TRION_ALPHA {
        return Err(Error::NonPerturbative { gap: p.delta.abs(), coupling: p.omega });
    }
    let eff = degenerate_pt2(&trion_hamiltonian(p), &[UP, DOWN])?;
    let h01 = eff[(0, 1)];
    Ok(TrionRate {
        rate: 2.0 * h01.norm(),
        signed: -2.0 * h01.re,
        closed_form: p.omega * p.omega / p.delta * (2.0 * p.theta).sin(),
    })
}

fn sorted_spectrum(p: &TrionParams) -> Vec<f64> {
    let mut e: Vec<f64> = HermitianEigen::new(&trion_hamiltonian(p)).values.iter().copied().collect();
    e.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    e
}

/// Spin-flip rate from the exact spectrum: the splitting of the two
/// eigenvalues closest to the spin energy.
pub fn exact_flip_rate(p: &TrionParams) -> f64 {
    let e = sorted_spectrum(p);
    (e[0] - e[1]).abs()
}

/// Mean spin–trion beat frequency of the dressed spectrum.
pub fn beat_frequency(p: &TrionParams) -> f64 {
    let e = sorted_spectrum(p);
    ((e[2] + e[3]) - (e[0] + e[1])).abs() / 2.0
}

/// Rate `π/t*` where `t*` maximizes the `|↓e⟩` population on `[0, t_max]`
/// when starting in `|↑e⟩` under the full four-level Hamiltonian.
pub fn measured_flip_rate(p: &TrionParams, t_max: f64, steps: usize) -> f64 {
    let eig = HermitianEigen::new(&trion_hamiltonian(p));
    let mut psi0 = nalgebra::DVector::zeros(TRION_DIM);
    psi0[UP] = re(1.0);
    let dt = t_max / steps as f64;
    let (best, _) = (1..=steps)
        .map(|k| (k, eig.evolve(&psi0, k as f64 * dt)[DOWN].norm_sqr()))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    PI / (best as f64 * dt)
}

/// `φ_C = (δ_A/δ_C) φ_A`.
pub fn crosstalk_phase(delta_a: f64, delta_c: f64, phi_a: f64) -> Result<f64> {
    if delta_c == 0.0 {
        return Err(Error::param("delta_c", "must be non-zero"));
    }
    Ok(delta_a / delta_c * phi_a)
}

/// `[Rx^t(θ/2), Rz^o(π), Rx^t(θ/2), Rz^o(π)]` in application order, where
/// `o` is the other computational kind.
pub fn corrected_rx(target: UnitKind, angle: f64) -> Result<Vec<GateSpec>> {
    if !target.is_computational() {
        return Err(Error::IllegalGate(format!("{target} is not a computational kind")));
    }
    let other = target.partner();
    let half = GateSpec::Rx(target, angle / 2.0);
    let flip = GateSpec::Rz(other, PI);
    Ok(vec![half, flip, half, flip])
}

/// Two dots driven by one linearly polarized laser; the Z pulses are
/// circularly polarized and reach only the untargeted dot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosstalkParams {
    pub omega: f64,
    pub theta: f64,
    pub delta_target: f64,
    pub delta_other: f64,
    /// Rabi frequency of the circular Z pulses.
    pub omega_prime: f64,
}

impl Default for CrosstalkParams {
    fn default() -> Self {
        CrosstalkParams { omega: 5.0, theta: 26f64.to_radians(), delta_target: 100.0, delta_other: 100.0, omega_prime: 5.0 }
    }
}

/// Piecewise-constant drive of the two dots.
#[derive(Debug, Clone)]
pub struct TrionSegment {
    pub duration: f64,
    pub target: Operator,
    pub other: Operator,
}

fn raman_segment(p: &CrosstalkParams, angle: f64) -> Result<TrionSegment> {
    let tp = TrionParams::new(p.omega, p.theta, p.delta_target)?;
    let rate = trion_raman_rate(&tp)?.signed.signum() * exact_flip_rate(&tp);
    if rate == 0.0 {
        return Err(Error::param("theta", "no spin-flip coupling"));
    }
    // R_x(θ − 2π) = −R_x(θ) when the rotation sense is negative
    let theta = angle.rem_euclid(TAU);
    let sweep = if rate > 0.0 { theta } else { theta - TAU };
    // whole beat periods so the trion admixture closes at the pulse end
    let period = TAU / beat_frequency(&tp);
    let duration = if theta == 0.0 { 0.0 } else { ((sweep / rate) / period).round().max(1.0) * period };
    let other = TrionParams::new(p.omega, p.theta, p.delta_other)?;
    Ok(TrionSegment { duration, target: trion_hamiltonian(&tp), other: trion_hamiltonian(&other) })
}

fn z_segments(p: &CrosstalkParams) -> [TrionSegment; 2] {
    let t = PI / p.omega_prime;
    let idle = Operator::zeros(TRION_DIM, TRION_DIM);
    // φ₂ − φ₁ = 0 gives R_z(π)
    let pulse = circular_drive_hamiltonian(p.omega_prime, 0.0, 0.0);
    [
        TrionSegment { duration: t, target: idle.clone(), other: pulse.clone() },
        TrionSegment { duration: t, target: idle, other: pulse },
    ]
}

/// Segments for `R_x(angle)` on the target dot, with or without the
/// Z-sandwich correction.
pub fn crosstalk_segments(p: &CrosstalkParams, angle: f64, corrected: bool) -> Result<Vec<TrionSegment>> {
    if !corrected {
        return Ok(vec![raman_segment(p, angle)?]);
    }
    let half = raman_segment(p, angle / 2.0)?;
    let mut out = vec![half.clone()];
    out.extend(z_segments(p));
    out.push(half);
    out.extend(z_segments(p));
    Ok(out)
}

/// Propagator of each dot over the segments.
pub fn segment_propagators(segments: &[TrionSegment]) -> (Operator, Operator) {
    let mut ut = Operator::identity(TRION_DIM, TRION_DIM);
    let mut uo = Operator::identity(TRION_DIM, TRION_DIM);
    for s in segments {
        ut = HermitianEigen::new(&s.target).propagator(s.duration) * ut;
        uo = HermitianEigen::new(&s.other).propagator(s.duration) * uo;
    }
    (ut, uo)
}

/// One population sample of both dots.
#[derive(Debug, Clone, PartialEq)]
pub struct TrionSample {
    pub t: f64,
    pub target: [f64; TRION_DIM],
    pub other: [f64; TRION_DIM],
}

/// Populations of both dots on a grid of spacing `dt` plus segment ends.
pub fn crosstalk_trajectory(
    segments: &[TrionSegment],
    psi_target: &[C64; 2],
    psi_other: &[C64; 2],
    dt: f64,
) -> Result<Vec<TrionSample>> {
    if !(dt > 0.0) {
        return Err(Error::param("sample_dt", "must be positive"));
    }
    let lift = |s: &[C64; 2]| {
        let mut v = nalgebra::DVector::zeros(TRION_DIM);
        v[UP] = s[0];
        v[DOWN] = s[1];
        v
    };
    let pops = |v: &nalgebra::DVector<C64>| {
        let mut out = [0.0; TRION_DIM];
        for (o, a) in out.iter_mut().zip(v.iter()) {
            *o = a.norm_sqr();
        }
        out
    };
    let (mut a, mut b) = (lift(psi_target), lift(psi_other));
    let mut out = vec![TrionSample { t: 0.0, target: pops(&a), other: pops(&b) }];
    let mut start = 0.0;
    let mut next = dt;
    for s in segments {
        let ea = HermitianEigen::new(&s.target);
        let eb = HermitianEigen::new(&s.other);
        let end = start + s.duration;
        while next < end - 1e-12 {
            let local = next - start;
            out.push(TrionSample { t: next, target: pops(&ea.evolve(&a, local)), other: pops(&eb.evolve(&b, local)) });
            next += dt;
        }
        a = ea.evolve(&a, s.duration);
        b = eb.evolve(&b, s.duration);
        if s.duration > 0.0 {
            out.push(TrionSample { t: end, target: pops(&a), other: pops(&b) });
        }
        start = end;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkReport {
    /// Fidelity of the target spin block against `R_x(angle)`.
    pub target_fidelity: f64,
    /// Fidelity of the untargeted spin block against the identity.
    pub other_fidelity: f64,
    /// Largest change of an untargeted spin population over the probe states.
    pub other_population_change: f64,
    pub duration: f64,
}

/// `exp(iσ_xθ/2)`.
pub fn rx(theta: f64) -> Operator {
    let (s, c) = (theta / 2.0).sin_cos();
    Operator::from_row_slice(2, 2, &[re(c), I * s, I * s, re(c)])
}

/// `exp(iσ_zθ/2)`.
pub fn rz(theta: f64) -> Operator {
    let half = theta / 2.0;
    Operator::from_row_slice(2, 2, &[C64::from_polar(1.0, half), re(0.0), re(0.0), C64::from_polar(1.0, -half)])
}

fn spin_block(u: &Operator) -> Operator {
    u.view((0, 0), (2, 2)).into_owned()
}

pub fn crosstalk_report(p: &CrosstalkParams, angle: f64, corrected: bool) -> Result<CrosstalkReport> {
    let segs = crosstalk_segments(p, angle, corrected)?;
    let (ut, uo) = segment_propagators(&segs);
    let bt = spin_block(&ut);
    let bo = spin_block(&uo);
    let h = FRAC_1_SQRT_2;
    let probes: [[C64; 2]; 4] = [
        [re(1.0), re(0.0)],
        [re(0.0), re(1.0)],
        [re(h), re(h)],
        [re(h), I * h],
    ];
    let mut change: f64 = 0.0;
    for s in probes {
        for g in 0..2 {
            let out = bo[(g, 0)] * s[0] + bo[(g, 1)] * s[1];
            change = change.max((out.norm_sqr() - s[g].norm_sqr()).abs());
        }
    }
    Ok(CrosstalkReport {
        target_fidelity: gate_fidelity(&rx(angle), &bt)?,
        other_fidelity: gate_fidelity(&Operator::identity(2, 2), &bo)?,
        other_population_change: change,
        duration: segs.iter().map(|s| s.duration).sum(),
    })
}

/// Whether the linear-drive couplings at `p` satisfy the perturbative gap rule.
pub fn is_perturbative(p: &TrionParams) -> bool {
    let (s, c) = p.theta.sin_cos();
    let coupling = p.omega * c.abs().max(2.0 * s.abs());
    p.delta.abs() >= PERTURBATIVE_RATIO * coupling
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_hermitian, max_abs};
    use proptest::prelude::*;

    #[test]
    fn eq18_limits() {
        let h0 = trion_hamiltonian(&TrionParams::new(2.0, 0.0, 50.0).unwrap());
        assert_eq!(h0[(UP, TRION_UP)], re(2.0));
        assert_eq!(h0[(DOWN, TRION_DOWN)], re(-2.0));
        assert_eq!(h0[(UP, TRION_DOWN)], re(0.0));
        assert_eq!(h0[(DOWN, TRION_UP)], re(0.0));
        let h1 = trion_hamiltonian(&TrionParams::new(2.0, PI / 2.0, 50.0).unwrap());
        assert!(h1[(UP, TRION_UP)].norm() < 1e-15);
        assert!((h1[(UP, TRION_DOWN)].re - 4.0).abs() < 1e-15);
        assert!((h1[(DOWN, TRION_UP)].re + 4.0).abs() < 1e-15);
    }

    #[test]
    fn linear_projection_pattern() {
        let th = 0.3;
        let c = dipole_couplings(&Polarization::Linear(th)).unwrap();
        assert!((c.up_trion_up - re(th.cos())).norm() < 1e-15);
        assert!((c.down_trion_down + re(th.cos())).norm() < 1e-15);
        assert!((c.down_trion_up - (-I * th.sin() / 2.0)).norm() < 1e-15);
        assert!((c.up_trion_down - (I * th.sin() / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn circular_keeps_only_down_to_trion_up() {
        let c = dipole_couplings(&Polarization::Circular).unwrap();
        assert!(c.up_trion_up.norm() < 1e-15);
        assert!(c.down_trion_down.norm() < 1e-15);
        assert!(c.up_trion_down.norm() < 1e-15);
        assert!((c.down_trion_up.norm() - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_field_does_not_couple() {
        let x = Polarization::Vector([re(1.0), re(0.0), re(0.0)]);
        let c = dipole_couplings(&x).unwrap();
        assert_eq!(c.up_trion_up, re(0.0));
        assert_eq!(
            dipole_couplings(&Polarization::Vector([re(0.0); 3])),
            Err(Error::ZeroPolarization)
        );
    }

    #[test]
    fn circular_drive_is_spin_selective() {
        let h = dipole_hamiltonian(&Polarization::Circular, 5.0, 0.0).unwrap();
        let eig = HermitianEigen::new(&h);
        let mut psi = nalgebra::DVector::zeros(4);
        psi[UP] = re(1.0);
        for k in 0..200 {
            let v = eig.evolve(&psi, k as f64 * 0.05);
            assert!(v[TRION_UP].norm_sqr() + v[TRION_DOWN].norm_sqr() < 1e-12);
        }
    }

    #[test]
    fn pt_rate_at_theta_zero_vanishes() {
        let r = trion_raman_rate(&TrionParams::new(5.0, 0.0, 100.0).unwrap()).unwrap();
        assert!(r.rate < 1e-15);
        assert_eq!(r.closed_form, 0.0);
    }

    #[test]
    fn pt_rate_matches_four_level_propagation() {
        let p = TrionParams::new(5.0, 26f64.to_radians(), 100.0).unwrap();
        let r = trion_raman_rate(&p).unwrap();
        let measured = measured_flip_rate(&p, 1.5 * PI / r.rate, 20_000);
        assert!((measured - r.rate).abs() / r.rate < 0.1, "{measured} vs {}", r.rate);
        assert!(r.signed < 0.0);
        // PT value is four times the closed form
        assert!((r.rate / r.closed_form - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rate_errors() {
        assert!(trion_raman_rate(&TrionParams::new(5.0, 0.4, 20.0).unwrap()).is_err());
        assert!(trion_raman_rate(&TrionParams::new(5.0, 0.4, 0.0).unwrap()).is_err());
        assert!(TrionParams::new(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn crosstalk_phase_examples() {
        assert_eq!(crosstalk_phase(100.0, 100.0, 0.7).unwrap(), 0.7);
        assert_eq!(crosstalk_phase(100.0, 200.0, 0.0).unwrap(), 0.0);
        assert!((crosstalk_phase(100.0, 200.0, PI / 2.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(crosstalk_phase(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn corrected_sequence_shape() {
        use UnitKind::*;
        let seq = corrected_rx(A, PI / 2.0).unwrap();
        assert_eq!(seq, vec![GateSpec::Rx(A, PI / 4.0), GateSpec::Rz(C, PI), GateSpec::Rx(A, PI / 4.0), GateSpec::Rz(C, PI)]);
        assert!(corrected_rx(B, 1.0).is_err());
    }

    #[test]
    fn zero_angle_correction_is_identity_on_other() {
        let r = crosstalk_report(&CrosstalkParams::default(), 0.0, true).unwrap();
        assert!(r.other_fidelity > 1.0 - 1e-12);
        assert!(r.target_fidelity > 1.0 - 1e-12);
    }

    #[test]
    fn correction_cancels_crosstalk() {
        let p = CrosstalkParams::default();
        let bare = crosstalk_report(&p, PI / 2.0, false).unwrap();
        let fixed = crosstalk_report(&p, PI / 2.0, true).unwrap();
        assert!(bare.other_population_change >= 0.1);
        assert!(fixed.other_population_change <= 0.01);
        assert!(fixed.target_fidelity >= 0.99);
    }

    #[test]
    fn rotation_helpers() {
        let u = rx(PI);
        assert!(max_abs(&(u - Operator::from_row_slice(2, 2, &[re(0.0), I, I, re(0.0)]))) < 1e-15);
        assert!(gate_fidelity(&rz(TAU), &Operator::identity(2, 2)).unwrap() > 1.0 - 1e-15);
    }

    proptest! {
        #[test]
        fn hamiltonian_hermitian(theta in 0.0..=PI / 2.0, w in 0.0..20.0f64, d in -100.0..100.0f64) {
            let h = trion_hamiltonian(&TrionParams::new(w, theta, d).unwrap());
            prop_assert!(is_hermitian(&h, 1e-14));
        }

        #[test]
        fn rate_symmetric_about_quarter_pi(x in 0.0..=PI / 4.0) {
            let rate = |t: f64| trion_raman_rate(&TrionParams::new(2.0, t, 100.0).unwrap()).unwrap().rate;
            let a = rate(PI / 4.0 - x);
            let b = rate(PI / 4.0 + x);
            prop_assert!((a - b).abs() <= 1e-12 * rate(PI / 4.0));
            prop_assert!(a <= rate(PI / 4.0) + 1e-15);
        }
    }
}
