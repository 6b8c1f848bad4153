//! Chain Hamiltonian, laser drive terms and second-order effective
//! Hamiltonians.
//!
//! Sign conventions used throughout the crate:
//!
//! * A laser of frequency `ω_l` on the `|a⟩–|X⟩` transition has detuning
//!   `δ = (E_X − E_a) − ω_l`, so the rotating-frame Hamiltonian carries
//!   `+δ |X⟩⟨X|`.
//! * A lab-frame drive `Ω cos(ω_l t + φ)(|a⟩⟨X| + h.c.)` becomes
//!   `(Ω/2)(e^{iφ}|a⟩⟨X| + e^{−iφ}|X⟩⟨a|)` after the rotating wave
//!   approximation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, ket_bra, re, Operator, C64};
use crate::statespace::{compose_chain, ChainConfig, ChainSpace, Level, UnitKind, UnitSpec, UNIT_DIM};

/// Threshold on `gap / coupling` below which second-order perturbation
/// theory is refused.
pub const PERTURBATIVE_RATIO: f64 = 10.0;

const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transition {
    /// `|0⟩–|X⟩`
    ZeroX,
    /// `|1⟩–|X⟩`
    OneX,
}

impl Transition {
    pub fn lower(self) -> Level {
        match self {
            Transition::ZeroX => Level::Zero,
            Transition::OneX => Level::One,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Transition::ZeroX => "0X",
            Transition::OneX => "1X",
        }
    }

    pub fn parse(s: &str) -> Option<Transition> {
        match s {
            "0X" | "0x" => Some(Transition::ZeroX),
            "1X" | "1x" => Some(Transition::OneX),
            _ => None,
        }
    }
}

/// One rectangular laser addressing a transition of every unit of a kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    pub target_kind: UnitKind,
    pub transition: Transition,
    /// Rabi frequency Ω (rad/ps).
    pub rabi: f64,
    /// Detuning δ (rad/ps), see the module docs for the sign.
    pub detuning: f64,
    /// Laser phase φ (rad).
    pub phase: f64,
    /// Lab-frame frequency; derived from the detuning when absent.
    pub frequency: Option<f64>,
}

impl LaserParams {
    pub fn new(target_kind: UnitKind, transition: Transition, rabi: f64, detuning: f64, phase: f64) -> Self {
        LaserParams { target_kind, transition, rabi, detuning, phase, frequency: None }
    }

    pub fn resonant(target_kind: UnitKind, transition: Transition, rabi: f64, phase: f64) -> Self {
        Self::new(target_kind, transition, rabi, 0.0, phase)
    }

    /// Perturbative parameter α = Ω/|δ| (infinite on resonance).
    pub fn alpha(&self) -> f64 {
        self.rabi / self.detuning.abs()
    }

    pub fn lab_frequency(&self, unit: &UnitSpec) -> f64 {
        self.frequency.unwrap_or_else(|| {
            let lower = match self.transition {
                Transition::ZeroX => 0.0,
                Transition::OneX => unit.omega0,
            };
            unit.omega1 - lower - self.detuning
        })
    }
}

/// `J Σ_i (|0_i 1_{i+1}⟩⟨1_i 0_{i+1}| + h.c.)`; touches only spin levels.
pub fn xy_coupling(space: &ChainSpace, j: f64) -> Operator {
    let d = space.dim();
    let mut h = Operator::zeros(d, d);
    for col in 0..d {
        let labels = space.labels(col);
        for i in 0..labels.len().saturating_sub(1) {
            if labels[i] == Level::One && labels[i + 1] == Level::Zero {
                let mut hopped = labels.clone();
                hopped[i] = Level::Zero;
                hopped[i + 1] = Level::One;
                let row = space.index(&hopped).expect("same length");
                h[(row, col)] += re(j);
                h[(col, row)] += re(j);
            }
        }
    }
    h
}

/// Total spin excitation number `N = Σ_i |1_i⟩⟨1_i|`.
pub fn excitation_number(space: &ChainSpace) -> Operator {
    let one = ket_bra(UNIT_DIM, 1, 1);
    (0..space.n_units()).fold(Operator::zeros(space.dim(), space.dim()), |acc, u| acc + space.embed(&one, u))
}

/// Static lab-frame chain Hamiltonian:
/// `Σ_i (ω₀|1_i⟩⟨1_i| + ω₁^i|X_i⟩⟨X_i|) + J Σ_{⟨ij⟩}(|0_i 1_j⟩⟨1_i 0_j| + h.c.)`.
pub fn chain_hamiltonian(config: &ChainConfig) -> Result<Operator> {
    let space = compose_chain(config)?;
    let mut h = xy_coupling(&space, config.j);
    for (i, u) in config.units.iter().enumerate() {
        let local = ket_bra(UNIT_DIM, 1, 1) * re(u.omega0) + ket_bra(UNIT_DIM, 2, 2) * re(u.omega1);
        h += space.embed(&local, i);
    }
    Ok(h)
}

/// Drive of one unit in the frame where the spin levels rotate at their own
/// Zeeman energy and `|X⟩` rotates with the laser. Returns the 3×3 operator
/// and the detuning carried by `|X⟩` (None when undriven).
pub fn spin_frame_drive(unit: &UnitSpec, lasers: &[LaserParams]) -> Result<(Operator, Option<f64>)> {
    let mut seen: [Option<&LaserParams>; 2] = [None, None];
    for l in lasers {
        if l.target_kind != unit.kind {
            return Err(Error::KindMismatch { laser: l.target_kind, unit: unit.kind });
        }
        let slot = l.transition.lower().index();
        if seen[slot].is_some() {
            return Err(Error::DuplicateTransition(l.transition.as_str()));
        }
        seen[slot] = Some(l);
    }
    if let (Some(a), Some(b)) = (seen[0], seen[1]) {
        if a.detuning != b.detuning {
            return Err(Error::UnequalRamanDetuning(a.detuning, b.detuning));
        }
    }
    let mut h = Operator::zeros(UNIT_DIM, UNIT_DIM);
    let mut detuning = None;
    for l in seen.iter().flatten() {
        let a = l.transition.lower().index();
        let coupling = C64::from_polar(l.rabi / 2.0, l.phase);
        h[(a, 2)] += coupling;
        h[(2, a)] += coupling.conj();
        detuning = Some(l.detuning);
    }
    if let Some(d) = detuning {
        h[(2, 2)] = re(d);
    }
    Ok((h, detuning))
}

/// Single-unit rotating-wave Hamiltonian.
///
/// Two-laser Raman drive: `δ|X⟩⟨X| + (Ω₁/2)(|0⟩⟨X| + h.c.) + (Ω₂/2)(|1⟩⟨X| + h.c.)`.
/// Without a `1X` laser the spin level `|1⟩` is not in a rotating frame and
/// keeps its Zeeman energy, e.g. one laser on `0X` gives
/// `ω₀|1⟩⟨1| + δ|X⟩⟨X| + (Ω₁/2)(e^{iφ₁}|0⟩⟨X| + h.c.)`.
pub fn rwa_drive(unit: &UnitSpec, lasers: &[LaserParams]) -> Result<Operator> {
    let (mut h, _) = spin_frame_drive(unit, lasers)?;
    if !lasers.iter().any(|l| l.transition == Transition::OneX) {
        h[(1, 1)] += re(unit.omega0);
    }
    Ok(h)
}

/// Full time-dependent single-unit Hamiltonian without the rotating wave
/// approximation, for validation runs.
pub fn lab_drive(unit: &UnitSpec, lasers: &[LaserParams], t: f64) -> Operator {
    let mut h = Operator::zeros(UNIT_DIM, UNIT_DIM);
    h[(1, 1)] = re(unit.omega0);
    h[(2, 2)] = re(unit.omega1);
    for l in lasers {
        let a = l.transition.lower().index();
        let c = l.rabi * (l.lab_frequency(unit) * t + l.phase).cos();
        h[(a, 2)] += re(c);
        h[(2, a)] += re(c);
    }
    h
}

/// Second-order degenerate perturbation theory onto `subspace`:
/// `H_eff[a,b] = H[a,b] − Σ_{k∉S} H[a,k] H[k,b] / (E_k − E_S)`.
///
/// Refuses non-degenerate subspaces and couplings larger than a tenth of
/// the gap to the complement.
pub fn degenerate_pt2(h: &Operator, subspace: &[usize]) -> Result<Operator> {
    let d = h.nrows();
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: d, got: h.ncols() });
    }
    if subspace.is_empty() {
        return Err(Error::param("subspace", "empty"));
    }
    if let Some(&bad) = subspace.iter().find(|&&i| i >= d) {
        return Err(Error::UnitIndex { index: bad, len: d });
    }
    let scale = linalg::max_abs(h).max(1.0);
    let diag: Vec<f64> = subspace.iter().map(|&a| h[(a, a)].re).collect();
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > DEGENERACY_TOL * scale {
        return Err(Error::NotDegenerate { spread: hi - lo });
    }
    let e_s = diag.iter().sum::<f64>() / diag.len() as f64;
    let outside: Vec<usize> = (0..d).filter(|k| !subspace.contains(k)).collect();

    let mut gap = f64::INFINITY;
    let mut coupling: f64 = 0.0;
    for &k in &outside {
        gap = gap.min((h[(k, k)].re - e_s).abs());
        for &a in subspace {
            coupling = coupling.max(h[(a, k)].norm());
        }
    }
    if coupling > 0.0 && gap < PERTURBATIVE_RATIO * coupling {
        return Err(Error::NonPerturbative { gap, coupling });
    }

    let n = subspace.len();
    let mut eff = Operator::zeros(n, n);
    for (i, &a) in subspace.iter().enumerate() {
        for (j, &b) in subspace.iter().enumerate() {
            let mut v = h[(a, b)];
            for &k in &outside {
                let num = h[(a, k)] * h[(k, b)];
                if num != C64::new(0.0, 0.0) {
                    v -= num / (h[(k, k)].re - e_s);
                }
            }
            eff[(i, j)] = v;
        }
    }
    Ok(eff)
}

/// Rotation rate (rad/ps) of the spin driven by a 2×2 effective
/// Hamiltonian: twice the off-diagonal magnitude.
pub fn spin_flip_rate(h_eff: &Operator) -> f64 {
    2.0 * h_eff[(0, 1)].norm()
}

/// Raman rotation rate Ω₁Ω₂/(2δ) to leading order.
pub fn raman_rate(rabi0: f64, rabi1: f64, detuning: f64) -> f64 {
    rabi0 * rabi1 / (2.0 * detuning)
}

/// Duration of a resonant π pulse.
pub fn pi_pulse_time(rabi: f64) -> f64 {
    PI / rabi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_hermitian, max_abs, HermitianEigen};
    use crate::statespace::Level::*;

    fn abc(j: f64) -> ChainConfig {
        ChainConfig::from_pattern("ABC", j).unwrap()
    }

    #[test]
    fn xy_matrix_element_is_j() {
        let cfg = abc(0.7);
        let space = compose_chain(&cfg).unwrap();
        let h = chain_hamiltonian(&cfg).unwrap();
        let bra = space.index(&[Zero, One, Zero]).unwrap();
        let ket = space.index(&[One, Zero, Zero]).unwrap();
        assert_eq!(h[(bra, ket)], re(0.7));
        assert!(is_hermitian(&h, 1e-12));
    }

    #[test]
    fn ground_state_has_zero_energy() {
        let cfg = abc(1.0);
        let space = compose_chain(&cfg).unwrap();
        let h = chain_hamiltonian(&cfg).unwrap();
        let g = space.basis_state(&[Zero, Zero, Zero]).unwrap();
        assert!((&h * &g.0).norm() < 1e-15);
    }

    #[test]
    fn single_excitation_block_spectrum() {
        let j = 1.3;
        let space = compose_chain(&abc(j)).unwrap();
        let h = xy_coupling(&space, j);
        let idx: Vec<usize> = [[One, Zero, Zero], [Zero, One, Zero], [Zero, Zero, One]]
            .iter()
            .map(|l| space.index(l).unwrap())
            .collect();
        let block = Operator::from_fn(3, 3, |r, c| h[(idx[r], idx[c])]);
        let mut got: Vec<f64> = HermitianEigen::new(&block).values.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        // roots of −λ(λ² − 2J²)
        let oracle = [-(2.0_f64).sqrt() * j, 0.0, (2.0_f64).sqrt() * j];
        for (g, o) in got.iter().zip(oracle) {
            assert!((g - o).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn xy_conserves_excitation_number_and_spares_x() {
        let cfg = ChainConfig::from_pattern("ABCD", 1.0).unwrap();
        let space = compose_chain(&cfg).unwrap();
        let h = chain_hamiltonian(&cfg).unwrap();
        let n = excitation_number(&space);
        assert!(max_abs(&linalg::commutator(&h, &n)) < 1e-12);
        let xy = xy_coupling(&space, 1.0);
        for col in 0..space.dim() {
            for row in 0..space.dim() {
                if xy[(row, col)] != re(0.0) {
                    let xs = |i: usize| space.labels(i).iter().map(|&l| l == X).collect::<Vec<_>>();
                    assert_eq!(xs(row), xs(col));
                }
            }
        }
    }

    #[test]
    fn raman_rwa_matches_closed_form() {
        let unit = UnitSpec::with_defaults(UnitKind::A, 0.0);
        let lasers = [
            LaserParams::new(UnitKind::A, Transition::ZeroX, 10.0, 50.0, 0.0),
            LaserParams::new(UnitKind::A, Transition::OneX, 10.0, 50.0, 0.0),
        ];
        let h = rwa_drive(&unit, &lasers).unwrap();
        let expected = Operator::from_row_slice(
            3,
            3,
            &[re(0.0), re(0.0), re(5.0), re(0.0), re(0.0), re(5.0), re(5.0), re(5.0), re(50.0)],
        );
        assert!(max_abs(&(h - expected)) < 1e-15);
    }

    #[test]
    fn zero_rabi_gives_diagonal_drive() {
        let unit = UnitSpec::with_defaults(UnitKind::C, 0.0);
        let lasers = [
            LaserParams::new(UnitKind::C, Transition::ZeroX, 0.0, 20.0, 0.0),
            LaserParams::new(UnitKind::C, Transition::OneX, 0.0, 20.0, 0.0),
        ];
        let h = rwa_drive(&unit, &lasers).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    assert_eq!(h[(r, c)], re(0.0));
                }
            }
        }
        assert_eq!(h[(2, 2)], re(20.0));
    }

    #[test]
    fn phase_pi_flips_coupling_sign() {
        let unit = UnitSpec::new(UnitKind::A, 2.0, 1000.0);
        let h0 = rwa_drive(&unit, &[LaserParams::resonant(UnitKind::A, Transition::ZeroX, 4.0, 0.0)]).unwrap();
        let hp = rwa_drive(&unit, &[LaserParams::resonant(UnitKind::A, Transition::ZeroX, 4.0, PI)]).unwrap();
        assert!((h0[(0, 2)] + hp[(0, 2)]).norm() < 1e-15);
        assert!((h0[(2, 0)] + hp[(2, 0)]).norm() < 1e-15);
        assert_eq!(h0[(1, 1)], re(2.0));
        assert_eq!(h0[(0, 2)], re(2.0));
    }

    #[test]
    fn rwa_drive_errors() {
        let unit = UnitSpec::with_defaults(UnitKind::A, 0.0);
        let twice = [
            LaserParams::resonant(UnitKind::A, Transition::ZeroX, 1.0, 0.0),
            LaserParams::resonant(UnitKind::A, Transition::ZeroX, 2.0, 0.0),
        ];
        assert_eq!(rwa_drive(&unit, &twice), Err(Error::DuplicateTransition("0X")));
        let wrong = [LaserParams::resonant(UnitKind::C, Transition::ZeroX, 1.0, 0.0)];
        assert!(matches!(rwa_drive(&unit, &wrong), Err(Error::KindMismatch { .. })));
        let split = [
            LaserParams::new(UnitKind::A, Transition::ZeroX, 1.0, 10.0, 0.0),
            LaserParams::new(UnitKind::A, Transition::OneX, 1.0, 11.0, 0.0),
        ];
        assert!(matches!(rwa_drive(&unit, &split), Err(Error::UnequalRamanDetuning(..))));
    }

    #[test]
    fn lab_drive_cosine_envelope() {
        let unit = UnitSpec::new(UnitKind::A, 3.0, 1000.0);
        let laser = LaserParams::resonant(UnitKind::A, Transition::ZeroX, 10.0, 0.0);
        let h = lab_drive(&unit, &[laser], 0.0);
        assert_eq!(h[(0, 2)], re(10.0));
        assert_eq!(h[(1, 1)], re(3.0));
        let quarter = PI / 2.0 / 1000.0;
        assert!(lab_drive(&unit, &[laser], quarter)[(0, 2)].norm() < 1e-12);
        let period = 2.0 * PI / 1000.0;
        let n = 400;
        let mean: f64 =
            (0..n).map(|k| lab_drive(&unit, &[laser], period * k as f64 / n as f64)[(0, 2)].re).sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn raman_effective_coupling() {
        let unit = UnitSpec::with_defaults(UnitKind::A, 0.0);
        let h = rwa_drive(
            &unit,
            &[
                LaserParams::new(UnitKind::A, Transition::ZeroX, 10.0, 50.0, 0.0),
                LaserParams::new(UnitKind::A, Transition::OneX, 10.0, 50.0, 0.0),
            ],
        )
        .unwrap();
        let eff = degenerate_pt2(&h, &[0, 1]).unwrap();
        // matrix element Ω₁Ω₂/(4δ), rotation rate Ω₁Ω₂/(2δ)
        assert!((eff[(0, 1)].re + 0.5).abs() < 1e-14);
        assert!((spin_flip_rate(&eff) - 1.0).abs() < 1e-14);
        assert!((raman_rate(10.0, 10.0, 50.0) - 1.0).abs() < 1e-15);
        assert!(is_hermitian(&eff, 1e-14));
    }

    #[test]
    fn pt2_zero_coupling_and_errors() {
        let mut h = Operator::zeros(3, 3);
        h[(2, 2)] = re(5.0);
        let eff = degenerate_pt2(&h, &[0, 1]).unwrap();
        assert!(max_abs(&eff) == 0.0);

        h[(0, 2)] = re(1.0);
        h[(2, 0)] = re(1.0);
        assert!(matches!(degenerate_pt2(&h, &[0, 1]), Err(Error::NonPerturbative { .. })));

        let mut nd = Operator::zeros(3, 3);
        nd[(1, 1)] = re(0.5);
        nd[(2, 2)] = re(100.0);
        assert!(matches!(degenerate_pt2(&nd, &[0, 1]), Err(Error::NotDegenerate { .. })));
    }
}
