//! Observables and figures of merit.

use std::f64::consts::PI;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::{Operator, C64};
use crate::statespace::{ChainSpace, DensityMatrix, Level};

/// `|Tr(u†v)|² / d²`.
pub fn gate_fidelity(u: &Operator, v: &Operator) -> Result<f64> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), got: v.nrows() });
    }
    let d = u.nrows() as f64;
    let tr: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(tr.norm_sqr() / (d * d))
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn populations(rho: &DensityMatrix) -> Vec<f64> {
    rho.populations()
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn state_fidelity(rho: &DensityMatrix, psi: &nalgebra::DVector<C64>) -> Result<f64> {
    if rho.dim() != psi.len() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: psi.len() });
    }
    Ok((psi.adjoint() * rho.matrix() * psi)[(0, 0)].re)
}

/// Basis indices in which every unit is in |0⟩ or |1⟩.
pub fn qubit_indices(space: &ChainSpace) -> Vec<usize> {
    (0..space.dim()).filter(|&i| !space.labels(i).contains(&Level::X)).collect()
}

/// Largest population outside the all-qubit subspace over the samples.
pub fn leakage(traj: &Trajectory) -> f64 {
    let inside = qubit_indices(&traj.space);
    (0..traj.len())
        .map(|k| {
            let pops = traj.populations(k);
            1.0 - inside.iter().map(|&i| pops[i]).sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Restricts `u` to the qubit levels of `units` with every other unit pinned
/// to a level. The result is indexed big-endian in the order of `units`.
pub fn project_qubits(u: &Operator, space: &ChainSpace, units: &[usize], pinned: &[(usize, Level)]) -> Result<Operator> {
    let n = space.n_units();
    if u.nrows() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: u.nrows() });
    }
    let mut covered = vec![false; n];
    for &i in units.iter().chain(pinned.iter().map(|(i, _)| i)) {
        if i >= n {
            return Err(Error::UnitIndex { index: i, len: n });
        }
        if covered[i] {
            return Err(Error::DuplicateKeep(i));
        }
        covered[i] = true;
    }
    if let Some(missing) = covered.iter().position(|c| !c) {
        return Err(Error::param("pinned", format!("unit {missing} is neither kept nor pinned")));
    }
    let k = units.len();
    let full: Vec<usize> = (0..1usize << k)
        .map(|q| {
            let mut labels = vec![Level::Zero; n];
            for (pos, &unit) in units.iter().enumerate() {
                labels[unit] = if (q >> (k - 1 - pos)) & 1 == 1 { Level::One } else { Level::Zero };
            }
            for &(unit, level) in pinned {
                labels[unit] = level;
            }
            space.index(&labels).expect("labels sized to the chain")
        })
        .collect();
    Ok(Operator::from_fn(full.len(), full.len(), |r, c| u[(full[r], full[c])]))
}

/// `1 − σ_min²` of a projected block: zero iff the block is unitary.
pub fn projection_loss(block: &Operator) -> f64 {
    let gram = block.adjoint() * block;
    let eig = crate::linalg::HermitianEigen::new(&gram);
    1.0 - eig.values.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FomParams {
    pub omega: f64,
    /// α = Ω/δ.
    pub alpha: f64,
    pub tau_x: f64,
    pub delta: f64,
}

impl FomParams {
    pub fn new(omega: f64, alpha: f64, tau_x: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param("alpha", format!("{alpha} outside (0, 1)")));
        }
        if !(tau_x >= 0.0) {
            return Err(Error::param("tau_x", format!("{tau_x} is negative")));
        }
        if !(omega > 0.0) || !(delta > 0.0) {
            return Err(Error::param("omega", "omega and delta must be positive"));
        }
        Ok(FomParams { omega, alpha, tau_x, delta })
    }

    /// Effective decoherence time `τ_X/(4α²)`.
    pub fn tau_d(&self) -> f64 {
        self.tau_x / (4.0 * self.alpha * self.alpha)
    }

    /// Raman gate time `π/(Ωα)`.
    pub fn tau_g_raman(&self) -> f64 {
        PI / (self.omega * self.alpha)
    }

    /// Detuned-cycle Z gate time `π/(δα²)`.
    pub fn tau_g_z(&self) -> f64 {
        PI / (self.delta * self.alpha * self.alpha)
    }
}

/// `Ωτ_X/(4πα)`.
pub fn fom_raman(p: &FomParams) -> f64 {
    p.omega * p.tau_x / (4.0 * PI * p.alpha)
}

/// `τ_Xδ/(4π)`.
pub fn fom_z(p: &FomParams) -> f64 {
    p.tau_x * p.delta / (4.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{re, I};
    use crate::statespace::{compose_chain, partial_trace, ChainConfig, StateVector};
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn pauli_x() -> Operator {
        Operator::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])
    }

    #[test]
    fn fidelity_examples() {
        let u = Operator::from_row_slice(2, 2, &[re(0.6), re(0.8), re(-0.8), re(0.6)]);
        assert!((gate_fidelity(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        let phased = &u * C64::from_polar(1.0, 0.7);
        assert!((gate_fidelity(&u, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(gate_fidelity(&Operator::identity(2, 2), &pauli_x()).unwrap(), 0.0);
        assert!(gate_fidelity(&Operator::identity(2, 2), &Operator::identity(3, 3)).is_err());
    }

    #[test]
    fn purity_examples() {
        let pure = DensityMatrix::from_pure(&StateVector::new(DVector::from_vec(vec![re(0.6), I * 0.8])));
        assert!((purity(&pure) - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::new(Operator::identity(2, 2) * re(0.5));
        assert!((purity(&mixed) - 0.5).abs() < 1e-15);
        let mut m = Operator::zeros(2, 2);
        m[(0, 0)] = re(0.9);
        m[(1, 1)] = re(0.1);
        assert!((purity(&DensityMatrix::new(m)) - 0.82).abs() < 1e-15);
    }

    #[test]
    fn fom_examples() {
        let p = FomParams::new(10.0, 0.1, 1.0, 100.0).unwrap();
        assert!((fom_raman(&p) - 7.957_747_154_594_767).abs() < 1e-12);
        let half = FomParams { alpha: 0.05, ..p };
        assert!((fom_raman(&half) - 2.0 * fom_raman(&p)).abs() < 1e-12);
        let zero = FomParams::new(10.0, 0.1, 0.0, 100.0).unwrap();
        assert_eq!(fom_raman(&zero), 0.0);
        assert_eq!(fom_z(&zero), 0.0);
        let z = FomParams::new(10.0, 0.1, 0.01, 100.0).unwrap();
        assert!((fom_z(&z) - 0.079_577_471_545_947_67).abs() < 1e-15);
        let doubled = FomParams { delta: 200.0, ..z };
        assert!((fom_z(&doubled) - 2.0 * fom_z(&z)).abs() < 1e-15);
        assert!((p.tau_d() / p.tau_g_raman() - fom_raman(&p)).abs() < 1e-12);
        assert!((z.tau_d() / z.tau_g_z() - fom_z(&z)).abs() < 1e-12);
        assert!(FomParams::new(10.0, 1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn projection_orders_big_endian() {
        let cfg = ChainConfig::from_pattern("ABC", 1.0).unwrap();
        let space = compose_chain(&cfg).unwrap();
        let u = Operator::identity(27, 27);
        let p = project_qubits(&u, &space, &[0, 2], &[(1, Level::One)]).unwrap();
        assert_eq!(p, Operator::identity(4, 4));
        assert!(projection_loss(&p).abs() < 1e-12);
        assert!(project_qubits(&u, &space, &[0], &[(1, Level::One)]).is_err());
    }

    fn random_unitary(d: usize, seed: &[f64]) -> Operator {
        let m = Operator::from_fn(d, d, |r, c| C64::new(seed[(r * d + c) % seed.len()] + r as f64 * 0.1, seed[(r + c * d + 1) % seed.len()]));
        let h = &m + m.adjoint();
        crate::linalg::HermitianEigen::new(&h).propagator(1.0)
    }

    proptest! {
        #[test]
        fn fidelity_symmetric_and_phase_invariant(
            a in prop::collection::vec(-1.0..1.0f64, 9),
            b in prop::collection::vec(-1.0..1.0f64, 9),
            g in -3.0..3.0f64,
        ) {
            let u = random_unitary(3, &a);
            let v = random_unitary(3, &b);
            let f = gate_fidelity(&u, &v).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
            prop_assert!((f - gate_fidelity(&v, &u).unwrap()).abs() < 1e-12);
            prop_assert!((f - gate_fidelity(&(&u * C64::from_polar(1.0, g)), &v).unwrap()).abs() < 1e-12);
            prop_assert!((gate_fidelity(&u, &(&u * C64::from_polar(1.0, g))).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn reduced_purity_bounds(amps in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9)) {
            let v = DVector::from_iterator(9, amps.iter().map(|&(r, i)| C64::new(r, i)));
            prop_assume!(v.norm() > 1e-3);
            let psi = StateVector::normalized(v).unwrap();
            let rho = partial_trace(&psi.to_density(), &[3, 3], &[0]).unwrap();
            let p = purity(&rho);
            prop_assert!((1.0 / 3.0 - 1e-12..=1.0 + 1e-12).contains(&p));
        }
    }
}
