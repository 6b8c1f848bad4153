//! Units, chain configuration and the tensor-product state space.
//!
//! Basis convention: every unit has the three levels `|0⟩, |1⟩, |X⟩` in that
//! order, and the chain space is little-endian over units (unit 0 varies
//! fastest), so the basis index of `|l_0 l_1 … l_{n-1}⟩` is `Σ l_i 3^i`.

use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, Operator, C64};

/// Levels per unit.
pub const UNIT_DIM: usize = 3;

/// Default optical transition energies (rad/ps) for kinds A, B, C, D.
pub const DEFAULT_OMEGA1: [f64; 4] = [1000.0, 1100.0, 1200.0, 1300.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Zero,
    One,
    X,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Zero, Level::One, Level::X];

    pub fn index(self) -> usize {
        match self {
            Level::Zero => 0,
            Level::One => 1,
            Level::X => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Level> {
        Level::ALL.get(i).copied()
    }

    pub fn from_char(c: char) -> Option<Level> {
        match c {
            '0' => Some(Level::Zero),
            '1' => Some(Level::One),
            'X' | 'x' => Some(Level::X),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Level::Zero => '0',
            Level::One => '1',
            Level::X => 'X',
        }
    }
}

/// Parses a label string such as `"01X"` into per-unit levels.
pub fn parse_labels(s: &str) -> Option<Vec<Level>> {
    s.chars().map(Level::from_char).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitKind {
    A,
    B,
    C,
    D,
}

impl UnitKind {
    pub const ALL: [UnitKind; 4] = [UnitKind::A, UnitKind::B, UnitKind::C, UnitKind::D];
    pub const BARRIERS: [UnitKind; 2] = [UnitKind::B, UnitKind::D];
    pub const COMPUTATIONAL: [UnitKind; 2] = [UnitKind::A, UnitKind::C];

    pub fn is_computational(self) -> bool {
        matches!(self, UnitKind::A | UnitKind::C)
    }

    pub fn is_barrier(self) -> bool {
        !self.is_computational()
    }

    /// The other kind with the same role (A↔C, B↔D).
    pub fn partner(self) -> UnitKind {
        match self {
            UnitKind::A => UnitKind::C,
            UnitKind::C => UnitKind::A,
            UnitKind::B => UnitKind::D,
            UnitKind::D => UnitKind::B,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_char(c: char) -> Option<UnitKind> {
        match c.to_ascii_uppercase() {
            'A' => Some(UnitKind::A),
            'B' => Some(UnitKind::B),
            'C' => Some(UnitKind::C),
            'D' => Some(UnitKind::D),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            UnitKind::A => 'A',
            UnitKind::B => 'B',
            UnitKind::C => 'C',
            UnitKind::D => 'D',
        }
    }
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One site of the chain. Frequencies are angular (rad/ps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSpec {
    pub kind: UnitKind,
    /// Zeeman splitting of the spin qubit.
    pub omega0: f64,
    /// Optical `|0⟩–|X⟩` transition energy.
    pub omega1: f64,
}

impl UnitSpec {
    pub fn new(kind: UnitKind, omega0: f64, omega1: f64) -> Self {
        UnitSpec { kind, omega0, omega1 }
    }

    /// Unit with the default optical energy of its kind and `omega0`.
    pub fn with_defaults(kind: UnitKind, omega0: f64) -> Self {
        UnitSpec { kind, omega0, omega1: DEFAULT_OMEGA1[kind.index()] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub units: Vec<UnitSpec>,
    /// XY exchange coupling between neighbouring spins (rad/ps).
    pub j: f64,
    /// Optical lifetime of `|X⟩` (ps).
    pub tau_x: Option<f64>,
    /// Whether Raman lasers also drive the other computational kind.
    pub crosstalk_mode: bool,
}

impl ChainConfig {
    pub fn new(units: Vec<UnitSpec>, j: f64) -> Result<Self> {
        let cfg = ChainConfig { units, j, tau_x: None, crosstalk_mode: false };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a chain from a pattern string such as `"ABCD"` with default
    /// optical energies and `ω₀ = 0`.
    pub fn from_pattern(pattern: &str, j: f64) -> Result<Self> {
        let units = pattern
            .chars()
            .map(|c| {
                UnitKind::from_char(c)
                    .map(|k| UnitSpec::with_defaults(k, 0.0))
                    .ok_or_else(|| Error::param("pattern", format!("unknown unit kind '{c}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        ChainConfig::new(units, j)
    }

    pub fn with_tau_x(mut self, tau_x: f64) -> Result<Self> {
        self.tau_x = Some(tau_x);
        self.validate()?;
        Ok(self)
    }

    pub fn with_crosstalk(mut self, on: bool) -> Self {
        self.crosstalk_mode = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.units.is_empty() {
            return Err(Error::param("units", "chain has no units"));
        }
        if !(self.j > 0.0 && self.j.is_finite()) {
            return Err(Error::param("j", format!("must be positive, got {}", self.j)));
        }
        if let Some(t) = self.tau_x {
            if !(t > 0.0) {
                return Err(Error::param("tau_x", format!("must be positive, got {t}")));
            }
        }
        for (i, pair) in self.units.windows(2).enumerate() {
            let (l, r) = (pair[0].kind, pair[1].kind);
            if l.is_computational() == r.is_computational() {
                return Err(Error::InvalidPattern {
                    left: i,
                    right: i + 1,
                    left_kind: l,
                    right_kind: r,
                    role: if l.is_computational() { "computational" } else { "barriers" },
                });
            }
        }
        let omega0 = self.units[0].omega0;
        for u in &self.units {
            if !(u.omega1 > 0.0 && u.omega1.is_finite()) {
                return Err(Error::param("omega1", format!("must be positive, got {}", u.omega1)));
            }
            if u.omega0 != omega0 {
                return Err(Error::param("omega0", "Zeeman splitting must be uniform along the chain"));
            }
        }
        for a in &self.units {
            for b in &self.units {
                if a.kind == b.kind && a.omega1 != b.omega1 {
                    return Err(Error::param(
                        "omega1",
                        format!("units of kind {} disagree on their optical energy", a.kind),
                    ));
                }
                if a.kind != b.kind && a.omega1 == b.omega1 {
                    return Err(Error::param(
                        "omega1",
                        format!("kinds {} and {} share an optical energy", a.kind, b.kind),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn kinds(&self) -> Vec<UnitKind> {
        self.units.iter().map(|u| u.kind).collect()
    }

    pub fn units_of_kind(&self, kind: UnitKind) -> impl Iterator<Item = usize> + '_ {
        self.units.iter().enumerate().filter(move |(_, u)| u.kind == kind).map(|(i, _)| i)
    }

    /// Optical energy used by units of `kind`, if the chain has any.
    pub fn omega1_of(&self, kind: UnitKind) -> Option<f64> {
        self.units.iter().find(|u| u.kind == kind).map(|u| u.omega1)
    }

    pub fn pattern(&self) -> String {
        self.units.iter().map(|u| u.kind.as_char()).collect()
    }
}

/// Dimension and basis bookkeeping for a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSpace {
    kinds: Vec<UnitKind>,
    dims: Vec<usize>,
    dim: usize,
}

pub fn compose_chain(config: &ChainConfig) -> Result<ChainSpace> {
    config.validate()?;
    let kinds = config.kinds();
    let dims = vec![UNIT_DIM; kinds.len()];
    let dim = linalg::product_dim(&dims);
    Ok(ChainSpace { kinds, dims, dim })
}

impl ChainSpace {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_units(&self) -> usize {
        self.kinds.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kinds(&self) -> &[UnitKind] {
        &self.kinds
    }

    pub fn index(&self, labels: &[Level]) -> Result<usize> {
        if labels.len() != self.n_units() {
            return Err(Error::LabelCount { expected: self.n_units(), got: labels.len() });
        }
        Ok(labels.iter().rev().fold(0, |acc, l| acc * UNIT_DIM + l.index()))
    }

    pub fn labels(&self, mut index: usize) -> Vec<Level> {
        (0..self.n_units())
            .map(|_| {
                let l = Level::from_index(index % UNIT_DIM).expect("digit < 3");
                index /= UNIT_DIM;
                l
            })
            .collect()
    }

    /// Label string in unit order, e.g. `"01X"` for `|0_0 1_1 X_2⟩`.
    pub fn label_string(&self, index: usize) -> String {
        self.labels(index).into_iter().map(Level::as_char).collect()
    }

    pub fn basis_state(&self, labels: &[Level]) -> Result<StateVector> {
        let k = self.index(labels)?;
        let mut v = DVector::zeros(self.dim);
        v[k] = C64::new(1.0, 0.0);
        Ok(StateVector(v))
    }

    /// Embeds a single-unit operator acting on `unit`.
    pub fn embed(&self, local: &Operator, unit: usize) -> Operator {
        linalg::embed(local, unit, &self.dims)
    }

    pub fn reduce(&self, rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(rho, &self.dims, keep)
    }
}

/// Pure state over a product space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(pub DVector<C64>);

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Self {
        StateVector(amplitudes)
    }

    /// Normalises arbitrary amplitudes.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let n = amplitudes.norm();
        if !(n > 0.0) {
            return Err(Error::param("amplitudes", "zero vector cannot be normalised"));
        }
        Ok(StateVector(amplitudes / C64::new(n, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix(&self.0 * self.0.adjoint())
    }

    /// Little-endian product: `parts[0]` is unit 0.
    pub fn product(parts: &[StateVector]) -> StateVector {
        let mut acc = DVector::from_element(1, C64::new(1.0, 0.0));
        for p in parts {
            acc = p.0.kronecker(&acc);
        }
        StateVector(acc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(pub Operator);

impl DensityMatrix {
    pub fn new(m: Operator) -> Self {
        DensityMatrix(m)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        psi.to_density()
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Operator {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::HermitianEigen::new(&self.0).values.iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Hermitian, unit trace and positive semidefinite within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        linalg::is_hermitian(&self.0, tol)
            && (self.trace() - C64::new(1.0, 0.0)).norm() <= tol
            && self.min_eigenvalue() >= -tol
    }

    /// Little-endian product: `parts[0]` is unit 0.
    pub fn product(parts: &[DensityMatrix]) -> DensityMatrix {
        let mut acc = Operator::identity(1, 1);
        for p in parts {
            acc = p.0.kronecker(&acc);
        }
        DensityMatrix(acc)
    }
}

/// Partial trace over every unit not listed in `keep`. The result is ordered
/// by ascending unit index.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let d = linalg::product_dim(dims);
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: rho.dim() });
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    for w in kept.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateKeep(w[0]));
        }
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::UnitIndex { index: bad, len: dims.len() });
    }
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let dk = linalg::product_dim(&kept_dims);
    let dt = d / dk;

    // groups[t] holds (full index, kept index) for traced configuration t
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); dt];
    for full in 0..d {
        let mut rem = full;
        let (mut ki, mut kmul, mut ti, mut tmul) = (0, 1, 0, 1);
        for (u, &du) in dims.iter().enumerate() {
            let digit = rem % du;
            rem /= du;
            if kept.binary_search(&u).is_ok() {
                ki += digit * kmul;
                kmul *= du;
            } else {
                ti += digit * tmul;
                tmul *= du;
            }
        }
        groups[ti].push((full, ki));
    }
    let mut out = Operator::zeros(dk, dk);
    for g in &groups {
        for &(fi, ki) in g {
            for &(fj, kj) in g {
                out[(ki, kj)] += rho.0[(fi, fj)];
            }
        }
    }
    Ok(DensityMatrix(out))
}
