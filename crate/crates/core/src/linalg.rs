//! Dense complex linear algebra shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
pub use num_complex::Complex64 as C64;

/// Complex square matrix over a chain space or a single unit.
pub type Operator = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `|a⟩⟨b|` in a `dim`-dimensional space.
pub fn ket_bra(dim: usize, a: usize, b: usize) -> Operator {
    let mut m = Operator::zeros(dim, dim);
    m[(a, b)] = re(1.0);
    m
}

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

/// Number of basis states of a little-endian product space.
pub fn product_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Stride of `unit` in a little-endian product space (unit 0 varies fastest).
pub fn stride(dims: &[usize], unit: usize) -> usize {
    dims[..unit].iter().product()
}

/// Embeds a local operator acting on `unit` into the full product space.
pub fn embed(local: &Operator, unit: usize, dims: &[usize]) -> Operator {
    let d = product_dim(dims);
    let local_dim = dims[unit];
    assert_eq!(local.nrows(), local_dim, "local operator has the wrong dimension");
    let s = stride(dims, unit);
    let mut out = Operator::zeros(d, d);
    for col in 0..d {
        let b = (col / s) % local_dim;
        let base = col - b * s;
        for a in 0..local_dim {
            let v = local[(a, b)];
            if v != C64::new(0.0, 0.0) {
                out[(base + a * s, col)] += v;
            }
        }
    }
    out
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

pub fn max_abs(m: &Operator) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_hermitian(m: &Operator, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

pub fn is_unitary(m: &Operator, tol: f64) -> bool {
    m.is_square() && max_abs(&(m.adjoint() * m - identity(m.nrows()))) <= tol
}

/// Spectral decomposition of a Hermitian operator, reused to evaluate
/// `exp(-i H t)` for many `t` at the cost of one diagonalisation.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: Operator,
}

impl HermitianEigen {
    pub fn new(h: &Operator) -> Self {
        // Symmetrise so round-off in the input cannot leak into the spectrum.
        let sym = (h + h.adjoint()) * re(0.5);
        let eig = SymmetricEigen::new(sym);
        HermitianEigen { values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    fn phases(&self, t: f64) -> DVector<C64> {
        self.values.map(|e| C64::from_polar(1.0, -e * t))
    }

    /// `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> Operator {
        let ph = self.phases(t);
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= ph[j];
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i H t) ψ` without forming the propagator.
    pub fn evolve(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut coeffs = self.vectors.ad_mul(psi);
        let ph = self.phases(t);
        coeffs.component_mul_assign(&ph);
        &self.vectors * coeffs
    }
}
