use thiserror::Error;

use crate::statespace::UnitKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain pattern: units {left} ({left_kind}) and {right} ({right_kind}) are both {role}")]
    InvalidPattern {
        left: usize,
        right: usize,
        left_kind: UnitKind,
        right_kind: UnitKind,
        role: &'static str,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("expected {expected} level labels, got {got}")]
    LabelCount { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unit index {index} out of range for a chain of {len} units")]
    UnitIndex { index: usize, len: usize },

    #[error("reduction needs at least one unit to keep")]
    EmptyKeep,

    #[error("duplicate unit index {0} in keep set")]
    DuplicateKeep(usize),

    #[error("two lasers address the same {0} transition")]
    DuplicateTransition(&'static str),

    #[error("Raman lasers must share one detuning (got {0} and {1})")]
    UnequalRamanDetuning(f64, f64),

    #[error("laser targets kind {laser} but was applied to a unit of kind {unit}")]
    KindMismatch { laser: UnitKind, unit: UnitKind },

    #[error("subspace is not degenerate: diagonal spread {spread:e}")]
    NotDegenerate { spread: f64 },

    #[error("perturbative regime violated: gap {gap} < 10 x coupling {coupling}")]
    NonPerturbative { gap: f64, coupling: f64 },

    #[error("passivation Rabi frequency {rabi} is below the blocking threshold 10 J = {threshold}")]
    BelowBlockingThreshold { rabi: f64, threshold: f64 },

    #[error("calibration did not converge: {0}")]
    Calibration(String),

    #[error("illegal gate: {0}")]
    IllegalGate(String),

    #[error("illegal schedule interval {index}: {reason}")]
    IllegalInterval { index: usize, reason: String },

    #[error("schedule parse error on line {line}: {reason}")]
    ScheduleParse { line: usize, reason: String },

    #[error("integrator step size underflow at t = {t} (step {step:e})")]
    StepSizeFailure { t: f64, step: f64 },

    #[error("zero polarization vector")]
    ZeroPolarization,

    #[error("barrier unit {unit} is not initialised in |1⟩ (population {population})")]
    BarrierNotExcited { unit: usize, population: f64 },

    #[error("crosstalk conflict on unit {0}: it already carries its own drive")]
    CrosstalkConflict(usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
