//! Master equations for a particle coupled to an ohmic heat bath.
//!
//! - [`pure`]: the pure-decoherence equation
//!   `dρ/dt = −i[V(X), ρ] − γ[X, [X, ρ]]` on a uniform position grid, with its
//!   closed-form solution and a fixed-step RK4 integrator.
//! - [`caldeira_leggett`]: `dρ/dt = −i[H, ρ] − iη[X, {P, ρ}] − 2MηT[X, [X, ρ]]`
//!   on a truncated harmonic-oscillator basis.
//!
//! In the heavy-particle limit `M → ∞` at fixed `Mη` the second reduces to
//! the first with `γ = 2MηT` (our reading of the formal limit).

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub mod caldeira_leggett;
mod oscillator;
pub mod pure;
mod rk4;

pub use caldeira_leggett::{evolve_caldeira_leggett, ClOptions, ClParams, ClRun};
pub use oscillator::OscillatorOperators;
pub use pure::{
    evolve_pure_decoherence_exact, evolve_pure_decoherence_numeric, run_pure_decoherence, GridDensityMatrix,
    PureRun,
};

pub type CMatrix = DMatrix<Complex64>;

/// Potential energy `V(x)`, evaluated pointwise on positions.
#[derive(Clone)]
pub struct Potential {
    label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Potential {
    pub fn zero() -> Self {
        Potential::from_fn("zero", |_| 0.0)
    }

    /// `V(x) = M ω² x² / 2`.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        let k = mass * omega * omega;
        Potential::from_fn(format!("harmonic(M={mass}, omega={omega})"), move |x| 0.5 * k * x * x)
    }

    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Potential {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Potential").field(&self.label).finish()
    }
}

/// Per-record diagnostics emitted by both integrators.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    /// `|Tr ρ_t − Tr ρ_0|`.
    pub trace_dev: f64,
    /// `max |ρ − ρ†|`.
    pub herm_dev: f64,
    pub min_eig: f64,
    pub purity: f64,
    /// Population of the two highest basis levels (oscillator basis only).
    pub leak: Option<f64>,
    /// `|ρ_ij|` in the position basis for the requested pairs.
    pub coherences: Vec<f64>,
}

/// Commutator `[A, B]`.
pub(crate) fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Anticommutator `{A, B}`.
pub(crate) fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// `[D, B]` for diagonal `D = diag(d)`.
pub(crate) fn diag_commutator(d: &[f64], b: &CMatrix) -> CMatrix {
    CMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * (d[i] - d[j]))
}

pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn trace_re(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// `Tr ρ²` for Hermitian `ρ`.
pub(crate) fn purity(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

fn check_pairs(pairs: &[(usize, usize)], n: usize) -> crate::Result<()> {
    if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= n || j >= n) {
        return Err(crate::Error::InvalidParameter(format!(
            "coherence pair ({i}, {j}) outside basis of size {n}"
        )));
    }
    Ok(())
}
