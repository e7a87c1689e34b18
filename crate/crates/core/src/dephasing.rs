//! Exact solution of the spin-boson pure-dephasing model.
//!
//! A qubit coupled through `σ₃` to a bosonic field with spectral weight `J`
//! keeps its populations; the coherence decays as `e^{-γ_t}` with
//!
//! ```text
//! γ_t = 2‖g − g_t‖² = 4 ∫ J(ω) (1 − cos ωt) dω,   g_t(ω) = e^{-iωt} g(ω).
//! ```
//!
//! For `‖g‖ < ∞` this is bounded by `8‖g‖²` ("false decoherence", the
//! formation of a dressing cloud); only an infrared `J ∼ ω⁻²` gives linear
//! growth `γ_t ≈ 2π·lim ω²J(ω)·t`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::formfactor::SpectralWeight;
use crate::quadrature::{self, Substitution, Tolerance};
use crate::{Error, Result};

/// Normalization tolerance for qubit amplitudes.
pub const NORM_TOL: f64 = 1e-12;

/// Minimum number of samples for a rate fit.
pub const MIN_RATE_SAMPLES: usize = 8;

/// Panel width used to resolve `cos ωt` and `sin ωt`.
fn oscillation_panel(t: f64) -> Option<f64> {
    (t != 0.0).then(|| PI / (4.0 * t.abs()))
}

/// `γ_t = 4∫J(ω)(1 − cos ωt)dω`.
///
/// `1 − cos x` is evaluated as `2 sin²(x/2)`, which keeps the integrand
/// accurate at small `ωt` where van Hove singular weights rely on it.
pub fn gamma_t(j: &SpectralWeight, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if !j.converges_with(2.0) {
        return Err(Error::DivergentIntegral(format!(
            "(1 - cos ωt)·J(ω) is not integrable for the {} weight",
            j.kind()
        )));
    }
    let half = 0.5 * t;
    let integral = j.integrate_against(
        |w| {
            let s = (w * half).sin();
            2.0 * s * s
        },
        oscillation_panel(t),
    )?;
    Ok(4.0 * integral)
}

/// Global phase `θ_t = t·E_g − Im⟨g|g_t⟩ = t·E_g + ∫J(ω) sin ωt dω`.
pub fn global_phase(j: &SpectralWeight, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let e_g = j.dressing_energy()?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let oscillating = j.integrate_against(|w| (w * t).sin(), oscillation_panel(t))?;
    Ok(t * e_g + oscillating)
}

/// Qubit amplitudes `(ψ₊, ψ₋)` in the `σ₃` eigenbasis `(e₊, e₋)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitAmplitudes {
    plus: Complex64,
    minus: Complex64,
}

impl QubitAmplitudes {
    pub fn new(plus: Complex64, minus: Complex64) -> Result<Self> {
        let norm = plus.norm_sqr() + minus.norm_sqr();
        if !((norm - 1.0).abs() <= NORM_TOL) {
            return Err(Error::InvalidState(format!(
                "|ψ+|² + |ψ-|² = {norm}, expected 1"
            )));
        }
        Ok(QubitAmplitudes { plus, minus })
    }

    /// Normalizes the given amplitudes; fails only for the zero vector.
    pub fn normalized(plus: Complex64, minus: Complex64) -> Result<Self> {
        let norm = (plus.norm_sqr() + minus.norm_sqr()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("amplitudes cannot be normalized".into()));
        }
        Ok(QubitAmplitudes {
            plus: plus / norm,
            minus: minus / norm,
        })
    }

    /// Equal superposition `(e₊ + e₋)/√2`.
    pub fn balanced() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitAmplitudes { plus: a, minus: a }
    }

    pub fn plus(&self) -> Complex64 {
        self.plus
    }

    pub fn minus(&self) -> Complex64 {
        self.minus
    }
}

/// Reduced 2×2 qubit state; row/column 0 is `e₊`, 1 is `e₋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensityMatrix(pub Matrix2<Complex64>);

impl QubitDensityMatrix {
    /// State with populations of `psi` and coherence damped by `e^{-γ}`.
    pub fn dephased(psi: &QubitAmplitudes, gamma: f64) -> Self {
        let damp = (-gamma).exp();
        let coh = psi.plus * psi.minus.conj() * damp;
        QubitDensityMatrix(Matrix2::new(
            Complex64::new(psi.plus.norm_sqr(), 0.0),
            coh,
            coh.conj(),
            Complex64::new(psi.minus.norm_sqr(), 0.0),
        ))
    }

    pub fn trace(&self) -> f64 {
        (self.0[(0, 0)] + self.0[(1, 1)]).re
    }

    /// `ρ₊₋`.
    pub fn coherence(&self) -> Complex64 {
        self.0[(0, 1)]
    }

    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.0[(0, 0)].re;
        let d = self.0[(1, 1)].re;
        let b = self.0[(0, 1)].norm();
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mean - r, mean + r]
    }
}

/// `ρ_t = Tr_B |Ψ(t)⟩⟨Ψ(t)|`.
pub fn reduced_state(psi: &QubitAmplitudes, j: &SpectralWeight, t: f64) -> Result<QubitDensityMatrix> {
    Ok(QubitDensityMatrix::dephased(psi, gamma_t(j, t)?))
}

/// `|⟨Ψ_in|Φ±(g)⟩|² = e^{-‖g‖²}` with a flag for the van Hove limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundOverlap {
    pub value: f64,
    /// Bare and dressed states are disjoint (`‖g‖ = ∞`); `value` is then 0.
    pub disjoint: bool,
}

pub fn ground_overlap(j: &SpectralWeight) -> Result<GroundOverlap> {
    if !j.converges_with(0.0) {
        return Ok(GroundOverlap {
            value: 0.0,
            disjoint: true,
        });
    }
    Ok(GroundOverlap {
        value: (-j.norm_sq()?).exp(),
        disjoint: false,
    })
}

/// `|⟨W(f)Ω, W(g)Ω⟩|² = exp(−∫(√J_f − √J_g)² dω)`.
pub fn coherent_overlap(jf: &SpectralWeight, jg: &SpectralWeight) -> Result<f64> {
    for (name, w) in [("f", jf), ("g", jg)] {
        if !w.converges_with(0.0) {
            return Err(Error::DivergentIntegral(format!(
                "‖{name}‖² is infinite for the {} weight",
                w.kind()
            )));
        }
    }
    let lo = jf.omega_min().min(jg.omega_min());
    let hi = jf.omega_c().max(jg.omega_c());
    let mut pts = vec![lo, hi, jf.omega_min(), jf.omega_c(), jg.omega_min(), jg.omega_c()];
    pts.extend_from_slice(jf.nodes());
    pts.extend_from_slice(jg.nodes());
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    // Strongest infrared singularity among the weights that reach the lower limit.
    let exponent = [jf, jg]
        .iter()
        .filter(|w| w.omega_min() == lo && w.amplitude() > 0.0)
        .map(|w| w.ir_exponent())
        .fold(0.0, f64::min);
    let distance = quadrature::integrate_in(
        |w| {
            let d = jf.amplitude_at(w) - jg.amplitude_at(w);
            d * d
        },
        &pts,
        Substitution::for_ir_exponent(exponent, lo),
        Tolerance::default(),
    )?;
    Ok((-distance.value).exp())
}

/// `8‖g‖²`; `+∞` for van Hove singular weights.
pub fn false_decoherence_bound(j: &SpectralWeight) -> Result<f64> {
    if !j.converges_with(0.0) {
        return Ok(f64::INFINITY);
    }
    Ok(8.0 * j.norm_sq()?)
}

/// Sampled evolution of the reduced qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingTrajectory {
    pub times: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `None` when the dressing energy `E_g` diverges and the phase is undefined.
    pub phase: Option<Vec<f64>>,
    pub states: Vec<QubitDensityMatrix>,
}

/// Evaluate `γ_t`, `θ_t` and `ρ_t` on an increasing, non-negative time grid.
///
/// For stable weights every `γ_t` is checked against `8‖g‖²`.
pub fn trajectory(psi: &QubitAmplitudes, j: &SpectralWeight, times: &[f64]) -> Result<DephasingTrajectory> {
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    if times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("time grid must start at t >= 0".into()));
    }
    let gamma: Vec<f64> = times.par_iter().map(|&t| gamma_t(j, t)).collect::<Result<_>>()?;

    let bound = false_decoherence_bound(j)?;
    // Quadrature may overshoot the bound by its own tolerance.
    let slack = bound * 16.0 * quadrature::REL_TOL;
    if let Some((&t, &g)) = times.iter().zip(&gamma).find(|(_, &g)| g > bound + slack) {
        return Err(Error::BoundViolated { t, gamma: g, bound });
    }

    let phase = if j.converges_with(1.0) {
        Some(times.par_iter().map(|&t| global_phase(j, t)).collect::<Result<_>>()?)
    } else {
        None
    };
    let states = gamma.iter().map(|&g| QubitDensityMatrix::dephased(psi, g)).collect();
    Ok(DephasingTrajectory {
        times: times.to_vec(),
        gamma,
        phase,
        states,
    })
}

/// Linear fit of `γ_t` over a time window.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// Root-mean-square deviation of the samples from the fitted line.
    pub residual: f64,
    /// `2π·lim_{ω→0} ω²J(ω)`, the slope implied by `γ_t = 2‖g − g_t‖²`.
    pub analytic_candidate: Option<f64>,
}

/// Least-squares line through `samples` uniformly spaced `(t, γ_t)` points
/// on `[t₁, t₂]`. Nonlinear growth shows up as a large residual.
pub fn asymptotic_rate(j: &SpectralWeight, window: (f64, f64), samples: usize) -> Result<RateEstimate> {
    let (t1, t2) = window;
    if samples < MIN_RATE_SAMPLES {
        return Err(Error::WindowTooNarrow {
            samples,
            min: MIN_RATE_SAMPLES,
        });
    }
    if !(t1 > 0.0 && t2 > t1 && t2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "rate window must satisfy 0 < t1 < t2, got ({t1}, {t2})"
        )));
    }
    let times: Vec<f64> = (0..samples)
        .map(|k| t1 + (t2 - t1) * k as f64 / (samples - 1) as f64)
        .collect();
    let gamma: Vec<f64> = times.par_iter().map(|&t| gamma_t(j, t)).collect::<Result<_>>()?;
    let fit = crate::stats::linear_fit(&times, &gamma);
    Ok(RateEstimate {
        slope: fit.slope,
        intercept: fit.intercept,
        window,
        residual: fit.rms_residual,
        analytic_candidate: j.ir_limit_omega2().map(|l| 2.0 * PI * l),
    })
}
