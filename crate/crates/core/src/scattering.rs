//! Dephasing rate of a qubit scattering bath particles elastically, in the
//! Markovian low-density Born approximation:
//!
//! `γ = π ∫ F(ω)² n(ω) dω`, with `F = |f|²` the squared scattering amplitude
//! and `n` the bath occupation density.
//!
//! Only the rate formula is modelled. The underlying two-channel Hamiltonian
//! dynamics is out of scope, so the formula is the module's definition of the
//! rate and is not validated against exact evolution.

use std::f64::consts::PI;

use crate::formfactor::{MonotoneCubic, SpectralWeight};
use crate::quadrature::{self, Substitution, Tolerance};
use crate::{Error, Result};

/// Occupation density `n(ω) ≥ 0` of the scattering particles.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Constant(f64),
    /// Bose-Einstein occupation `1/(e^{ω/T} − 1)`.
    Thermal { temperature: f64 },
    /// Monotone-cubic interpolation of `(ω, n)` samples. No extrapolation.
    Tabulated(MonotoneCubic),
}

impl Density {
    pub fn constant(n0: f64) -> Result<Self> {
        if !(n0 >= 0.0 && n0.is_finite()) {
            return Err(Error::InvalidParameter(format!("density must be finite and >= 0, got {n0}")));
        }
        Ok(Density::Constant(n0))
    }

    pub fn thermal(temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be > 0, got {temperature}"
            )));
        }
        Ok(Density::Thermal { temperature })
    }

    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        if points.iter().any(|&(_, n)| !(n >= 0.0)) {
            return Err(Error::InvalidParameter("tabulated density must be >= 0".into()));
        }
        Ok(Density::Tabulated(MonotoneCubic::new(points)?))
    }

    pub fn eval(&self, omega: f64) -> f64 {
        match self {
            Density::Constant(n0) => *n0,
            Density::Thermal { temperature } => 1.0 / (omega / temperature).exp_m1(),
            Density::Tabulated(t) => t.eval(omega).max(0.0),
        }
    }

    /// Exponent `e` with `n(ω) ∼ ω^e` as `ω → 0`.
    fn ir_exponent(&self) -> f64 {
        match self {
            Density::Thermal { .. } => -1.0,
            _ => 0.0,
        }
    }

    fn covers(&self, lo: f64, hi: f64) -> bool {
        match self {
            Density::Tabulated(t) => {
                let (a, b) = t.range();
                a <= lo && hi <= b
            }
            Density::Thermal { .. } => lo >= 0.0,
            Density::Constant(_) => true,
        }
    }
}

/// A scattering channel: squared amplitude `F(ω)` and density `n(ω)`.
#[derive(Debug, Clone)]
pub struct ScatteringChannel {
    form: SpectralWeight,
    density: Density,
}

impl ScatteringChannel {
    /// Fails unless `‖f‖² = ∫F` is finite and `n` is defined on the support of `F`.
    pub fn new(form: SpectralWeight, density: Density) -> Result<Self> {
        if !form.converges_with(0.0) {
            return Err(Error::InvalidWeight(format!(
                "scattering amplitude must have finite norm; {} weight with omega_min = 0 does not",
                form.kind()
            )));
        }
        if !density.covers(form.omega_min(), form.omega_c()) {
            return Err(Error::InvalidParameter(format!(
                "density does not cover the amplitude support [{}, {}]",
                form.omega_min(),
                form.omega_c()
            )));
        }
        Ok(ScatteringChannel { form, density })
    }

    pub fn form(&self) -> &SpectralWeight {
        &self.form
    }

    pub fn density(&self) -> &Density {
        &self.density
    }
}

/// `π ∫ F(ω)² n(ω) dω`.
pub fn scattering_rate(ch: &ScatteringChannel) -> Result<f64> {
    let f = &ch.form;
    if f.amplitude() == 0.0 {
        return Ok(0.0);
    }
    let lo = f.omega_min();
    let exponent = 2.0 * f.ir_exponent() + ch.density.ir_exponent();
    if lo == 0.0 && exponent <= -1.0 {
        return Err(Error::DivergentIntegral(format!(
            "∫F²n diverges at ω = 0 (integrand ∼ ω^{exponent})"
        )));
    }
    let mut pts = vec![lo, f.omega_c()];
    pts.extend_from_slice(f.nodes());
    if let Density::Tabulated(t) = &ch.density {
        pts.extend(t.nodes().iter().copied().filter(|w| f.in_support(*w)));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let est = quadrature::integrate_in(
        |w| {
            let v = f.value(w);
            v * v * ch.density.eval(w)
        },
        &pts,
        Substitution::for_ir_exponent(exponent, lo),
        Tolerance::default(),
    )?;
    Ok(PI * est.value)
}

/// One member of [`small_norm_family`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyMember {
    pub width: f64,
    /// Box height `H`.
    pub height: f64,
    /// `‖f‖² = ∫F = H·w`.
    pub norm_sq: f64,
    /// Rate recomputed by [`scattering_rate`].
    pub rate: f64,
}

/// Box-shaped `F` centred on `omega0`, one per width, each tuned to the same
/// rate `gamma_target`: `H = √(γ/(π w n(ω₀)))`, so `‖f‖² = √(γ w/(π n(ω₀)))`.
///
/// Widths must be positive, strictly decreasing and narrower than `2·omega0`.
pub fn small_norm_family(gamma_target: f64, widths: &[f64], omega0: f64, n: &Density) -> Result<Vec<FamilyMember>> {
    if !(gamma_target > 0.0 && gamma_target.is_finite()) {
        return Err(Error::InvalidTarget(format!("target rate must be > 0, got {gamma_target}")));
    }
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return Err(Error::InvalidTarget(format!("box centre must be > 0, got {omega0}")));
    }
    if widths.is_empty() {
        return Err(Error::InvalidTarget("no widths given".into()));
    }
    if let Some(&w) = widths.iter().find(|&&w| !(w > 0.0 && w < 2.0 * omega0)) {
        return Err(Error::InvalidTarget(format!(
            "width {w} must lie in (0, {}) for a box centred at {omega0}",
            2.0 * omega0
        )));
    }
    if widths.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::InvalidTarget("widths must be strictly decreasing".into()));
    }
    let n0 = n.eval(omega0);
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::InvalidTarget(format!("density at the box centre must be > 0, got {n0}")));
    }

    widths
        .iter()
        .map(|&w| {
            let height = (gamma_target / (PI * w * n0)).sqrt();
            let form = SpectralWeight::flat(height, omega0 - 0.5 * w, omega0 + 0.5 * w)?;
            let norm_sq = form.norm_sq()?;
            let ch = ScatteringChannel::new(form, n.clone())?;
            Ok(FamilyMember {
                width: w,
                height,
                norm_sq,
                rate: scattering_rate(&ch)?,
            })
        })
        .collect()
}
