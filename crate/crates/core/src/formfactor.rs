//! Coupling spectral weights `J(ω) = |g(ω)|²`.
//!
//! Every quantity of the dephasing model depends on the formfactor `g` only
//! through `|g|²`, so `g` is never stored; where an amplitude is needed it is
//! taken real and non-negative, `g = √J`.
//!
//! Convergence of moments is decided from the analytic infrared behaviour of
//! each kind, never by watching a quadrature blow up.

use std::f64::consts::PI;
use std::fmt;

use crate::quadrature::{self, Substitution, Tolerance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightKind {
    PowerLaw,
    Flat,
    Ohmic,
    InverseSquare,
    Tabulated,
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::PowerLaw => "power-law",
            WeightKind::Flat => "flat",
            WeightKind::Ohmic => "ohmic",
            WeightKind::InverseSquare => "inverse-square",
            WeightKind::Tabulated => "tabulated",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    PowerLaw { kappa: f64 },
    Flat,
    Ohmic,
    InverseSquare,
    Tabulated(MonotoneCubic),
}

/// Squared formfactor `J(ω)` supported on `[omega_min, omega_c]`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWeight {
    shape: Shape,
    amplitude: f64,
    omega_min: f64,
    omega_c: f64,
}

fn check_support(omega_min: f64, omega_c: f64) -> Result<()> {
    if !(omega_min >= 0.0 && omega_min.is_finite()) {
        return Err(Error::InvalidWeight(format!(
            "omega_min must be finite and >= 0, got {omega_min}"
        )));
    }
    if !(omega_c > omega_min && omega_c.is_finite()) {
        return Err(Error::InvalidWeight(format!(
            "omega_c must be finite and > omega_min, got [{omega_min}, {omega_c}]"
        )));
    }
    Ok(())
}

fn check_amplitude(a: f64) -> Result<()> {
    if a >= 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidWeight(format!(
            "amplitude must be finite and >= 0, got {a}"
        )))
    }
}

impl SpectralWeight {
    /// `J(ω) = A·ω^(κ-1)` with `κ > 0`.
    pub fn power_law(amplitude: f64, kappa: f64, omega_min: f64, omega_c: f64) -> Result<Self> {
        check_amplitude(amplitude)?;
        check_support(omega_min, omega_c)?;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidWeight(format!(
                "power-law exponent kappa must be > 0, got {kappa}"
            )));
        }
        Ok(SpectralWeight {
            shape: Shape::PowerLaw { kappa },
            amplitude,
            omega_min,
            omega_c,
        })
    }

    /// `J(ω) = A`.
    pub fn flat(amplitude: f64, omega_min: f64, omega_c: f64) -> Result<Self> {
        check_amplitude(amplitude)?;
        check_support(omega_min, omega_c)?;
        Ok(SpectralWeight {
            shape: Shape::Flat,
            amplitude,
            omega_min,
            omega_c,
        })
    }

    /// `J(ω) = A/ω`. With `omega_min = 0` the weight is not normalizable;
    /// it is still constructible so that its singular character can be
    /// reported by [`SpectralWeight::classify`].
    pub fn ohmic(amplitude: f64, omega_min: f64, omega_c: f64) -> Result<Self> {
        check_amplitude(amplitude)?;
        check_support(omega_min, omega_c)?;
        Ok(SpectralWeight {
            shape: Shape::Ohmic,
            amplitude,
            omega_min,
            omega_c,
        })
    }

    /// `J(ω) = A/ω²`, the infrared behaviour that gives a finite dephasing rate.
    pub fn inverse_square(amplitude: f64, omega_min: f64, omega_c: f64) -> Result<Self> {
        check_amplitude(amplitude)?;
        check_support(omega_min, omega_c)?;
        Ok(SpectralWeight {
            shape: Shape::InverseSquare,
            amplitude,
            omega_min,
            omega_c,
        })
    }

    /// Sampled `(ω, J)` pairs, interpolated by a monotone cubic. The support
    /// is exactly the tabulated range; nothing is extrapolated.
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        let table = MonotoneCubic::new(points)?;
        let (lo, hi) = table.range();
        if lo < 0.0 {
            return Err(Error::InvalidWeight(format!(
                "tabulated frequencies must be >= 0, first is {lo}"
            )));
        }
        if points.iter().any(|&(_, j)| !(j >= 0.0 && j.is_finite())) {
            return Err(Error::InvalidWeight(
                "tabulated J values must be finite and >= 0".into(),
            ));
        }
        Ok(SpectralWeight {
            shape: Shape::Tabulated(table),
            amplitude: 1.0,
            omega_min: lo,
            omega_c: hi,
        })
    }

    /// Vanishing coupling on `[0, omega_c]`.
    pub fn zero(omega_c: f64) -> Result<Self> {
        Self::flat(0.0, 0.0, omega_c)
    }

    pub fn kind(&self) -> WeightKind {
        match self.shape {
            Shape::PowerLaw { .. } => WeightKind::PowerLaw,
            Shape::Flat => WeightKind::Flat,
            Shape::Ohmic => WeightKind::Ohmic,
            Shape::InverseSquare => WeightKind::InverseSquare,
            Shape::Tabulated(_) => WeightKind::Tabulated,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn kappa(&self) -> Option<f64> {
        match self.shape {
            Shape::PowerLaw { kappa } => Some(kappa),
            _ => None,
        }
    }

    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    /// Table nodes for tabulated weights, empty otherwise.
    pub fn nodes(&self) -> &[f64] {
        match &self.shape {
            Shape::Tabulated(t) => &t.x,
            _ => &[],
        }
    }

    pub fn in_support(&self, omega: f64) -> bool {
        omega >= self.omega_min && omega <= self.omega_c
    }

    /// `J(ω)`; zero outside the support.
    pub fn value(&self, omega: f64) -> f64 {
        if !self.in_support(omega) {
            return 0.0;
        }
        let a = self.amplitude;
        match &self.shape {
            Shape::PowerLaw { kappa } => a * omega.powf(kappa - 1.0),
            Shape::Flat => a,
            Shape::Ohmic => a / omega,
            Shape::InverseSquare => a / (omega * omega),
            Shape::Tabulated(t) => a * t.eval(omega),
        }
    }

    /// Square-root amplitude `g(ω) = √J(ω)` in the real, non-negative convention.
    pub fn amplitude_at(&self, omega: f64) -> f64 {
        self.value(omega).sqrt()
    }

    /// Exponent `e` with `J(ω) ∼ ω^e` as `ω → 0` for the functional form.
    pub fn ir_exponent(&self) -> f64 {
        match self.shape {
            Shape::PowerLaw { kappa } => kappa - 1.0,
            Shape::Flat | Shape::Tabulated(_) => 0.0,
            Shape::Ohmic => -1.0,
            Shape::InverseSquare => -2.0,
        }
    }

    /// Whether `∫ ω^power J(ω) dω` converges at the lower limit.
    ///
    /// The upper limit is always finite, so only the infrared end matters.
    pub fn converges_with(&self, power: f64) -> bool {
        if self.amplitude == 0.0 || self.omega_min > 0.0 {
            return true;
        }
        self.ir_exponent() + power > -1.0
    }

    /// `lim_{ω→0} ω² J(ω)` for the functional form, ignoring the infrared
    /// cutoff. `None` for tables that do not reach `ω = 0`.
    pub fn ir_limit_omega2(&self) -> Option<f64> {
        match self.shape {
            Shape::InverseSquare => Some(self.amplitude),
            Shape::PowerLaw { .. } | Shape::Flat | Shape::Ohmic => Some(0.0),
            Shape::Tabulated(_) => (self.omega_min == 0.0).then_some(0.0),
        }
    }

    fn substitution(&self) -> Substitution {
        Substitution::for_ir_exponent(self.ir_exponent(), self.omega_min)
    }

    fn breakpoints(&self, max_panel: Option<f64>) -> Vec<f64> {
        let mut pts = quadrature::uniform_panels(self.omega_min, self.omega_c, max_panel);
        if let Shape::Tabulated(t) = &self.shape {
            pts.extend_from_slice(&t.x);
            pts.sort_by(f64::total_cmp);
            pts.dedup();
        }
        pts
    }

    /// `∫ J(ω) h(ω) dω` over the support, split into panels no wider than
    /// `max_panel` and using the weight's infrared substitution.
    ///
    /// Convergence is the caller's responsibility; see [`Self::converges_with`].
    pub fn integrate_against<H>(&self, h: H, max_panel: Option<f64>) -> Result<f64>
    where
        H: Fn(f64) -> f64,
    {
        if self.amplitude == 0.0 {
            return Ok(0.0);
        }
        let pts = self.breakpoints(max_panel);
        let est = quadrature::integrate_in(
            |w| self.value(w) * h(w),
            &pts,
            self.substitution(),
            Tolerance::default(),
        )?;
        Ok(est.value)
    }

    /// `∫ ω^p J(ω) dω`: `p = 0` is `‖g‖²`, `p = 1` the dressing energy `E_g`.
    pub fn moment(&self, p: u32) -> Result<f64> {
        if !self.converges_with(p as f64) {
            return Err(Error::DivergentIntegral(format!(
                "moment {p} of {} weight with omega_min = 0",
                self.kind()
            )));
        }
        self.integrate_against(|w| w.powi(p as i32), None)
    }

    pub fn norm_sq(&self) -> Result<f64> {
        self.moment(0)
    }

    pub fn dressing_energy(&self) -> Result<f64> {
        self.moment(1)
    }

    /// Stable when `‖g‖²` is finite, van Hove singular otherwise. Divergent
    /// quantities are reported as `+∞`.
    pub fn classify(&self) -> StabilityClass {
        let eval = |p: u32| {
            if self.converges_with(p as f64) {
                self.moment(p).unwrap_or(f64::NAN)
            } else {
                f64::INFINITY
            }
        };
        let norm_sq = eval(0);
        let dressing_energy = eval(1);
        let label = if self.converges_with(0.0) {
            Stability::Stable
        } else {
            Stability::VanHoveSingular
        };
        StabilityClass {
            label,
            norm_sq,
            dressing_energy,
        }
    }

    /// Zero-temperature spectral density `R̂₀(ω) = 2π ω² J(ω)`.
    pub fn spectral_density_vacuum(&self, omega: f64) -> f64 {
        if !self.in_support(omega) {
            return 0.0;
        }
        if omega == 0.0 {
            return 2.0 * PI * self.ir_limit_omega2().unwrap_or(0.0);
        }
        2.0 * PI * omega * omega * self.value(omega)
    }

    /// Low-frequency thermal spectral density `R̂_T(ω) ≃ (T/ω) R̂₀(ω)`.
    ///
    /// Only the `ω ≪ T` approximation is available; `valid` is false once
    /// `ω > T/10`.
    pub fn spectral_density_thermal(&self, omega: f64, temperature: f64) -> Result<ThermalDensity> {
        if !(omega > 0.0) {
            return Err(Error::NonPositiveFrequency(omega));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be > 0, got {temperature}"
            )));
        }
        Ok(ThermalDensity {
            value: temperature / omega * self.spectral_density_vacuum(omega),
            valid: omega <= temperature / 10.0,
        })
    }

    /// `c·J`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        check_amplitude(c)?;
        Ok(SpectralWeight {
            amplitude: self.amplitude * c,
            ..self.clone()
        })
    }

    /// The weight `J'(ω) = J(ω/s)/s`: frequencies stretched by `s` with
    /// `∫J dω` unchanged, so that `γ'(t) = γ(s·t)`.
    pub fn rescale_frequency(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "frequency scale must be > 0, got {s}"
            )));
        }
        let (shape, amplitude) = match &self.shape {
            Shape::PowerLaw { kappa } => (self.shape.clone(), self.amplitude * s.powf(-kappa)),
            Shape::Flat => (Shape::Flat, self.amplitude / s),
            Shape::Ohmic => (Shape::Ohmic, self.amplitude),
            Shape::InverseSquare => (Shape::InverseSquare, self.amplitude * s),
            Shape::Tabulated(t) => (Shape::Tabulated(t.stretch(s)), self.amplitude / s),
        };
        Ok(SpectralWeight {
            shape,
            amplitude,
            omega_min: self.omega_min * s,
            omega_c: self.omega_c * s,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    VanHoveSingular,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "Stable",
            Stability::VanHoveSingular => "VanHoveSingular",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityClass {
    pub label: Stability,
    /// `‖g‖²`, `+∞` when singular.
    pub norm_sq: f64,
    /// `E_g`, `+∞` when divergent.
    pub dressing_energy: f64,
}

impl StabilityClass {
    pub fn is_stable(&self) -> bool {
        self.label == Stability::Stable
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalDensity {
    pub value: f64,
    /// False outside the `ω ≤ T/10` regime where the approximation is trusted.
    pub valid: bool,
}

/// Piecewise-cubic Hermite interpolant with Fritsch-Carlson slopes.
///
/// Preserves monotonicity on every interval, so non-negative data stay non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidWeight(format!(
                "table needs at least 2 points, got {}",
                points.len()
            )));
        }
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidWeight("table contains non-finite values".into()));
        }
        if let Some(w) = x.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidWeight(format!(
                "table abscissae must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }

        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(MonotoneCubic { x, y, d })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    /// Interpolated value; callers must stay inside [`Self::range`].
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = self.x.partition_point(|&xi| xi <= t).clamp(1, n - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }

    fn stretch(&self, s: f64) -> Self {
        MonotoneCubic {
            x: self.x.iter().map(|v| v * s).collect(),
            y: self.y.clone(),
            d: self.d.iter().map(|v| v / s).collect(),
        }
    }
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Parse a two-column `ω,J` CSV. Blank lines, `#` comments and a
/// non-numeric header line are skipped.
pub fn parse_table_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::InvalidWeight(format!(
                "line {}: expected two columns",
                lineno + 1
            )));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(w), Ok(j)) => out.push((w, j)),
            _ if out.is_empty() => continue,
            _ => {
                return Err(Error::InvalidWeight(format!(
                    "line {}: cannot parse '{line}'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(out)
}
