//! Pure decoherence in the position representation.
//!
//! With `X` diagonal, `dρ/dt = −i[V(X), ρ] − γ[X, [X, ρ]]` decouples into
//! independent matrix elements and is solved exactly by
//!
//! ```text
//! ρ(x, x', t) = ρ₀(x, x') · exp(−i(V(x) − V(x'))t) · exp(−γ(x − x')²t).
//! ```

use num_complex::Complex64;

use super::{
    check_pairs, diag_commutator, hermiticity_defect, min_eigenvalue, purity, rk4, trace_re, CMatrix, Potential,
    StepRecord,
};
use crate::{Error, Result};

/// Hermiticity tolerance at construction.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace tolerance at construction (`Σ ρ(x, x) Δx = 1`).
pub const TRACE_TOL: f64 = 1e-10;
/// Stability bound on `dt·(max|V| + γ·span²)` for the RK4 integrator.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Density matrix `ρ(x, x')` sampled on a uniform grid.
///
/// Normalized as a kernel: `Σ_i ρ(x_i, x_i) Δx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensityMatrix {
    x: Vec<f64>,
    rho: CMatrix,
}

/// `n` equally spaced points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

impl GridDensityMatrix {
    pub fn new(x: Vec<f64>, rho: CMatrix) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::GridMismatch("grid needs at least two points".into()));
        }
        if rho.nrows() != x.len() || rho.ncols() != x.len() {
            return Err(Error::GridMismatch(format!(
                "matrix is {}x{}, grid has {} points",
                rho.nrows(),
                rho.ncols(),
                x.len()
            )));
        }
        let dx = x[1] - x[0];
        if !(dx > 0.0) || x.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-9 * dx) {
            return Err(Error::GridMismatch("grid must be uniform and increasing".into()));
        }
        let out = GridDensityMatrix { x, rho };
        let herm = out.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("hermiticity defect {herm:e}")));
        }
        let tr = out.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(out)
    }

    /// `ρ = |ψ⟩⟨ψ|` with `ψ` sampled on `x` and normalized on the grid.
    pub fn from_wavefunction<F>(x: Vec<f64>, psi: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        if x.len() < 2 {
            return Err(Error::GridMismatch("grid needs at least two points".into()));
        }
        let dx = x[1] - x[0];
        let amps: Vec<Complex64> = x.iter().map(|&v| psi(v)).collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("wavefunction vanishes on the grid".into()));
        }
        let scale = 1.0 / norm;
        let n = x.len();
        let rho = CMatrix::from_fn(n, n, |i, j| amps[i] * amps[j].conj() * scale);
        GridDensityMatrix::new(x, rho)
    }

    /// Even superposition of two Gaussian packets of width `sigma` centred at `±x0`.
    pub fn cat_state(x: Vec<f64>, x0: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("packet width must be > 0, got {sigma}")));
        }
        let g = move |c: f64, v: f64| (-(v - c) * (v - c) / (4.0 * sigma * sigma)).exp();
        Self::from_wavefunction(x, move |v| Complex64::new(g(x0, v) + g(-x0, v), 0.0))
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.rho) * self.dx()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.rho)
    }

    /// `Tr ρ²` of the operator `ρ(x, x') Δx`.
    pub fn purity(&self) -> f64 {
        let dx = self.dx();
        purity(&self.rho) * dx * dx
    }

    /// Smallest eigenvalue of the operator `ρ(x, x') Δx`.
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.rho) * self.dx()
    }

    /// `max |ρ_a − ρ_b|` over matching grids.
    pub fn max_abs_diff(&self, other: &GridDensityMatrix) -> Result<f64> {
        if self.x != other.x {
            return Err(Error::GridMismatch("grids differ".into()));
        }
        Ok((&self.rho - &other.rho).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    fn with_rho(&self, rho: CMatrix) -> Self {
        GridDensityMatrix { x: self.x.clone(), rho }
    }

    fn record(&self, t: f64, trace0: f64, pairs: &[(usize, usize)]) -> StepRecord {
        StepRecord {
            t,
            trace_dev: (self.trace() - trace0).abs(),
            herm_dev: self.hermiticity_defect(),
            min_eig: self.min_eigenvalue(),
            purity: self.purity(),
            leak: None,
            coherences: pairs.iter().map(|&(i, j)| self.rho[(i, j)].norm()).collect(),
        }
    }
}

fn check_rates(gamma: f64, t: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

/// Closed-form solution at time `t`.
pub fn evolve_pure_decoherence_exact(
    rho0: &GridDensityMatrix,
    v: &Potential,
    gamma: f64,
    t: f64,
) -> Result<GridDensityMatrix> {
    check_rates(gamma, t)?;
    let x = rho0.x();
    let vx: Vec<f64> = x.iter().map(|&xi| v.eval(xi)).collect();
    let n = x.len();
    let rho = CMatrix::from_fn(n, n, |i, j| {
        let dx = x[i] - x[j];
        let phase = Complex64::new(0.0, -(vx[i] - vx[j]) * t).exp();
        rho0.rho[(i, j)] * phase * (-gamma * dx * dx * t).exp()
    });
    Ok(rho0.with_rho(rho))
}

/// Result of a recorded integration.
#[derive(Debug, Clone)]
pub struct PureRun {
    pub records: Vec<StepRecord>,
    pub final_state: GridDensityMatrix,
    pub steps: usize,
}

/// RK4 integration with a diagnostics record every `stride` steps (and at
/// both ends). Requires `dt·(max|V| + γ·span²) < 0.1`.
pub fn run_pure_decoherence(
    rho0: &GridDensityMatrix,
    v: &Potential,
    gamma: f64,
    t: f64,
    dt: f64,
    stride: usize,
    pairs: &[(usize, usize)],
) -> Result<PureRun> {
    check_rates(gamma, t)?;
    check_pairs(pairs, rho0.x.len())?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let x = rho0.x().to_vec();
    let vx: Vec<f64> = x.iter().map(|&xi| v.eval(xi)).collect();
    let vmax = vx.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let span = x[x.len() - 1] - x[0];
    let stiffness = dt * (vmax + gamma * span * span);
    if !(stiffness < STABILITY_LIMIT) {
        return Err(Error::StepTooLarge(format!(
            "dt·(max|V| + γ·span²) = {stiffness} >= {STABILITY_LIMIT}"
        )));
    }

    let minus_i = Complex64::new(0.0, -1.0);
    let g = Complex64::new(gamma, 0.0);
    let rhs = |r: &CMatrix| diag_commutator(&vx, r) * minus_i - diag_commutator(&x, &diag_commutator(&x, r)) * g;

    let (steps, h) = rk4::schedule(t, dt);
    let stride = stride.max(1);
    let trace0 = rho0.trace();
    let mut records = vec![rho0.record(0.0, trace0, pairs)];
    let mut rho = rho0.rho.clone();
    for k in 1..=steps {
        rho = rk4::step(&rho, h, &rhs);
        if k % stride == 0 || k == steps {
            records.push(rho0.with_rho(rho.clone()).record(k as f64 * h, trace0, pairs));
        }
    }
    Ok(PureRun {
        records,
        final_state: rho0.with_rho(rho),
        steps,
    })
}

/// RK4 solution at time `t`.
pub fn evolve_pure_decoherence_numeric(
    rho0: &GridDensityMatrix,
    v: &Potential,
    gamma: f64,
    t: f64,
    dt: f64,
) -> Result<GridDensityMatrix> {
    Ok(run_pure_decoherence(rho0, v, gamma, t, dt, usize::MAX, &[])?.final_state)
}
