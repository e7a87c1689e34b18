//! Caldeira-Leggett master equation on a truncated oscillator basis.
//!
//! The generator is not completely positive, so small negative eigenvalues
//! are counted in [`ClRun::negativity_events`] rather than treated as errors.

use num_complex::Complex64;

use super::{
    anticommutator, check_pairs, commutator, hermiticity_defect, min_eigenvalue, purity, rk4, trace_re, CMatrix,
    OscillatorOperators, Potential, StepRecord,
};
use crate::{Error, Result};

/// Default bound on the population of the two highest basis levels.
pub const DEFAULT_LEAK_TOLERANCE: f64 = 1e-6;
/// Eigenvalue dips below this are counted as negativity events.
pub const NEGATIVITY_THRESHOLD: f64 = -1e-6;
/// Stability bound on `dt` times the generator norm estimate.
pub const STABILITY_LIMIT: f64 = 2.5;

#[derive(Debug, Clone)]
pub struct ClParams {
    pub mass: f64,
    pub eta: f64,
    pub temperature: f64,
    pub potential: Potential,
}

impl ClParams {
    pub fn new(mass: f64, eta: f64, temperature: f64, potential: Potential) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be > 0, got {mass}")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be > 0, got {temperature}"
            )));
        }
        Ok(ClParams {
            mass,
            eta,
            temperature,
            potential,
        })
    }

    /// Decoherence rate of the heavy-particle limit, `γ = 2MηT`.
    pub fn heavy_particle_gamma(&self) -> f64 {
        2.0 * self.mass * self.eta * self.temperature
    }
}

#[derive(Debug, Clone)]
pub struct ClOptions {
    /// Record diagnostics every `stride` steps (the last step is always recorded).
    pub stride: usize,
    /// Position-basis coherences `|ρ_ij|` to record.
    pub pairs: Vec<(usize, usize)>,
    pub leak_tolerance: f64,
}

impl Default for ClOptions {
    fn default() -> Self {
        ClOptions {
            stride: 1,
            pairs: Vec::new(),
            leak_tolerance: DEFAULT_LEAK_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClRun {
    pub records: Vec<StepRecord>,
    pub final_rho: CMatrix,
    pub steps: usize,
    /// Largest top-two-level population seen at any step.
    pub max_leak: f64,
    /// Number of recorded states with an eigenvalue below −1e−6.
    pub negativity_events: usize,
}

fn spectral_radius(m: &CMatrix) -> f64 {
    m.clone().symmetric_eigenvalues().iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

fn leak(rho: &CMatrix) -> f64 {
    let n = rho.nrows();
    rho[(n - 1, n - 1)].re + rho[(n - 2, n - 2)].re
}

/// RK4 integration of `dρ/dt = −i[H, ρ] − iη[X, {P, ρ}] − 2MηT[X, [X, ρ]]`
/// with `H = P²/2M + V(X)` up to time `t`.
///
/// Fails with `TruncationLeak` as soon as the top two levels hold more
/// than `opts.leak_tolerance` population.
pub fn evolve_caldeira_leggett(
    rho0: &CMatrix,
    ops: &OscillatorOperators,
    params: &ClParams,
    t: f64,
    dt: f64,
    opts: &ClOptions,
) -> Result<ClRun> {
    let n = ops.dim();
    if rho0.nrows() != n || rho0.ncols() != n {
        return Err(Error::GridMismatch(format!(
            "state is {}x{}, basis has {n} levels",
            rho0.nrows(),
            rho0.ncols()
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    check_pairs(&opts.pairs, n)?;

    let x = ops.x();
    let p = ops.p();
    let kinetic = p * p * Complex64::new(0.5 / params.mass, 0.0);
    let h = kinetic + ops.potential_matrix(&params.potential);
    let diffusion = 2.0 * params.mass * params.eta * params.temperature;

    let h_eigs = h.clone().symmetric_eigenvalues();
    let h_spread = h_eigs.max() - h_eigs.min();
    let xn = spectral_radius(x);
    let pn = spectral_radius(p);
    let generator_norm = h_spread + 4.0 * params.eta * xn * pn + diffusion * 4.0 * xn * xn;
    if !(dt * generator_norm < STABILITY_LIMIT) {
        return Err(Error::StepTooLarge(format!(
            "dt·|L| = {} >= {STABILITY_LIMIT}",
            dt * generator_norm
        )));
    }

    let minus_i = Complex64::new(0.0, -1.0);
    let friction = Complex64::new(0.0, -params.eta);
    let diff = Complex64::new(diffusion, 0.0);
    let rhs = |r: &CMatrix| {
        commutator(&h, r) * minus_i + commutator(x, &anticommutator(p, r)) * friction
            - commutator(x, &commutator(x, r)) * diff
    };

    let record = |rho: &CMatrix, time: f64, trace0: f64| {
        let pos = ops.to_position_basis(rho);
        StepRecord {
            t: time,
            trace_dev: (trace_re(rho) - trace0).abs(),
            herm_dev: hermiticity_defect(rho),
            min_eig: min_eigenvalue(rho),
            purity: purity(rho),
            leak: Some(leak(rho)),
            coherences: opts.pairs.iter().map(|&(i, j)| pos[(i, j)].norm()).collect(),
        }
    };

    let (steps, step) = rk4::schedule(t, dt);
    let stride = opts.stride.max(1);
    let trace0 = trace_re(rho0);
    let mut rho = rho0.clone();
    let mut records = vec![record(&rho, 0.0, trace0)];
    let mut max_leak = leak(&rho);
    for k in 1..=steps {
        rho = rk4::step(&rho, step, &rhs);
        let l = leak(&rho);
        max_leak = max_leak.max(l);
        if l > opts.leak_tolerance {
            return Err(Error::TruncationLeak {
                population: l,
                tolerance: opts.leak_tolerance,
                t: k as f64 * step,
            });
        }
        if k % stride == 0 || k == steps {
            records.push(record(&rho, k as f64 * step, trace0));
        }
    }
    let negativity_events = records.iter().filter(|r| r.min_eig < NEGATIVITY_THRESHOLD).count();
    Ok(ClRun {
        records,
        final_rho: rho,
        steps,
        max_leak,
        negativity_events,
    })
}

/// Decay rates `−ln(|ρ_ij(t)| / |ρ_ij(0)|) / t` of position-basis coherences.
pub fn position_coherence_rates(
    ops: &OscillatorOperators,
    rho0: &CMatrix,
    rho_t: &CMatrix,
    t: f64,
    pairs: &[(usize, usize)],
) -> Vec<f64> {
    let a = ops.to_position_basis(rho0);
    let b = ops.to_position_basis(rho_t);
    pairs
        .iter()
        .map(|&(i, j)| -(b[(i, j)].norm() / a[(i, j)].norm()).ln() / t)
        .collect()
}

/// Rates predicted by the pure-decoherence equation, `γ(x_i − x_j)²`.
pub fn pure_decoherence_rates(ops: &OscillatorOperators, gamma: f64, pairs: &[(usize, usize)]) -> Vec<f64> {
    let x = ops.position_nodes();
    pairs
        .iter()
        .map(|&(i, j)| gamma * (x[i] - x[j]) * (x[i] - x[j]))
        .collect()
}
