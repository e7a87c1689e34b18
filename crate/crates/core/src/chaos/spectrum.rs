use std::f64::consts::PI;

use rayon::prelude::*;

use super::coupling::{sample_coupling_stream, CouplingMatrix};
use super::levels::{sample_levels_stream, LevelEnsemble, LevelKind};
use crate::stats::{self, LinearFit};
use crate::{Error, Result};

/// Gaussian tails beyond this many widths are dropped.
const CUTOFF_SIGMAS: f64 = 8.0;

/// Broadened spectral function averaged over realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunctionEstimate {
    pub omega: Vec<f64>,
    /// Realization mean of `R̂(ω)`.
    pub r: Vec<f64>,
    /// Standard error of the mean per bin (zero for a single realization).
    pub stderr: Vec<f64>,
    pub sigma: f64,
    pub delta: f64,
    pub diagonal_excluded: bool,
    /// One curve per realization, in realization order.
    pub curves: Vec<Vec<f64>>,
    /// Mean of `|Q_{m,m+1}|²` pooled over realizations.
    pub q_bar_sq: f64,
    /// Pearson correlation of `|Q_{m,m+1}|²` with `ε_{m+1} − ε_m`, pooled.
    pub correlation_q_spacing: f64,
}

/// `0, step, 2·step, …` up to `omega_max` (rounded to a whole number of steps).
pub fn uniform_grid(omega_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid needs omega_max > 0 and step > 0, got ({omega_max}, {step})"
        )));
    }
    let n = (omega_max / step).round().max(1.0) as usize;
    Ok((0..=n).map(|k| k as f64 * step).collect())
}

fn check_grid(grid: &[f64], sigma: f64) -> Result<()> {
    if grid.len() < 2 || grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidParameter("frequency grid needs at least 2 finite points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("frequency grid must be strictly increasing".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("broadening must be > 0, got {sigma}")));
    }
    let step = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0_f64, f64::max);
    if sigma < step {
        return Err(Error::BroadeningTooSmall { sigma, step });
    }
    Ok(())
}

/// `R̂(ω) = (π/M) Σ |Q_{mm'}|² G_σ(ε_m − ε_{m'} − ω)` for one realization.
pub fn spectral_curve(
    levels: &LevelEnsemble,
    q: &CouplingMatrix,
    grid: &[f64],
    sigma: f64,
    exclude_diagonal: bool,
) -> Result<Vec<f64>> {
    check_grid(grid, sigma)?;
    if levels.len() != q.dim() {
        return Err(Error::InvalidSize(format!(
            "{} levels but coupling of size {}",
            levels.len(),
            q.dim()
        )));
    }
    Ok(curve_unchecked(levels.levels(), q, grid, sigma, exclude_diagonal))
}

fn curve_unchecked(e: &[f64], q: &CouplingMatrix, grid: &[f64], sigma: f64, exclude_diagonal: bool) -> Vec<f64> {
    let m = e.len();
    let qm = q.matrix();
    let cut = CUTOFF_SIGMAS * sigma;
    let (g0, g1) = (grid[0], grid[grid.len() - 1]);
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    let inv2s2 = 1.0 / (2.0 * sigma * sigma);
    let mut r = vec![0.0; grid.len()];
    for a in 0..m {
        // ε_b with ε_a − ε_b ∈ [g0 − cut, g1 + cut]
        let lo = e.partition_point(|&x| x < e[a] - g1 - cut);
        let hi = e.partition_point(|&x| x <= e[a] - g0 + cut);
        for b in lo..hi {
            if exclude_diagonal && a == b {
                continue;
            }
            let w = qm[(a, b)] * qm[(a, b)];
            if w == 0.0 {
                continue;
            }
            let d = e[a] - e[b];
            let k0 = grid.partition_point(|&x| x < d - cut);
            let k1 = grid.partition_point(|&x| x <= d + cut);
            for k in k0..k1 {
                let x = d - grid[k];
                r[k] += w * norm * (-x * x * inv2s2).exp();
            }
        }
    }
    let scale = PI / m as f64;
    r.iter_mut().for_each(|v| *v *= scale);
    r
}

struct Realization {
    curve: Vec<f64>,
    near_diag: Vec<f64>,
    spacings: Vec<f64>,
}

fn realization(levels: &LevelEnsemble, q: &CouplingMatrix, grid: &[f64], sigma: f64, exclude: bool) -> Realization {
    Realization {
        curve: curve_unchecked(levels.levels(), q, grid, sigma, exclude),
        near_diag: q.near_diagonal_sq(),
        spacings: levels.spacings(),
    }
}

fn reduce(parts: Vec<Realization>, grid: &[f64], sigma: f64, delta: f64, exclude: bool) -> SpectralFunctionEstimate {
    let nbin = grid.len();
    let mut r = Vec::with_capacity(nbin);
    let mut stderr = Vec::with_capacity(nbin);
    for k in 0..nbin {
        let col: Vec<f64> = parts.iter().map(|p| p.curve[k]).collect();
        let (m, s) = stats::mean_stderr(&col);
        r.push(m);
        stderr.push(s);
    }
    let qs: Vec<f64> = parts.iter().flat_map(|p| p.near_diag.iter().copied()).collect();
    let ss: Vec<f64> = parts.iter().flat_map(|p| p.spacings.iter().copied()).collect();
    SpectralFunctionEstimate {
        omega: grid.to_vec(),
        r,
        stderr,
        sigma,
        delta,
        diagonal_excluded: exclude,
        q_bar_sq: qs.iter().sum::<f64>() / qs.len() as f64,
        correlation_q_spacing: stats::pearson(&qs, &ss),
        curves: parts.into_iter().map(|p| p.curve).collect(),
    }
}

/// Average [`spectral_curve`] over explicit `(levels, Q)` realizations.
pub fn spectral_function(
    samples: &[(LevelEnsemble, CouplingMatrix)],
    grid: &[f64],
    sigma: f64,
    exclude_diagonal: bool,
) -> Result<SpectralFunctionEstimate> {
    check_grid(grid, sigma)?;
    let Some((first, _)) = samples.first() else {
        return Err(Error::InvalidSize("no realizations given".into()));
    };
    for (l, q) in samples {
        if l.len() != q.dim() {
            return Err(Error::InvalidSize(format!("{} levels but coupling of size {}", l.len(), q.dim())));
        }
    }
    let parts = samples
        .iter()
        .map(|(l, q)| realization(l, q, grid, sigma, exclude_diagonal))
        .collect();
    Ok(reduce(parts, grid, sigma, first.delta(), exclude_diagonal))
}

/// Parameters of a sampled ensemble run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub kind: LevelKind,
    /// Levels per realization, `M`.
    pub levels: usize,
    pub realizations: usize,
    pub delta: f64,
    pub sigma: f64,
    /// Grid spans `[0, omega_max]` with step `sigma/5`.
    pub omega_max: f64,
    pub exclude_diagonal: bool,
}

impl EnsembleConfig {
    /// Defaults: 100 realizations, `σ = Δ/20`, grid up to `Δ`, diagonal excluded.
    pub fn new(kind: LevelKind, levels: usize, delta: f64) -> Self {
        EnsembleConfig {
            kind,
            levels,
            realizations: 100,
            delta,
            sigma: delta / 20.0,
            omega_max: delta,
            exclude_diagonal: true,
        }
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        uniform_grid(self.omega_max, self.sigma / 5.0)
    }
}

/// Sample `cfg.realizations` independent environments from `seed` and average
/// their spectral functions. Realization `r` uses streams `2r` and `2r + 1`.
pub fn run_ensemble(cfg: &EnsembleConfig, seed: u64) -> Result<SpectralFunctionEstimate> {
    if cfg.realizations == 0 {
        return Err(Error::InvalidSize("need at least one realization".into()));
    }
    if cfg.levels < 2 {
        return Err(Error::InvalidSize(format!("need at least 2 levels, got {}", cfg.levels)));
    }
    let grid = cfg.grid()?;
    check_grid(&grid, cfg.sigma)?;
    let parts = (0..cfg.realizations as u64)
        .into_par_iter()
        .map(|r| {
            let levels = sample_levels_stream(cfg.kind, cfg.levels, cfg.delta, seed, 2 * r)?;
            let q = sample_coupling_stream(cfg.levels, seed, 2 * r + 1)?;
            Ok(realization(&levels, &q, &grid, cfg.sigma, cfg.exclude_diagonal))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(parts, &grid, cfg.sigma, cfg.delta, cfg.exclude_diagonal))
}

/// Linear fit `R̂ ≈ a + bω` near zero frequency and the implied rate `γ = a/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub gamma: f64,
    pub gamma_stderr: f64,
    pub intercept: f64,
    pub intercept_stderr: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Fit each realization on `window` (default `[2σ, 4σ]`) and average. Error
/// bars come from the spread of the per-realization fits, or from the fit
/// residuals when only one realization is present.
pub fn dephasing_rate_from_spectrum(est: &SpectralFunctionEstimate, window: Option<(f64, f64)>) -> Result<RateFit> {
    if !est.diagonal_excluded {
        return Err(Error::InvalidParameter(
            "diagonal terms add a static spike at ω = 0; fit only estimates with the diagonal excluded".into(),
        ));
    }
    let (lo, hi) = window.unwrap_or((2.0 * est.sigma, 4.0 * est.sigma));
    let g = &est.omega;
    let step = g[1] - g[0];
    let slack = 1e-9 * step;
    if !(lo < hi) || lo < g[0] - slack || hi > g[g.len() - 1] + slack {
        return Err(Error::WindowOutsideGrid(format!(
            "window [{lo}, {hi}] not inside grid [{}, {}]",
            g[0],
            g[g.len() - 1]
        )));
    }
    if lo < est.sigma * (1.0 - 1e-9) || hi > est.delta * (1.0 + 1e-9) {
        return Err(Error::WindowOutsideGrid(format!(
            "window [{lo}, {hi}] must lie within [sigma, delta] = [{}, {}]",
            est.sigma, est.delta
        )));
    }
    let idx: Vec<usize> = (0..g.len()).filter(|&k| g[k] >= lo - slack && g[k] <= hi + slack).collect();
    if idx.len() < 3 {
        return Err(Error::WindowOutsideGrid(format!(
            "window [{lo}, {hi}] holds {} grid points, need 3",
            idx.len()
        )));
    }
    let x: Vec<f64> = idx.iter().map(|&k| g[k]).collect();
    let fits: Vec<LinearFit> = est
        .curves
        .iter()
        .map(|c| {
            let y: Vec<f64> = idx.iter().map(|&k| c[k]).collect();
            stats::linear_fit(&x, &y)
        })
        .collect();
    let (intercept, intercept_stderr, slope, slope_stderr) = if fits.len() == 1 {
        let f = fits[0];
        (f.intercept, f.intercept_stderr, f.slope, f.slope_stderr)
    } else {
        let a: Vec<f64> = fits.iter().map(|f| f.intercept).collect();
        let b: Vec<f64> = fits.iter().map(|f| f.slope).collect();
        let (am, ase) = stats::mean_stderr(&a);
        let (bm, bse) = stats::mean_stderr(&b);
        (am, ase, bm, bse)
    };
    Ok(RateFit {
        gamma: 0.5 * intercept,
        gamma_stderr: 0.5 * intercept_stderr,
        intercept,
        intercept_stderr,
        slope,
        slope_stderr,
        window: (lo, hi),
        points: idx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn two_level(s: f64, q12: f64) -> (LevelEnsemble, CouplingMatrix) {
        let l = LevelEnsemble::from_levels(vec![0.0, s], 1.0, LevelKind::WignerSurmise).unwrap();
        let q = CouplingMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, q12, q12, 0.0])).unwrap();
        (l, q)
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let (l, _) = two_level(0.5, 0.0);
        let q = CouplingMatrix::from_matrix(DMatrix::zeros(2, 2)).unwrap();
        let grid = uniform_grid(1.0, 0.01).unwrap();
        assert!(spectral_curve(&l, &q, &grid, 0.05, false).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_pair_weight() {
        let (s, q12) = (0.6, 1.3);
        let (l, q) = two_level(s, q12);
        let h = 0.002;
        let grid = uniform_grid(1.2, h).unwrap();
        let r = spectral_curve(&l, &q, &grid, 0.02, true).unwrap();
        // total weight 2πq/M sits in two peaks at ±s; the positive one holds half
        let weight: f64 = r.iter().sum::<f64>() * h;
        assert!((weight - PI * q12 * q12 / 2.0).abs() < 1e-6, "{weight}");
        let peak = r.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!((grid[peak] - s).abs() < 1e-9);
    }

    #[test]
    fn broadening_guard() {
        let (l, q) = two_level(0.5, 1.0);
        let grid = uniform_grid(1.0, 0.1).unwrap();
        let err = spectral_curve(&l, &q, &grid, 0.05, true).unwrap_err();
        assert_eq!(err.name(), "BroadeningTooSmall");
    }

    #[test]
    fn window_guard() {
        let mut cfg = EnsembleConfig::new(LevelKind::Poisson, 50, 1.0);
        cfg.realizations = 3;
        let est = run_ensemble(&cfg, 1).unwrap();
        for w in [(0.5, 2.0), (0.2, 0.1), (0.01, 0.2)] {
            assert_eq!(dephasing_rate_from_spectrum(&est, Some(w)).unwrap_err().name(), "WindowOutsideGrid");
        }
        assert!(dephasing_rate_from_spectrum(&est, None).is_ok());
        cfg.exclude_diagonal = false;
        let est = run_ensemble(&cfg, 1).unwrap();
        assert!(dephasing_rate_from_spectrum(&est, None).is_err());
    }

    #[test]
    fn ensemble_is_thread_independent() {
        let mut cfg = EnsembleConfig::new(LevelKind::WignerSurmise, 80, 1.0);
        cfg.realizations = 6;
        let a = run_ensemble(&cfg, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_ensemble(&cfg, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn realization_zero_matches_standalone_samplers() {
        let mut cfg = EnsembleConfig::new(LevelKind::Poisson, 40, 1.0);
        cfg.realizations = 1;
        let est = run_ensemble(&cfg, 21).unwrap();
        let l = super::super::sample_levels(LevelKind::Poisson, 40, 1.0, 21).unwrap();
        let q = super::super::sample_coupling(40, 21).unwrap();
        let curve = spectral_curve(&l, &q, &est.omega, cfg.sigma, true).unwrap();
        assert_eq!(curve, est.curves[0]);
    }
}
