use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;

use super::stream_rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelKind {
    /// i.i.d. spacings from the normalized surmise `(πs/2Δ²) e^{−πs²/4Δ²}`.
    WignerSurmise,
    /// i.i.d. exponential spacings with mean `Δ`.
    Poisson,
    /// Eigenvalues of a real symmetric Gaussian matrix, unfolded to mean spacing `Δ`.
    Goe,
}

impl fmt::Display for LevelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelKind::WignerSurmise => "wigner",
            LevelKind::Poisson => "poisson",
            LevelKind::Goe => "goe",
        })
    }
}

impl std::str::FromStr for LevelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wigner" => Ok(LevelKind::WignerSurmise),
            "poisson" => Ok(LevelKind::Poisson),
            "goe" => Ok(LevelKind::Goe),
            _ => Err(Error::InvalidParameter(format!(
                "unknown level kind '{s}' (expected wigner, poisson or goe)"
            ))),
        }
    }
}

/// Sorted energy levels with mean nearest-neighbour spacing `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelEnsemble {
    levels: Vec<f64>,
    delta: f64,
    kind: LevelKind,
    seed: u64,
    stream: u64,
}

impl LevelEnsemble {
    /// Wrap explicit levels; they must be strictly increasing.
    pub fn from_levels(levels: Vec<f64>, delta: f64, kind: LevelKind) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidSize(format!("need at least 2 levels, got {}", levels.len())));
        }
        if levels.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("levels must be strictly increasing".into()));
        }
        check_delta(delta)?;
        Ok(LevelEnsemble {
            levels,
            delta,
            kind,
            seed: 0,
            stream: 0,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kind(&self) -> LevelKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Nearest-neighbour spacings `ε_{m+1} − ε_m`.
    pub fn spacings(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mean_spacing(&self) -> f64 {
        (self.levels[self.levels.len() - 1] - self.levels[0]) / (self.levels.len() - 1) as f64
    }

    /// Every level moved by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        LevelEnsemble {
            levels: self.levels.iter().map(|e| e + c).collect(),
            ..self.clone()
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("mean spacing must be > 0, got {delta}")))
    }
}

/// CDF of the normalized surmise, `1 − e^{−πs²/4Δ²}`.
pub fn wigner_cdf(s: f64, delta: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        -(-PI * s * s / (4.0 * delta * delta)).exp_m1()
    }
}

pub fn wigner_pdf(s: f64, delta: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        PI * s / (2.0 * delta * delta) * (-PI * s * s / (4.0 * delta * delta)).exp()
    }
}

pub fn poisson_cdf(s: f64, delta: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        -(-s / delta).exp_m1()
    }
}

/// Draw `m` levels of the given kind. Uses stream 0 of `seed`.
pub fn sample_levels(kind: LevelKind, m: usize, delta: f64, seed: u64) -> Result<LevelEnsemble> {
    sample_levels_stream(kind, m, delta, seed, 0)
}

pub(crate) fn sample_levels_stream(kind: LevelKind, m: usize, delta: f64, seed: u64, stream: u64) -> Result<LevelEnsemble> {
    if m < 2 {
        return Err(Error::InvalidSize(format!("need at least 2 levels, got {m}")));
    }
    check_delta(delta)?;
    let mut rng = stream_rng(seed, stream);
    let levels = match kind {
        LevelKind::WignerSurmise => cumulative(m, || {
            let u: f64 = rng.sample(Open01);
            // 1 − u is also uniform on (0, 1)
            delta * (-(4.0 / PI) * u.ln()).sqrt()
        }),
        LevelKind::Poisson => cumulative(m, || {
            let u: f64 = rng.sample(Open01);
            -delta * u.ln()
        }),
        LevelKind::Goe => goe_levels(m, delta, &mut rng),
    };
    Ok(LevelEnsemble {
        levels,
        delta,
        kind,
        seed,
        stream,
    })
}

fn cumulative(m: usize, mut spacing: impl FnMut() -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(m);
    let mut e = 0.0;
    out.push(e);
    for _ in 1..m {
        e += spacing();
        out.push(e);
    }
    out
}

/// Spectrum of a GOE matrix (off-diagonal variance 1, diagonal variance 2)
/// mapped through the semicircle counting function `M·F(E)`, radius `2√M`.
fn goe_levels<R: Rng>(m: usize, delta: f64, rng: &mut R) -> Vec<f64> {
    let mut h = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        for i in 0..=j {
            let g: f64 = rng.sample(StandardNormal);
            if i == j {
                h[(i, i)] = g * std::f64::consts::SQRT_2;
            } else {
                h[(i, j)] = g;
                h[(j, i)] = g;
            }
        }
    }
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    let r = 2.0 * (m as f64).sqrt();
    let mf = m as f64;
    let mut out: Vec<f64> = e
        .iter()
        .map(|&x| {
            let y = (x / r).clamp(-1.0, 1.0);
            let cdf = 0.5 + (y * (1.0 - y * y).sqrt() + y.asin()) / PI;
            delta * mf * cdf
        })
        .collect();
    // Edge eigenvalues beyond the semicircle collapse onto the same value.
    for k in 1..out.len() {
        if out[k] <= out[k - 1] {
            out[k] = out[k - 1] + f64::EPSILON * out[k - 1].abs().max(delta);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    #[test]
    fn sizes_and_order() {
        for kind in [LevelKind::WignerSurmise, LevelKind::Poisson, LevelKind::Goe] {
            let e = sample_levels(kind, 200, 0.5, 3).unwrap();
            assert_eq!(e.len(), 200);
            assert!(e.levels().windows(2).all(|w| w[1] > w[0]));
        }
        assert_eq!(sample_levels(LevelKind::Poisson, 1, 1.0, 0).unwrap_err().name(), "InvalidSize");
        assert!(sample_levels(LevelKind::Poisson, 10, 0.0, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let a = sample_levels(LevelKind::WignerSurmise, 500, 1.0, 11).unwrap();
        let b = sample_levels(LevelKind::WignerSurmise, 500, 1.0, 11).unwrap();
        let c = sample_levels(LevelKind::WignerSurmise, 500, 1.0, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.levels(), c.levels());
    }

    #[test]
    fn wigner_small_spacing_fraction() {
        let e = sample_levels(LevelKind::WignerSurmise, 100_001, 1.0, 5).unwrap();
        let s = e.spacings();
        let frac = s.iter().filter(|&&x| x < 0.1).count() as f64 / s.len() as f64;
        let expect = wigner_cdf(0.1, 1.0);
        assert!((expect - 0.00783).abs() < 1e-5);
        // binomial sd ≈ 2.8e-4
        assert!((frac - expect).abs() < 1.2e-3, "{frac}");
        assert!((e.mean_spacing() - 1.0).abs() < 0.01);
    }

    #[test]
    fn poisson_small_spacing_fraction() {
        let e = sample_levels(LevelKind::Poisson, 100_001, 1.0, 5).unwrap();
        let s = e.spacings();
        let frac = s.iter().filter(|&&x| x < 0.1).count() as f64 / s.len() as f64;
        assert!((frac - 0.0952).abs() < 4e-3, "{frac}");
    }

    #[test]
    fn goe_unfolded_spacing() {
        let e = sample_levels(LevelKind::Goe, 1000, 1.0, 2).unwrap();
        assert!((e.mean_spacing() - 1.0).abs() < 0.02, "{}", e.mean_spacing());
        let s = e.spacings();
        let bulk = &s[100..900];
        let ks = stats::ks_one_sample(bulk, |x| wigner_cdf(x, 1.0));
        assert!(ks.p_value > 0.01, "{ks:?}");
    }

    #[test]
    fn cdfs() {
        assert_eq!(wigner_cdf(-1.0, 1.0), 0.0);
        assert!((poisson_cdf(0.1, 1.0) - 0.095_162_581_964_040_43).abs() < 1e-15);
        // the surmise density integrates to its CDF
        let h = 1e-4;
        let num: f64 = (0..10_000).map(|k| wigner_pdf((k as f64 + 0.5) * h, 2.0) * h).sum();
        assert!((num - wigner_cdf(1.0, 2.0)).abs() < 1e-8);
    }
}
