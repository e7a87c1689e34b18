//! Globally adaptive Gauss-Kronrod quadrature.
//!
//! Integrals are split at caller-supplied breakpoints (support edges, table
//! nodes, oscillation panels) and then refined interval by interval, always
//! bisecting the interval with the largest error estimate, until the summed
//! error meets the tolerance or the interval cap is reached.
//!
//! Integrable endpoint singularities `ω^(q-1)` at `ω = 0` are removed by the
//! substitution `ω = u^(1/q)`; integrands spanning many decades above a
//! positive lower limit can be integrated in `ln ω`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

/// Relative tolerance used for every physical integral in the crate.
pub const REL_TOL: f64 = 1e-10;

/// Hard cap on the number of live intervals.
pub const MAX_INTERVALS: usize = 400_000;

// 15-point Kronrod abscissae on [-1, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: REL_TOL,
            abs: 0.0,
            max_intervals: MAX_INTERVALS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_value = fc.abs() * WGK[7];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += wk * (f1 + f2);
        abs_value += wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        abs_value: abs_value * half.abs(),
    }
}

/// Integrate `f` over `[points[0], points[last]]`, splitting at every listed point.
pub fn integrate<F>(f: F, points: &[f64], tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if points.len() < 2 {
        return Err(Error::QuadratureFailed(
            "need at least two breakpoints".into(),
        ));
    }
    if points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::QuadratureFailed(
            "breakpoints must be finite and non-decreasing".into(),
        ));
    }

    let mut heap = BinaryHeap::with_capacity(points.len());
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod15(&f, w[0], w[1]));
        }
    }
    if heap.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }

    loop {
        let (value, error, abs_value) = heap.iter().fold((0.0, 0.0, 0.0), |acc, s| {
            (acc.0 + s.value, acc.1 + s.error, acc.2 + s.abs_value)
        });
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureFailed(
                "integrand produced a non-finite value".into(),
            ));
        }
        let target = tol
            .abs
            .max(tol.rel * value.abs())
            .max(50.0 * f64::EPSILON * abs_value);
        if error <= target {
            return Ok(Estimate {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureFailed(format!(
                "interval cap {} reached with error {error:e} (target {target:e})",
                tol.max_intervals
            )));
        }

        // Bisect the worst intervals; doing a batch per pass keeps the
        // bookkeeping linear in the number of panels.
        let batch = (heap.len() / 8).max(1);
        let mut refined = 0;
        while refined < batch {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                // Interval cannot be split further in floating point.
                heap.push(Segment {
                    error: 0.0,
                    ..worst
                });
                refined += 1;
                continue;
            }
            heap.push(kronrod15(&f, worst.a, mid));
            heap.push(kronrod15(&f, mid, worst.b));
            refined += 1;
            if heap.peek().map_or(true, |s| s.error == 0.0) {
                break;
            }
        }
    }
}

/// Change of variables applied before integrating over `ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Substitution {
    /// Integrate directly in `ω`.
    Identity,
    /// `ω = u^(1/q)`: removes an endpoint factor `ω^(q-1)` at `ω = 0`.
    Power(f64),
    /// `ω = e^v`: for integrands spanning many decades above a positive lower limit.
    Log,
}

impl Substitution {
    /// Pick the substitution for an integrand behaving as `ω^exponent` near
    /// the lower limit `lower`.
    pub fn for_ir_exponent(exponent: f64, lower: f64) -> Self {
        if lower == 0.0 {
            if exponent > -1.0 && exponent < 0.0 {
                Substitution::Power(1.0 + exponent)
            } else {
                Substitution::Identity
            }
        } else if exponent <= -1.0 {
            Substitution::Log
        } else {
            Substitution::Identity
        }
    }
}

/// Integrate `f(ω)` over breakpoints given in `ω`, after applying `sub`.
pub fn integrate_in<F>(f: F, omega_points: &[f64], sub: Substitution, tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    match sub {
        Substitution::Identity => integrate(f, omega_points, tol),
        Substitution::Power(q) => {
            if !(q > 0.0) {
                return Err(Error::QuadratureFailed(format!(
                    "power substitution needs q > 0, got {q}"
                )));
            }
            let inv = 1.0 / q;
            let mapped: Vec<f64> = omega_points.iter().map(|w| w.powf(q)).collect();
            integrate(
                |u: f64| {
                    let omega = u.powf(inv);
                    f(omega) * inv * u.powf(inv - 1.0)
                },
                &mapped,
                tol,
            )
        }
        Substitution::Log => {
            if omega_points[0] <= 0.0 {
                return Err(Error::QuadratureFailed(
                    "log substitution needs a positive lower limit".into(),
                ));
            }
            let mapped: Vec<f64> = omega_points.iter().map(|w| w.ln()).collect();
            integrate(
                |v: f64| {
                    let omega = v.exp();
                    f(omega) * omega
                },
                &mapped,
                tol,
            )
        }
    }
}

/// Breakpoints covering `[a, b]` with panels no wider than `max_width`.
pub fn uniform_panels(a: f64, b: f64, max_width: Option<f64>) -> Vec<f64> {
    let n = match max_width {
        Some(w) if w > 0.0 && w.is_finite() => ((b - a) / w).ceil().max(1.0) as usize,
        _ => 1,
    };
    let mut pts: Vec<f64> = (0..=n).map(|k| a + (b - a) * (k as f64) / (n as f64)).collect();
    pts[n] = b;
    pts
}
