use std::f64::consts::PI;

use deco_core::chaos::{self, EnsembleConfig, LevelKind};
use deco_core::dephasing::{self, QubitAmplitudes};
use deco_core::formfactor::{parse_table_csv, SpectralWeight};
use deco_core::mastereq::{
    evolve_caldeira_leggett, pure, run_pure_decoherence, ClOptions, ClParams, GridDensityMatrix,
    OscillatorOperators, Potential, StepRecord,
};
use deco_core::scattering::{self, Density, ScatteringChannel};
use num_complex::Complex64;

use crate::config::{ConfigError, Resolved};
use crate::output::{Cell, Payload};
use crate::Failure;

fn read_table(path: Option<&str>, key: &str) -> Result<Vec<(f64, f64)>, Failure> {
    let path = path.filter(|p| !p.is_empty()).ok_or_else(|| ConfigError(format!("'{key}' is required")))?;
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {path}: {e}")))?;
    Ok(parse_table_csv(&text)?)
}

fn weight(c: &Resolved) -> Result<SpectralWeight, Failure> {
    let a = c.real("amplitude")?;
    let lo = c.real("omega_min")?;
    let hi = c.real("omega_c")?;
    let w = match c.text("kind").unwrap_or("flat") {
        "power-law" => SpectralWeight::power_law(a, c.real("kappa")?, lo, hi)?,
        "flat" => SpectralWeight::flat(a, lo, hi)?,
        "ohmic" => SpectralWeight::ohmic(a, lo, hi)?,
        "inverse-square" => SpectralWeight::inverse_square(a, lo, hi)?,
        _ => SpectralWeight::tabulated(&read_table(c.text("table"), "table")?)?.scaled(a)?,
    };
    Ok(w)
}

fn density(c: &Resolved) -> Result<Density, Failure> {
    Ok(match c.text("density").unwrap_or("constant") {
        "constant" => Density::constant(c.real("n0")?)?,
        "thermal" => Density::thermal(c.real("temperature")?)?,
        _ => Density::tabulated(&read_table(c.text("density_table"), "density_table")?)?,
    })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn record(fields: Vec<(&str, Cell)>) -> Payload {
    Payload::Record(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

pub fn dephase_curve(c: &Resolved) -> Result<Payload, Failure> {
    let j = weight(c)?;
    let psi = QubitAmplitudes::normalized(
        Complex64::new(c.real("psi_plus")?, 0.0),
        Complex64::new(c.real("psi_minus")?, 0.0),
    )?;
    let (t0, t1, n) = (c.real("t_min")?, c.real("t_max")?, c.int("points")?);
    if n < 1 || !(t1 >= t0) {
        return Err(ConfigError(format!("need points >= 1 and t_max >= t_min, got {n}, [{t0}, {t1}]")).into());
    }
    let times = linspace(t0, t1, n);
    let traj = dephasing::trajectory(&psi, &j, &times)?;
    let rows = (0..times.len())
        .map(|k| {
            let s = &traj.states[k];
            vec![
                Cell::Real(times[k]),
                Cell::Real(traj.gamma[k]),
                traj.phase.as_ref().map(|p| p[k]).into(),
                Cell::Real(s.coherence().norm()),
                Cell::Real(s.purity()),
            ]
        })
        .collect();
    Ok(Payload::Table {
        columns: ["t", "gamma", "phase", "coherence_abs", "purity"].map(String::from).to_vec(),
        rows,
    })
}

pub fn dephase_rate(c: &Resolved) -> Result<Payload, Failure> {
    let j = weight(c)?;
    let est = dephasing::asymptotic_rate(&j, (c.real("t1")?, c.real("t2")?), c.int("samples")?)?;
    let candidate = est.analytic_candidate;
    let half = candidate.map(|v| 0.5 * v);
    let ratio = |d: Option<f64>| d.filter(|&v| v != 0.0).map(|v| est.slope / v);
    Ok(record(vec![
        ("slope", est.slope.into()),
        ("intercept", est.intercept.into()),
        ("rms_residual", est.residual.into()),
        ("t1", est.window.0.into()),
        ("t2", est.window.1.into()),
        ("candidate_2pi", candidate.into()),
        ("ratio_to_2pi", ratio(candidate).into()),
        ("candidate_pi", half.into()),
        ("ratio_to_pi", ratio(half).into()),
    ]))
}

pub fn formfactor_classify(c: &Resolved) -> Result<Payload, Failure> {
    let j = weight(c)?;
    let class = j.classify();
    let finite = |v: f64| if v.is_finite() { Cell::Real(v) } else { Cell::Text("divergent".into()) };
    Ok(record(vec![
        ("kind", j.kind().to_string().into()),
        ("class", class.label.to_string().into()),
        ("norm_sq", finite(class.norm_sq)),
        ("dressing_energy", finite(class.dressing_energy)),
        ("ir_exponent", j.ir_exponent().into()),
        ("bound_8_norm_sq", finite(8.0 * class.norm_sq)),
    ]))
}

fn potential(c: &Resolved) -> Result<Potential, Failure> {
    Ok(match c.text("potential").unwrap_or("harmonic") {
        "zero" => Potential::zero(),
        _ => Potential::harmonic(c.real("mass")?, c.real("omega")?),
    })
}

fn record_rows(records: &[StepRecord], with_leak: bool) -> Vec<Vec<Cell>> {
    records
        .iter()
        .map(|r| {
            let mut row = vec![
                Cell::Real(r.t),
                Cell::Real(r.trace_dev),
                Cell::Real(r.herm_dev),
                Cell::Real(r.min_eig),
                Cell::Real(r.purity),
            ];
            if with_leak {
                row.push(r.leak.into());
            }
            row.extend(r.coherences.iter().map(|&v| Cell::Real(v)));
            row
        })
        .collect()
}

pub fn mastereq_run(c: &Resolved) -> Result<Payload, Failure> {
    let pairs = c.pairs("pairs")?;
    let n = c.int("n")?;
    let (dt, t) = (c.real("dt")?, c.real("t_final")?);
    let stride = c.int("stride")?;
    let v = potential(c)?;
    let cl = c.text("equation") == Some("cl");
    let records = if cl {
        let ops = OscillatorOperators::new(n, c.real("ref_mass")?, c.real("ref_omega")?)?;
        let alpha = Complex64::new(c.real("alpha")?, 0.0);
        let rho0 = match c.text("initial").unwrap_or("cat") {
            "ground" => ops.ground_state(),
            "coherent" => ops.coherent_state(alpha)?,
            _ => ops.cat_state(alpha)?,
        };
        let params = ClParams::new(c.real("mass")?, c.real("eta")?, c.real("temperature")?, v)?;
        let opts = ClOptions {
            stride,
            pairs: pairs.clone(),
            leak_tolerance: c.real("leak_tolerance")?,
        };
        evolve_caldeira_leggett(&rho0, &ops, &params, t, dt, &opts)?.records
    } else {
        let x_max = c.real("x_max")?;
        if n < 2 || !(x_max > 0.0) {
            return Err(ConfigError(format!("need n >= 2 and x_max > 0, got {n}, {x_max}")).into());
        }
        let x = pure::uniform_grid(-x_max, x_max, n);
        let (x0, width) = (c.real("x0")?, c.real("width")?);
        let rho0 = match c.text("initial").unwrap_or("cat") {
            "cat" => GridDensityMatrix::cat_state(x, x0, width)?,
            kind => {
                let centre = if kind == "ground" { 0.0 } else { x0 };
                if !(width > 0.0) {
                    return Err(ConfigError(format!("width must be > 0, got {width}")).into());
                }
                GridDensityMatrix::from_wavefunction(x, move |y| {
                    Complex64::new((-(y - centre) * (y - centre) / (4.0 * width * width)).exp(), 0.0)
                })?
            }
        };
        run_pure_decoherence(&rho0, &v, c.real("gamma")?, t, dt, stride, &pairs)?.records
    };
    let mut columns: Vec<String> = ["t", "trace_dev", "herm_dev", "min_eig", "purity"].map(String::from).to_vec();
    if cl {
        columns.push("leak".into());
    }
    columns.extend(pairs.iter().map(|(i, j)| format!("coh_{i}_{j}")));
    Ok(Payload::Table {
        columns,
        rows: record_rows(&records, cl),
    })
}

pub fn scatter_rate(c: &Resolved) -> Result<Payload, Failure> {
    let f = weight(c)?;
    let ch = ScatteringChannel::new(f.clone(), density(c)?)?;
    Ok(record(vec![
        ("rate", scattering::scattering_rate(&ch)?.into()),
        ("norm_sq", f.norm_sq()?.into()),
    ]))
}

pub fn scatter_family(c: &Resolved) -> Result<Payload, Failure> {
    let fam = scattering::small_norm_family(
        c.real("gamma_target")?,
        &c.real_list("widths")?,
        c.real("omega0")?,
        &density(c)?,
    )?;
    Ok(Payload::Table {
        columns: ["width", "height", "norm_sq", "rate"].map(String::from).to_vec(),
        rows: fam
            .iter()
            .map(|m| vec![m.width.into(), m.height.into(), m.norm_sq.into(), m.rate.into()])
            .collect(),
    })
}

fn ensemble(c: &Resolved, seed: u64) -> Result<(EnsembleConfig, chaos::SpectralFunctionEstimate), Failure> {
    let kind: LevelKind = c.text("kind").unwrap_or("wigner").parse()?;
    let mut cfg = EnsembleConfig::new(kind, c.int("levels")?, c.real("delta")?);
    cfg.realizations = c.int("realizations")?;
    cfg.sigma = c.real("sigma")?;
    cfg.omega_max = c.real("omega_max")?;
    cfg.exclude_diagonal = c.flag("exclude_diagonal")?;
    let est = chaos::run_ensemble(&cfg, seed)?;
    Ok((cfg, est))
}

pub fn chaos_spectrum(c: &Resolved, seed: u64) -> Result<Payload, Failure> {
    let (_, est) = ensemble(c, seed)?;
    Ok(Payload::Table {
        columns: ["omega", "R", "stderr"].map(String::from).to_vec(),
        rows: (0..est.omega.len())
            .map(|k| vec![est.omega[k].into(), est.r[k].into(), est.stderr[k].into()])
            .collect(),
    })
}

pub fn chaos_rate(c: &Resolved, seed: u64) -> Result<Payload, Failure> {
    let window = match (c.opt_real("fit_lo"), c.opt_real("fit_hi")) {
        (None, None) => None,
        (Some(a), Some(b)) => Some((a, b)),
        _ => return Err(ConfigError("set both fit_lo and fit_hi or neither".into()).into()),
    };
    let (cfg, est) = ensemble(c, seed)?;
    let fit = chaos::dephasing_rate_from_spectrum(&est, window)?;
    let predicted = PI * est.q_bar_sq * PI / (2.0 * cfg.delta * cfg.delta);
    Ok(record(vec![
        ("gamma", fit.gamma.into()),
        ("gamma_stderr", fit.gamma_stderr.into()),
        ("intercept", fit.intercept.into()),
        ("intercept_stderr", fit.intercept_stderr.into()),
        ("slope", fit.slope.into()),
        ("slope_stderr", fit.slope_stderr.into()),
        ("fit_lo", fit.window.0.into()),
        ("fit_hi", fit.window.1.into()),
        ("fit_points", fit.points.into()),
        ("q_bar_sq", est.q_bar_sq.into()),
        ("wigner_slope_prediction", predicted.into()),
        ("correlation_Q_spacing", est.correlation_q_spacing.into()),
    ]))
}

