//! Flat `key = value` configuration with a per-subcommand key schema.
//!
//! Precedence is defaults, then the config file, then command-line flags.
//! Keys use underscores in files and dashes on the command line.

use std::fmt;
use std::path::Path;

use clap::{Arg, ArgMatches, Command};

#[derive(Debug, Clone, Copy)]
pub enum Ty {
    Real,
    Int,
    Bool,
    Text,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub ty: Ty,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, ty: Ty, default: Option<&'static str>, help: &'static str) -> Key {
    Key { name, ty, default, help }
}

/// Problem with the configuration; always maps to the validation exit code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

pub const WEIGHT_KINDS: &[&str] = &["power-law", "flat", "ohmic", "inverse-square", "tabulated"];

pub const WEIGHT: &[Key] = &[
    key("kind", Ty::Choice(WEIGHT_KINDS), Some("flat"), "spectral weight family"),
    key("amplitude", Ty::Real, Some("1"), "amplitude A"),
    key("kappa", Ty::Real, Some("0.5"), "power-law exponent (J = A ω^(κ-1))"),
    key("omega_min", Ty::Real, Some("0"), "lower edge of the support"),
    key("omega_c", Ty::Real, Some("1"), "upper cutoff"),
    key("table", Ty::Text, None, "two-column ω,J CSV for kind = tabulated"),
];

pub const DEPHASE_CURVE: &[Key] = &[
    key("t_min", Ty::Real, Some("0"), "first time"),
    key("t_max", Ty::Real, Some("10"), "last time"),
    key("points", Ty::Int, Some("101"), "number of times"),
    key("psi_plus", Ty::Real, Some("1"), "amplitude of |+> before normalization"),
    key("psi_minus", Ty::Real, Some("1"), "amplitude of |-> before normalization"),
];

pub const DEPHASE_RATE: &[Key] = &[
    key("t1", Ty::Real, Some("5"), "start of the fit window"),
    key("t2", Ty::Real, Some("1000"), "end of the fit window"),
    key("samples", Ty::Int, Some("200"), "uniform samples in the window"),
];

pub const MASTEREQ: &[Key] = &[
    key("equation", Ty::Choice(&["cl", "pure-dephasing"]), Some("cl"), "master equation"),
    key("n", Ty::Int, Some("20"), "basis size (cl) or grid points (pure-dephasing)"),
    key("x_max", Ty::Real, Some("4"), "grid half-width (pure-dephasing)"),
    key("potential", Ty::Choice(&["harmonic", "zero"]), Some("harmonic"), "V(x)"),
    key("omega", Ty::Real, Some("1"), "frequency of the harmonic potential"),
    key("mass", Ty::Real, Some("1"), "particle mass M"),
    key("gamma", Ty::Real, Some("1"), "decoherence rate (pure-dephasing)"),
    key("eta", Ty::Real, Some("0.1"), "friction η (cl)"),
    key("temperature", Ty::Real, Some("1"), "bath temperature T (cl)"),
    key("dt", Ty::Real, Some("0.001"), "RK4 step"),
    key("t_final", Ty::Real, Some("1"), "final time"),
    key("stride", Ty::Int, Some("100"), "steps between output rows"),
    key("initial", Ty::Choice(&["ground", "coherent", "cat"]), Some("cat"), "initial state"),
    key("alpha", Ty::Real, Some("1"), "coherent amplitude (cl)"),
    key("x0", Ty::Real, Some("1"), "packet offset (pure-dephasing)"),
    key("width", Ty::Real, Some("0.5"), "packet width (pure-dephasing)"),
    key("ref_omega", Ty::Real, Some("1"), "frequency of the basis oscillator (cl)"),
    key("ref_mass", Ty::Real, Some("1"), "mass of the basis oscillator (cl)"),
    key("pairs", Ty::Text, Some(""), "position-basis coherences to record, e.g. 9:10,8:11"),
    key("leak_tolerance", Ty::Real, Some("1e-6"), "population allowed in the top two levels (cl)"),
];

pub const DENSITY: &[Key] = &[
    key("density", Ty::Choice(&["constant", "thermal", "table"]), Some("constant"), "occupation n(ω)"),
    key("n0", Ty::Real, Some("1"), "constant density"),
    key("temperature", Ty::Real, Some("1"), "temperature of the Bose density"),
    key("density_table", Ty::Text, None, "two-column ω,n CSV for density = table"),
];

pub const SCATTER_FAMILY: &[Key] = &[
    key("gamma_target", Ty::Real, Some("0.01"), "rate every member reproduces"),
    key("widths", Ty::Text, Some("0.1,0.01,0.001,0.0001"), "strictly decreasing box widths"),
    key("omega0", Ty::Real, Some("1"), "box centre"),
];

pub const CHAOS: &[Key] = &[
    key("kind", Ty::Choice(&["wigner", "poisson", "goe"]), Some("wigner"), "level statistics"),
    key("levels", Ty::Int, Some("2000"), "levels per realization M"),
    key("realizations", Ty::Int, Some("100"), "independent realizations"),
    key("delta", Ty::Real, Some("1"), "mean level spacing Δ"),
    key("sigma", Ty::Real, Some("0.05"), "Gaussian broadening"),
    key("omega_max", Ty::Real, Some("1"), "upper end of the frequency grid"),
    key("exclude_diagonal", Ty::Bool, Some("true"), "drop m = m' terms"),
];

pub const CHAOS_FIT: &[Key] = &[
    key("fit_lo", Ty::Real, None, "fit window start (default 2σ)"),
    key("fit_hi", Ty::Real, None, "fit window end (default 4σ)"),
];

/// Key schema of a leaf subcommand.
pub fn schema(group: &str, action: &str) -> Vec<Key> {
    let parts: &[&[Key]] = match (group, action) {
        ("dephase", "curve") => &[WEIGHT, DEPHASE_CURVE],
        ("dephase", "rate") => &[WEIGHT, DEPHASE_RATE],
        ("formfactor", "classify") => &[WEIGHT],
        ("mastereq", "run") => &[MASTEREQ],
        ("scatter", "rate") => &[WEIGHT, DENSITY],
        ("scatter", "family") => &[DENSITY, SCATTER_FAMILY],
        ("chaos", "spectrum") => &[CHAOS],
        ("chaos", "rate") => &[CHAOS, CHAOS_FIT],
        _ => &[],
    };
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

pub fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

/// Clap arguments generated from a schema.
pub fn add_args(mut cmd: Command, keys: &[Key]) -> Command {
    for k in keys {
        let mut arg = Arg::new(k.name).long(flag_name(k.name)).value_name(k.name.to_uppercase());
        let mut help = k.help.to_string();
        if let Some(d) = k.default {
            if !d.is_empty() {
                help.push_str(&format!(" [default: {d}]"));
            }
        }
        if let Ty::Choice(c) = k.ty {
            help.push_str(&format!(" ({})", c.join("|")));
        }
        if matches!(k.ty, Ty::Real) {
            arg = arg.allow_negative_numbers(true);
        }
        arg = arg.help(help);
        cmd = cmd.arg(arg);
    }
    cmd
}

/// Parse `key = value` lines. `#` starts a comment; blank lines are ignored.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("config line {}: expected key = value", i + 1));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Fully resolved parameters in schema order.
#[derive(Debug, Clone)]
pub struct Resolved {
    values: Vec<(&'static str, Option<String>, Ty)>,
}

pub fn resolve(keys: &[Key], file: Option<&Path>, flags: &ArgMatches) -> Result<Resolved, ConfigError> {
    let mut values: Vec<(&'static str, Option<String>, Ty)> =
        keys.iter().map(|k| (k.name, k.default.map(str::to_string), k.ty)).collect();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        for (k, v) in parse_file(&text)? {
            match values.iter_mut().find(|e| e.0 == k) {
                Some(slot) => slot.1 = Some(v),
                None => return err(format!("unknown config key '{k}'")),
            }
        }
    }
    for slot in values.iter_mut() {
        if let Some(v) = flags.get_one::<String>(slot.0) {
            slot.1 = Some(v.clone());
        }
    }
    let out = Resolved { values };
    out.validate()?;
    Ok(out)
}

impl Resolved {
    fn validate(&self) -> Result<(), ConfigError> {
        for (name, v, ty) in &self.values {
            let Some(v) = v else { continue };
            match ty {
                Ty::Real => {
                    v.parse::<f64>().map_err(|_| ConfigError(format!("{name}: '{v}' is not a number")))?;
                }
                Ty::Int => {
                    v.parse::<u64>()
                        .map_err(|_| ConfigError(format!("{name}: '{v}' is not a non-negative integer")))?;
                }
                Ty::Bool => {
                    parse_bool(v).ok_or_else(|| ConfigError(format!("{name}: '{v}' is not true or false")))?;
                }
                Ty::Choice(c) => {
                    if !c.contains(&v.as_str()) {
                        return err(format!("{name}: '{v}' is not one of {}", c.join(", ")));
                    }
                }
                Ty::Text => {}
            }
        }
        Ok(())
    }

    fn raw(&self, name: &str) -> Option<&str> {
        self.values
            .iter()
            .find(|e| e.0 == name)
            .unwrap_or_else(|| panic!("key '{name}' is not in the schema"))
            .1
            .as_deref()
    }

    pub fn opt_real(&self, name: &str) -> Option<f64> {
        self.raw(name).map(|v| v.parse().expect("validated"))
    }

    pub fn real(&self, name: &str) -> Result<f64, ConfigError> {
        self.opt_real(name).ok_or_else(|| ConfigError(format!("missing value for '{name}'")))
    }

    pub fn int(&self, name: &str) -> Result<usize, ConfigError> {
        let v = self.raw(name).ok_or_else(|| ConfigError(format!("missing value for '{name}'")))?;
        v.parse().map_err(|_| ConfigError(format!("{name}: '{v}' is out of range")))
    }

    pub fn flag(&self, name: &str) -> Result<bool, ConfigError> {
        let v = self.raw(name).ok_or_else(|| ConfigError(format!("missing value for '{name}'")))?;
        Ok(parse_bool(v).expect("validated"))
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        self.raw(name)
    }

    pub fn real_list(&self, name: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.raw(name).unwrap_or("");
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| ConfigError(format!("{name}: '{s}' is not a number"))))
            .collect()
    }

    pub fn pairs(&self, name: &str) -> Result<Vec<(usize, usize)>, ConfigError> {
        let v = self.raw(name).unwrap_or("");
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                let parsed = s.split_once(':').and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
                parsed.ok_or_else(|| ConfigError(format!("{name}: '{s}' is not of the form i:j")))
            })
            .collect()
    }

    /// `(key, value)` pairs for the output header; unset keys are omitted.
    pub fn entries(&self) -> impl Iterator<Item = (&'static str, &str)> {
        self.values.iter().filter_map(|(k, v, _)| v.as_deref().map(|v| (*k, v)))
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parsing() {
        let kv = parse_file("# comment\n\n a = 1 \nb=x # trailing\n").unwrap();
        assert_eq!(kv, vec![("a".into(), "1".into()), ("b".into(), "x".into())]);
        assert!(parse_file("nonsense").is_err());
    }

    #[test]
    fn every_leaf_has_unique_keys() {
        for (g, a) in [
            ("dephase", "curve"),
            ("dephase", "rate"),
            ("formfactor", "classify"),
            ("mastereq", "run"),
            ("scatter", "rate"),
            ("scatter", "family"),
            ("chaos", "spectrum"),
            ("chaos", "rate"),
        ] {
            let keys = schema(g, a);
            assert!(!keys.is_empty());
            let mut names: Vec<_> = keys.iter().map(|k| k.name).collect();
            names.sort();
            let n = names.len();
            names.dedup();
            assert_eq!(n, names.len(), "{g} {a}");
        }
    }
}
