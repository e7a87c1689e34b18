//! Library behind the `deco` command-line tool.
//!
//! [`main_from`] parses arguments, runs one subcommand and returns the exit
//! status: 0 on success, 2 on invalid input, 3 on numerical failure, 1 on
//! I/O errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Arg, ArgMatches, Command};

use config::ConfigError;
use output::{Format, Header};

#[derive(Debug)]
pub(crate) enum Failure {
    Config(ConfigError),
    Core(deco_core::Error),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<deco_core::Error> for Failure {
    fn from(e: deco_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Core(e) if e.is_validation() => 2,
            Failure::Core(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    fn report(&self) -> String {
        match self {
            Failure::Config(e) => format!("ConfigError: {e}"),
            Failure::Core(e) => format!("{}: {e}", e.name()),
            Failure::Io(e) => format!("IoError: {e}"),
        }
    }
}

const LEAVES: &[(&str, &str, &str)] = &[
    ("dephase", "curve", "γ_t, phase and qubit coherence on a time grid"),
    ("dephase", "rate", "linear fit of γ_t over a late-time window"),
    ("formfactor", "classify", "stability class, norm and dressing energy"),
    ("mastereq", "run", "integrate a master equation and record diagnostics"),
    ("scatter", "rate", "scattering dephasing rate of one channel"),
    ("scatter", "family", "box amplitudes of shrinking norm at a fixed rate"),
    ("chaos", "spectrum", "ensemble-averaged broadened spectral function"),
    ("chaos", "rate", "zero-frequency fit of the spectral function"),
];

fn cli() -> Command {
    let mut root = Command::new("deco")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Dephasing and decoherence model runner")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(Arg::new("config").long("config").value_name("PATH").global(true).help("key = value config file"))
        .arg(
            Arg::new("seed")
                .long("seed")
                .value_name("N")
                .global(true)
                .value_parser(clap::value_parser!(u64))
                .help("master seed [default: 0]"),
        )
        .arg(Arg::new("out").long("out").value_name("PATH").global(true).help("output file (stdout if absent)"))
        .arg(
            Arg::new("format")
                .long("format")
                .global(true)
                .value_parser(["csv", "json"])
                .help("output format (tables default to csv, summaries to json)"),
        );
    for group in ["dephase", "formfactor", "mastereq", "scatter", "chaos"] {
        let mut g = Command::new(group).subcommand_required(true).arg_required_else_help(true);
        for (_, action, about) in LEAVES.iter().filter(|l| l.0 == group) {
            let leaf = Command::new(*action).about(*about);
            g = g.subcommand(config::add_args(leaf, &config::schema(group, action)));
        }
        root = root.subcommand(g);
    }
    root
}

fn run(group: &str, action: &str, m: &ArgMatches) -> Result<(), Failure> {
    let started = Instant::now();
    let keys = config::schema(group, action);
    let config_path = m.get_one::<String>("config").map(PathBuf::from);
    let resolved = config::resolve(&keys, config_path.as_deref(), m)?;
    let seed = m.get_one::<u64>("seed").copied().unwrap_or(0);

    let payload = match (group, action) {
        ("dephase", "curve") => commands::dephase_curve(&resolved)?,
        ("dephase", "rate") => commands::dephase_rate(&resolved)?,
        ("formfactor", "classify") => commands::formfactor_classify(&resolved)?,
        ("mastereq", "run") => commands::mastereq_run(&resolved)?,
        ("scatter", "rate") => commands::scatter_rate(&resolved)?,
        ("scatter", "family") => commands::scatter_family(&resolved)?,
        ("chaos", "spectrum") => commands::chaos_spectrum(&resolved, seed)?,
        ("chaos", "rate") => commands::chaos_rate(&resolved, seed)?,
        _ => unreachable!("clap only accepts known subcommands"),
    };

    let format = match m.get_one::<String>("format").map(String::as_str) {
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        _ => payload.default_format(),
    };
    let command = format!("{group} {action}");
    let header = Header {
        command: &command,
        seed,
        config: resolved.entries().collect(),
    };
    let text = output::render(&header, &payload, format);
    let elapsed = started.elapsed().as_secs_f64();

    match m.get_one::<String>("out") {
        Some(out) => {
            let path = PathBuf::from(out);
            output::write_atomic(&path, &text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            // Timing lives beside the result so identical runs give identical files.
            let sidecar = serde_json::json!({
                "command": command,
                "seed": seed,
                "wall_clock_seconds": elapsed,
            });
            let mut side = path.into_os_string();
            side.push(".run.json");
            let side = PathBuf::from(side);
            let body = serde_json::to_string_pretty(&sidecar).expect("serializable") + "\n";
            output::write_atomic(&side, &body).map_err(|e| Failure::Io(format!("{}: {e}", side.display())))?;
            eprintln!("deco: wrote {out} in {elapsed:.3} s");
        }
        None => {
            print!("{text}");
            eprintln!("deco: finished in {elapsed:.3} s");
        }
    }
    Ok(())
}

/// Run one invocation. `args` includes the program name.
pub fn main_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let (group, gm) = matches.subcommand().expect("subcommand required");
    let (action, am) = gm.subcommand().expect("subcommand required");
    match run(group, action, am) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("deco: {}", f.report());
            f.exit_code()
        }
    }
}
