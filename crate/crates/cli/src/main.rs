use std::process::ExitCode;

/// Size the global rayon pool from `DECO_THREADS`, if set.
fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("DECO_THREADS") else {
        return Ok(());
    };
    let n = v
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("DECO_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    if let Err(e) = init_threads() {
        eprintln!("deco: ConfigError: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(deco_cli::main_from(std::env::args_os()))
}
