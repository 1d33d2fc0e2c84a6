//! Configuration loading, suite orchestration and reports for `risktree`.

pub mod config;
pub mod report;
pub mod suite;

use clap::Parser;
use config::{load_model, parse_model, ConfigError, Mode, ModelConfig};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use suite::{explain, run_suite, RunOptions};

pub use report::{CheckRecord, Report, Status};

/// Configs shipped under `fixtures/`, by name.
pub const SHIPPED: [(&str, &str); 5] = [
    ("two_state_T1", include_str!("../../../fixtures/two_state_T1.toml")),
    ("binary_T2", include_str!("../../../fixtures/binary_T2.toml")),
    ("binary_T2_broken", include_str!("../../../fixtures/binary_T2_broken.toml")),
    ("binary_T2_two_assets", include_str!("../../../fixtures/binary_T2_two_assets.toml")),
    ("binary_T3_shifted", include_str!("../../../fixtures/binary_T3_shifted.toml")),
];

pub fn shipped(name: &str) -> Option<&'static str> {
    SHIPPED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Loads `arg` as a path, or as the name of a shipped config when no such
/// file exists.
pub fn resolve_model(arg: &str) -> Result<ModelConfig, ConfigError> {
    if !Path::new(arg).exists() {
        if let Some(text) = shipped(arg) {
            return parse_model(text);
        }
    }
    load_model(arg)
}

/// Worker cap from `RISKTREE_THREADS`; unset, empty or zero means no cap.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("RISKTREE_THREADS").ok()?.trim().parse().ok().filter(|n| *n > 0)
}

#[derive(Debug, Parser)]
#[command(name = "risktree", version, about = "Checks set-valued dynamic risk measures on finite scenario trees")]
pub struct Args {
    /// Config file, or the name of a shipped config such as `two_state_T1`.
    pub config: Option<String>,
    /// One of axioms, equivalence, duality, consistency, all.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Directory for report.toml and report.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Describe a check and exit.
    #[arg(long, value_name = "ID")]
    pub explain: Option<String>,
}

/// Runs the command line and returns the exit code: 0 when every check
/// passes, 1 on a check failure, 2 on a usage or config error.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    if let Some(id) = &args.explain {
        return match explain(id) {
            Ok(text) => {
                let _ = write!(stdout, "{text}");
                0
            }
            Err(msg) => {
                let _ = writeln!(stderr, "error: {msg}");
                2
            }
        };
    }
    let Some(path) = &args.config else {
        let _ = writeln!(stderr, "error: no config given");
        return 2;
    };
    let model = match resolve_model(path) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(stderr, "error: invalid config {path}:\n{e}");
            return 2;
        }
    };
    let mut opts = RunOptions::from_model(&model);
    if let Some(s) = args.suite {
        opts.suite = s;
    }
    if let Some(s) = args.seed {
        opts.seed = s;
    }
    if let Some(t) = args.tolerance {
        if !(t > 0.0) {
            let _ = writeln!(stderr, "error: --tolerance must be positive");
            return 2;
        }
        opts.tolerance = t;
    }
    if let Some(m) = args.mode {
        opts.mode = m;
    }
    opts.threads = threads_from_env();
    let report = match run_suite(&model, &opts) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    if let Some(dir) = &args.out {
        if let Err(e) = report.write_to(dir) {
            let _ = writeln!(stderr, "error: cannot write reports to {}: {e}", dir.display());
            return 2;
        }
    }
    let _ = write!(stdout, "{}", report.render_text());
    report.exit_code()
}
