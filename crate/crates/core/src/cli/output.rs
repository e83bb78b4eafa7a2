//! File writers. Floats are written in their shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::integrator::Trajectory;

use super::CliError;

pub(crate) const TOOL: &str = "monosync";
pub(crate) const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Provenance wrapper shared by every JSON document the CLI writes.
#[derive(Serialize)]
pub(crate) struct Envelope<'a, C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a C,
    pub result: &'a R,
}

impl<'a, C: Serialize, R: Serialize> Envelope<'a, C, R> {
    pub fn new(command: &'static str, config: &'a C, result: &'a R) -> Self {
        Envelope {
            tool: TOOL,
            version: VERSION,
            command,
            config,
            result,
        }
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_text(path, &text)
}

/// `# key: value` lines placed above the CSV header.
pub(crate) fn provenance_lines<C: Serialize>(command: &str, config: &C) -> Vec<String> {
    vec![
        format!("{TOOL} {VERSION} {command}"),
        format!(
            "config: {}",
            serde_json::to_string(config).expect("config serializes")
        ),
    ]
}

/// Trajectory as `t,phase_1,...,phase_N`, phases wrapped into [0, 2π).
pub(crate) fn trajectory_csv(traj: &Trajectory, provenance: &[String]) -> String {
    let n = traj.initial().state.n();
    let mut out = String::new();
    for line in provenance {
        let _ = writeln!(out, "# {line}");
    }
    out.push('t');
    for k in 1..=n {
        let _ = write!(out, ",phase_{k}");
    }
    out.push('\n');
    for s in &traj.samples {
        out.push_str(&format_f64(s.t));
        for p in s.state.phases() {
            out.push(',');
            out.push_str(&format_f64(p));
        }
        out.push('\n');
    }
    out
}

pub(crate) fn join(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
