//! Command-line interface.
//!
//! Exit codes: 0 success or confirmed prediction, 1 I/O failure, 2
//! configuration or usage error, 3 numerical divergence, 4 the run
//! contradicts the predicted behaviour.

pub mod config;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::experiments::{
    behavior_sweep, contraction_sweep, figure4, Figure4Options, Verdict, RNG_ALGORITHM,
};
use crate::integrator::{simulate, Terminal, Trajectory};
use crate::state::{splay_state, tv_norm, CriticalSet, Extremum, ReducedState};

pub use config::{ConfigError, RunConfig};
pub use output::format_f64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Core(Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(e) => core_code(e),
        }
    }
}

fn core_code(e: &Error) -> i32 {
    match e {
        Error::NumericalDivergence { .. } => EXIT_DIVERGENCE,
        Error::Trial { source, .. } => core_code(source),
        _ => EXIT_CONFIG,
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Core(e) => write!(f, "error: {e}"),
            CliError::Io { path, source } => write!(f, "I/O error on {}: {source}", path.display()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "monosync",
    version,
    about = "Monotone phase-coupled oscillators: contraction certificates, splay convergence and finite-time sync"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one initial condition; writes trajectory.csv, events.json, run.json.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Contraction sweep over random pairs; writes report.json.
    Contract {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Worker threads. Results do not depend on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Behaviour sweep over random initial conditions; writes report.json.
    Behavior {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Distance diagnostics for a difference vector, e.g. `decompose -- -1 2 -1`.
    Decompose {
        #[arg(allow_negative_numbers = true, required = true)]
        values: Vec<f64>,
    },
    /// Both N = 10 exponential-coupling runs from one seeded initial condition.
    Figure4 {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Human-readable results go to `stdout`, diagnostics to `stderr`.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate { config, out } => simulate_cmd(&config, out.as_deref(), stdout),
        Command::Contract { config, out, jobs } => {
            contract_cmd(&config, out.as_deref(), jobs, stdout)
        }
        Command::Behavior { config, out, jobs } => {
            behavior_cmd(&config, out.as_deref(), jobs, stdout)
        }
        Command::Decompose { values } => decompose_cmd(&values, stdout),
        Command::Figure4 {
            seed,
            out,
            t_end,
            dt,
        } => {
            let mut opts = Figure4Options::default();
            opts.t_end = t_end.unwrap_or(opts.t_end);
            opts.dt = dt.unwrap_or(opts.dt);
            figure4_cmd(seed, &out, &opts, stdout)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(
        args,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

pub fn cmd_simulate(config_path: &Path, out_dir: &Path) -> i32 {
    finish(simulate_cmd(
        config_path,
        Some(out_dir),
        &mut std::io::stdout(),
    ))
}

pub fn cmd_contract(config_path: &Path, out_dir: &Path, jobs: usize) -> i32 {
    finish(contract_cmd(
        config_path,
        Some(out_dir),
        jobs,
        &mut std::io::stdout(),
    ))
}

pub fn cmd_behavior(config_path: &Path, out_dir: &Path, jobs: usize) -> i32 {
    finish(behavior_cmd(
        config_path,
        Some(out_dir),
        jobs,
        &mut std::io::stdout(),
    ))
}

pub fn cmd_decompose(values: &[f64]) -> i32 {
    finish(decompose_cmd(values, &mut std::io::stdout()))
}

pub fn cmd_figure4(seed: u64, out_dir: &Path) -> i32 {
    finish(figure4_cmd(
        seed,
        out_dir,
        &Figure4Options::default(),
        &mut std::io::stdout(),
    ))
}

fn finish(r: Result<i32, CliError>) -> i32 {
    r.unwrap_or_else(|e| {
        eprintln!("{e}");
        e.exit_code()
    })
}

fn out_dir(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf, CliError> {
    match (out, &cfg.output.dir) {
        (Some(p), _) => Ok(p.to_path_buf()),
        (None, Some(d)) => Ok(PathBuf::from(d)),
        (None, None) => Err(ConfigError {
            key: "output.dir".into(),
            reason: "no output directory; pass -o or set output.dir".into(),
        }
        .into()),
    }
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    terminal: Terminal,
    n_samples: usize,
    n_events: usize,
    initial: &'a ReducedState,
    final_reduced: ReducedState,
    final_multiplicities: Vec<usize>,
    rng: &'static str,
}

fn simulate_cmd(path: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RunConfig::load(path)?;
    let dir = out_dir(&cfg, out)?;
    let sim = cfg.sim_config()?;
    let traj = simulate(&sim)?;
    output::create_dir(&dir)?;
    write_trajectory(
        &dir,
        "trajectory.csv",
        "events.json",
        "simulate",
        &cfg,
        &traj,
    )?;
    let initial = traj.initial().state.to_reduced();
    let last = &traj.last().state;
    let summary = SimulateSummary {
        terminal: traj.terminal,
        n_samples: traj.samples.len(),
        n_events: traj.events.len(),
        initial: &initial,
        final_reduced: last.to_reduced(),
        final_multiplicities: last.mults(),
        rng: RNG_ALGORITHM,
    };
    output::write_json(
        &output::join(&dir, "run.json"),
        &output::Envelope::new("simulate", &cfg, &summary),
    )?;
    let _ = writeln!(stdout, "{}", traj.terminal.label());
    Ok(EXIT_OK)
}

fn write_trajectory<C: Serialize>(
    dir: &Path,
    csv_name: &str,
    events_name: &str,
    command: &str,
    config: &C,
    traj: &Trajectory,
) -> Result<(), CliError> {
    let prov = output::provenance_lines(command, config);
    output::write_text(
        &output::join(dir, csv_name),
        &output::trajectory_csv(traj, &prov),
    )?;
    output::write_json(&output::join(dir, events_name), &traj.events)
}

fn contract_cmd(
    path: &Path,
    out: Option<&Path>,
    jobs: usize,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let cfg = RunConfig::load(path)?;
    let dir = out_dir(&cfg, out)?;
    if jobs == 0 {
        return Err(ConfigError {
            key: "jobs".into(),
            reason: "must be at least 1".into(),
        }
        .into());
    }
    let params = cfg.params()?;
    let report = contraction_sweep(
        &params,
        cfg.experiment.n_pairs,
        cfg.experiment.seed,
        &cfg.contraction_options(jobs),
    )?;
    output::create_dir(&dir)?;
    output::write_json(
        &output::join(&dir, "report.json"),
        &output::Envelope::new("contract", &cfg, &report),
    )?;
    let label = |v: Verdict| {
        serde_json::to_value(v)
            .unwrap()
            .as_str()
            .unwrap()
            .to_string()
    };
    let _ = writeln!(
        stdout,
        "verdict: {} (predicted {}); pairs {}; sign violations {}; monotonicity violations {}",
        label(report.verdict),
        label(report.predicted),
        report.n_pairs,
        report.sign_violations(),
        report.monotonicity_violations()
    );
    Ok(if report.verdict == report.predicted {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn behavior_cmd(
    path: &Path,
    out: Option<&Path>,
    jobs: usize,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let cfg = RunConfig::load(path)?;
    let dir = out_dir(&cfg, out)?;
    if jobs == 0 {
        return Err(ConfigError {
            key: "jobs".into(),
            reason: "must be at least 1".into(),
        }
        .into());
    }
    let params = cfg.params()?;
    let report = behavior_sweep(
        &params,
        cfg.experiment.n_trials,
        cfg.experiment.seed,
        &cfg.behavior_options(jobs),
    )?;
    output::create_dir(&dir)?;
    output::write_json(
        &output::join(&dir, "report.json"),
        &output::Envelope::new("behavior", &cfg, &report),
    )?;
    let label = |v| {
        serde_json::to_value(v)
            .unwrap()
            .as_str()
            .unwrap()
            .to_string()
    };
    let events: usize = report.trials.iter().map(|t| t.events.len()).sum();
    let _ = writeln!(
        stdout,
        "summary: {} (predicted {}); trials {}; sync events {}",
        label(report.summary),
        label(report.predicted),
        report.n_trials,
        events
    );
    Ok(if report.summary == report.predicted {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn decompose_cmd(values: &[f64], stdout: &mut dyn Write) -> Result<i32, CliError> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("difference entry {v} is not finite")).into());
    }
    let cs = CriticalSet::from_differences(values)?;
    let tv = tv_norm(values);
    let alt = cs.alternating_sum(values)?;
    let residual = (tv - 2.0 * alt).abs();
    let ok = residual <= 1e-12 * tv.max(1.0);
    let critical: Vec<String> = cs
        .iter()
        .map(|(i, k)| {
            let kind = match k {
                Extremum::Min => "min",
                Extremum::Max => "max",
            };
            format!("{i}:{kind}")
        })
        .collect();
    let shown: Vec<String> = values.iter().map(|&v| format_f64(v)).collect();
    let _ = writeln!(stdout, "differences: [{}]", shown.join(", "));
    let _ = writeln!(stdout, "tv_distance: {}", format_f64(tv));
    let _ = writeln!(stdout, "critical: {}", critical.join(" "));
    let _ = writeln!(stdout, "alternating_sum: {}", format_f64(alt));
    let _ = writeln!(
        stdout,
        "identity: |tv_distance - 2*alternating_sum| = {} ({})",
        format_f64(residual),
        if ok { "ok" } else { "FAILED" }
    );
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

#[derive(Serialize)]
struct BranchSummary {
    coupling: String,
    terminal: Terminal,
    n_events: usize,
    final_multiplicities: Vec<usize>,
    final_splay_deviation: Option<f64>,
}

#[derive(Serialize)]
struct Figure4Summary<'a> {
    seed: u64,
    rng: &'static str,
    options: &'a Figure4Options,
    initial_phases: &'a [f64],
    decreasing: BranchSummary,
    increasing: BranchSummary,
}

#[derive(Serialize)]
struct Figure4Provenance<'a> {
    seed: u64,
    rng: &'static str,
    options: &'a Figure4Options,
    coupling: String,
}

fn figure4_cmd(
    seed: u64,
    dir: &Path,
    opts: &Figure4Options,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let fig = figure4(seed, opts)?;
    output::create_dir(dir)?;
    let splay = splay_state(crate::experiments::FIGURE4_N)?;
    let branch = |t: &Trajectory, s: i32| -> BranchSummary {
        let last = &t.last().state;
        BranchSummary {
            coupling: coupling_id(s),
            terminal: t.terminal,
            n_events: t.events.len(),
            final_multiplicities: last.mults(),
            final_splay_deviation: (last.m() == last.n())
                .then(|| last.to_reduced().max_deviation(&splay).ok())
                .flatten(),
        }
    };
    for (name, traj, s) in [
        ("decreasing", &fig.decreasing, 1),
        ("increasing", &fig.increasing, -1),
    ] {
        let prov = Figure4Provenance {
            seed,
            rng: RNG_ALGORITHM,
            options: opts,
            coupling: coupling_id(s),
        };
        write_trajectory(
            dir,
            &format!("{name}.csv"),
            &format!("{name}_events.json"),
            "figure4",
            &prov,
            traj,
        )?;
    }
    let summary = Figure4Summary {
        seed,
        rng: RNG_ALGORITHM,
        options: opts,
        initial_phases: fig.initial.phases(),
        decreasing: branch(&fig.decreasing, 1),
        increasing: branch(&fig.increasing, -1),
    };
    output::write_json(&output::join(dir, "summary.json"), &summary)?;
    let _ = writeln!(stdout, "decreasing: {}", fig.decreasing.terminal.label());
    let _ = writeln!(stdout, "increasing: {}", fig.increasing.terminal.label());
    let confirmed = matches!(fig.decreasing.terminal, Terminal::SplayConverged { .. })
        && matches!(fig.increasing.terminal, Terminal::FullSync { .. });
    Ok(if confirmed { EXIT_OK } else { EXIT_VIOLATION })
}

fn coupling_id(s: i32) -> String {
    crate::coupling::CouplingDescriptor::Expfam {
        s,
        a: crate::experiments::FIGURE4_A,
        n: crate::experiments::FIGURE4_N,
    }
    .to_string()
}
