//! The TOML run configuration shared by every subcommand.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coupling::{CouplingDescriptor, CouplingFunction};
use crate::dynamics::ModelParams;
use crate::experiments::{
    rng_for, sample_interior, BehaviorOptions, ContractionOptions, MIN_GAP_FACTOR,
};
use crate::integrator::{InitialState, SimConfig, DEFAULT_SPLAY_TOL, DEFAULT_SYNC_EPS};
use crate::state::{splay_state, AbsoluteState, ReducedState};

/// A configuration problem, tied to the dotted key it concerns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.reason)
        } else {
            write!(f, "`{}`: {}", self.key, self.reason)
        }
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: usize,
    #[serde(default = "default_omega")]
    pub omega: f64,
    /// Overrides Γ(0); the midpoint of the one-sided limits otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_at_zero: Option<f64>,
    pub coupling: CouplingDescriptor,
}

fn default_omega() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: f64,
    pub t_end: f64,
    pub sync_eps: f64,
    pub record_every: usize,
    pub splay_tol: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection {
            dt: 1e-3,
            t_end: 500.0,
            sync_eps: DEFAULT_SYNC_EPS,
            record_every: 100,
            splay_tol: DEFAULT_SPLAY_TOL,
        }
    }
}

/// Initial condition for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    /// Uniform interior sample; uses `experiment.seed` when `seed` is absent.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Splay,
    /// Absolute phases, any real values.
    Absolute {
        phases: Vec<f64>,
    },
    /// Sorted differences θ_k − θ_1 in [0, 2π].
    Reduced {
        diffs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub seed: u64,
    pub n_pairs: usize,
    pub n_trials: usize,
    pub horizon: f64,
    pub sample_every: usize,
    pub monotonicity_tol: f64,
    /// Boundary-cone constraints for `contract`; open cone when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<Vec<usize>>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let c = ContractionOptions::default();
        ExperimentSection {
            seed: 0,
            n_pairs: 100,
            n_trials: 50,
            horizon: c.horizon,
            sample_every: c.sample_every,
            monotonicity_tol: c.monotonicity_tol,
            cone: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Default output directory when `-o` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection::Random { seed: None }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad("", e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks every field before anything runs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        if m.n < 2 {
            return Err(bad("model.n", format!("must be at least 2, got {}", m.n)));
        }
        if !m.omega.is_finite() {
            return Err(bad("model.omega", "must be finite"));
        }
        if m.value_at_zero.is_some_and(|v| !v.is_finite()) {
            return Err(bad("model.value_at_zero", "must be finite"));
        }
        self.params()?;

        let i = &self.integrator;
        if !(i.dt.is_finite() && i.dt > 0.0) {
            return Err(bad(
                "integrator.dt",
                format!("must be positive, got {}", i.dt),
            ));
        }
        if !(i.t_end.is_finite() && i.t_end > 0.0) {
            return Err(bad(
                "integrator.t_end",
                format!("must be positive, got {}", i.t_end),
            ));
        }
        if i.dt > i.t_end {
            return Err(bad("integrator.dt", "must not exceed t_end"));
        }
        if !(i.sync_eps.is_finite() && i.sync_eps > 0.0) {
            return Err(bad(
                "integrator.sync_eps",
                format!("must be positive, got {}", i.sync_eps),
            ));
        }
        if i.record_every == 0 {
            return Err(bad("integrator.record_every", "must be at least 1"));
        }
        if !(i.splay_tol.is_finite() && i.splay_tol > 0.0) {
            return Err(bad(
                "integrator.splay_tol",
                format!("must be positive, got {}", i.splay_tol),
            ));
        }

        let e = &self.experiment;
        if e.n_pairs == 0 {
            return Err(bad("experiment.n_pairs", "must be at least 1"));
        }
        if e.n_trials == 0 {
            return Err(bad("experiment.n_trials", "must be at least 1"));
        }
        if !(e.horizon.is_finite() && e.horizon > 0.0) {
            return Err(bad(
                "experiment.horizon",
                format!("must be positive, got {}", e.horizon),
            ));
        }
        if e.sample_every == 0 {
            return Err(bad("experiment.sample_every", "must be at least 1"));
        }
        if !(e.monotonicity_tol.is_finite() && e.monotonicity_tol >= 0.0) {
            return Err(bad("experiment.monotonicity_tol", "must be non-negative"));
        }
        if let Some(cone) = &e.cone {
            if cone.is_empty() || cone.len() + 2 > m.n || cone.iter().any(|&c| c == 0 || c > m.n) {
                return Err(bad(
                    "experiment.cone",
                    format!("needs 1 to N−2 distinct indices in 1..={}", m.n),
                ));
            }
            let mut sorted = cone.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cone.len() {
                return Err(bad("experiment.cone", "indices must be distinct"));
            }
        }

        match &self.initial {
            InitialSection::Absolute { phases } => {
                if phases.len() != m.n {
                    return Err(bad(
                        "initial.phases",
                        format!("expected {} phases, got {}", m.n, phases.len()),
                    ));
                }
                AbsoluteState::new(phases.clone())
                    .map_err(|e| bad("initial.phases", e.to_string()))?;
            }
            InitialSection::Reduced { diffs } => {
                if diffs.len() + 1 != m.n {
                    return Err(bad(
                        "initial.diffs",
                        format!("expected {} differences, got {}", m.n - 1, diffs.len()),
                    ));
                }
                ReducedState::new(diffs.clone())
                    .map_err(|e| bad("initial.diffs", e.to_string()))?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let m = &self.model;
        let mut gamma = CouplingFunction::from_descriptor(&m.coupling)
            .map_err(|e| bad("model.coupling", e.to_string()))?;
        if let Some(v) = m.value_at_zero {
            gamma = gamma
                .with_value_at_zero(v)
                .map_err(|e| bad("model.value_at_zero", e.to_string()))?;
        }
        ModelParams::new(gamma, m.omega, m.n).map_err(|e| bad("model.coupling", e.to_string()))
    }

    pub fn initial_state(&self) -> Result<InitialState, ConfigError> {
        let n = self.model.n;
        let random = |seed: u64| {
            let min_gap = MIN_GAP_FACTOR * self.integrator.sync_eps;
            sample_interior(n, min_gap, &mut rng_for(seed, 0))
                .map(InitialState::Reduced)
                .map_err(|e| bad("initial", e.to_string()))
        };
        match &self.initial {
            InitialSection::Random { seed } => random(seed.unwrap_or(self.experiment.seed)),
            InitialSection::Splay => splay_state(n)
                .map(InitialState::Reduced)
                .map_err(|e| bad("initial", e.to_string())),
            InitialSection::Absolute { phases } => AbsoluteState::new(phases.clone())
                .map(InitialState::Absolute)
                .map_err(|e| bad("initial.phases", e.to_string())),
            InitialSection::Reduced { diffs } => ReducedState::new(diffs.clone())
                .map(InitialState::Reduced)
                .map_err(|e| bad("initial.diffs", e.to_string())),
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let i = &self.integrator;
        Ok(SimConfig {
            params: self.params()?,
            initial: self.initial_state()?,
            dt: i.dt,
            t_end: i.t_end,
            sync_eps: i.sync_eps,
            record_every: i.record_every,
            splay_tol: i.splay_tol,
        })
    }

    pub fn contraction_options(&self, jobs: usize) -> ContractionOptions {
        let e = &self.experiment;
        ContractionOptions {
            dt: self.integrator.dt,
            horizon: e.horizon,
            sample_every: e.sample_every,
            sync_eps: self.integrator.sync_eps,
            monotonicity_tol: e.monotonicity_tol,
            cone: e.cone.clone(),
            jobs,
        }
    }

    pub fn behavior_options(&self, jobs: usize) -> BehaviorOptions {
        let i = &self.integrator;
        BehaviorOptions {
            dt: i.dt,
            t_end: i.t_end,
            sync_eps: i.sync_eps,
            splay_tol: i.splay_tol,
            jobs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
n = 10
coupling = { family = "expfam", s = 1, a = 0.1, N = 10 }
"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.model.omega, 1.0);
        assert_eq!(c.integrator, IntegratorSection::default());
        assert_eq!(c.initial, InitialSection::Random { seed: None });
        assert!(c.sim_config().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[integrator]\ndt = 0.001\nstep = 2\n");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("step"), "{err}");
        let text = MINIMAL.replace("a = 0.1", "a = 0.1, b = 2");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("[integrator]\ndt = 0.0", "integrator.dt"),
            ("[integrator]\nt_end = -1.0", "integrator.t_end"),
            ("[experiment]\nn_pairs = 0", "experiment.n_pairs"),
            ("[experiment]\ncone = [11]", "experiment.cone"),
            (
                "[initial]\nkind = \"reduced\"\ndiffs = [1.0]",
                "initial.diffs",
            ),
        ];
        for (extra, key) in cases {
            let err = RunConfig::from_toml(&format!("{MINIMAL}\n{extra}\n")).unwrap_err();
            assert_eq!(err.key, key, "{extra}");
        }
        let err = RunConfig::from_toml(&MINIMAL.replace("a = 0.1", "a = -0.1")).unwrap_err();
        assert_eq!(err.key, "model.coupling");
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        let back = RunConfig::from_toml(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
