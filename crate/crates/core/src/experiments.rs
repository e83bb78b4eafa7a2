//! Batch experiments: contraction sweeps over random pairs of orbits,
//! behaviour sweeps over random initial conditions, and the two-coupling
//! N = 10 reproduction run.
//!
//! Randomness comes from ChaCha8 streams: one generator per pair or trial,
//! seeded with the experiment seed and selecting the stream by id. Results do
//! not depend on how many worker threads run them.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{CouplingClass, CouplingDescriptor, CouplingFunction, Monotonicity};
use crate::dynamics::{
    cluster_reduced_velocities, derivative_terms, distance_rate_from_velocities, ModelParams,
};
use crate::error::{param, Error, Result};
use crate::integrator::{
    renormalize, simulate, InitialState, Rk4, SimConfig, SyncEvent, Terminal, Trajectory,
    DEFAULT_SPLAY_TOL, DEFAULT_SYNC_EPS,
};
use crate::state::{min_gap, splay_state, tv_distance, AbsoluteState, ClusterState, ReducedState};

/// Name of the pseudo-random generator recorded in every report.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng(rand_chacha 0.3): seed_from_u64(seed), set_stream(id)";

/// Initial gaps must exceed this multiple of `sync_eps`.
pub const MIN_GAP_FACTOR: f64 = 10.0;

const MAX_SAMPLER_ATTEMPTS: usize = 100_000;

/// Generator for item `id` of an experiment seeded with `seed`.
pub fn rng_for(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Uniform sample from the open cone: N−1 sorted uniforms on (0, 2π),
/// rejected while any gap (including those to 0 and 2π) is below `min_gap`.
pub fn sample_interior<R: Rng>(n: usize, min_gap: f64, rng: &mut R) -> Result<ReducedState> {
    if n < 2 {
        return Err(Error::Sampler(format!("population size {n} is below 2")));
    }
    if min_gap * n as f64 >= TAU {
        return Err(Error::Sampler(format!(
            "minimum gap {min_gap} cannot fit {n} oscillators"
        )));
    }
    let mut v = vec![0.0; n - 1];
    for _ in 0..MAX_SAMPLER_ATTEMPTS {
        v.iter_mut().for_each(|x| *x = rng.gen_range(0.0..TAU));
        v.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        let ok = v.iter().chain(std::iter::once(&TAU)).all(|&x| {
            let gap_ok = x - prev >= min_gap;
            prev = x;
            gap_ok
        });
        if ok {
            return ReducedState::new(v);
        }
    }
    Err(Error::Sampler(format!(
        "no admissible state after {MAX_SAMPLER_ATTEMPTS} attempts"
    )))
}

/// Pins a reduced state onto the boundary cone given by `constraints`:
/// constraint i ∈ {1..N} forces θ̃_{i−1} = θ̃_i, with θ̃_0 = 0 and θ̃_N = 2π.
pub fn pin_to_cone(x: &ReducedState, constraints: &[usize]) -> Result<ReducedState> {
    let n = x.n();
    validate_cone(n, constraints)?;
    // extended sequence 0, θ̃_1, …, θ̃_{N−1}, 2π and a union of closed gaps
    let mut ext = Vec::with_capacity(n + 1);
    ext.push(0.0);
    ext.extend_from_slice(x.diffs());
    ext.push(TAU);
    let mut closed = vec![false; n + 1];
    for &i in constraints {
        closed[i] = true;
    }
    let mut start = 0;
    while start <= n {
        let mut end = start;
        while end < n && closed[end + 1] {
            end += 1;
        }
        let value = if start == 0 {
            0.0
        } else if end == n {
            TAU
        } else {
            ext[start]
        };
        ext[start..=end].iter_mut().for_each(|v| *v = value);
        start = end + 1;
    }
    ReducedState::new(ext[1..n].to_vec())
}

fn validate_cone(n: usize, constraints: &[usize]) -> Result<()> {
    if constraints.is_empty() {
        return Err(param("cone", "constraint set must be non-empty"));
    }
    let mut sorted = constraints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != constraints.len() {
        return Err(param("cone", "constraints must be distinct"));
    }
    if sorted.iter().any(|&i| i == 0 || i > n) {
        return Err(param(
            "cone",
            format!("constraint indices must lie in 1..={n}"),
        ));
    }
    if sorted.len() + 2 > n {
        return Err(param(
            "cone",
            "at most N−2 constraints leave two clusters to compare",
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionOptions {
    pub dt: f64,
    pub horizon: f64,
    /// Steps between recorded samples.
    pub sample_every: usize,
    pub sync_eps: f64,
    /// Allowed per-sample change of the distance against the predicted
    /// direction.
    pub monotonicity_tol: f64,
    /// Boundary-cone constraint set; `None` samples the open cone.
    pub cone: Option<Vec<usize>>,
    pub jobs: usize,
}

impl Default for ContractionOptions {
    fn default() -> Self {
        ContractionOptions {
            dt: 1e-3,
            horizon: 50.0,
            sample_every: 100,
            sync_eps: DEFAULT_SYNC_EPS,
            monotonicity_tol: 1e-10,
            cone: None,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Contracting,
    Expanding,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub t: f64,
    pub distance: f64,
    pub distance_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSeries {
    pub pair: usize,
    pub samples: Vec<PairSample>,
    /// Time at which either orbit came within `10·sync_eps` of the cone
    /// boundary and integration stopped, if it did.
    pub stopped_at: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// The distance rate had the wrong sign (or was zero).
    Sign,
    /// The sampled distance moved against the predicted direction by more
    /// than the tolerance.
    Monotonicity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub pair: usize,
    pub t: f64,
    pub kind: ViolationKind,
    pub observed_rate: f64,
    pub observed_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub report_kind: String,
    pub coupling_id: String,
    pub coupling: Option<CouplingDescriptor>,
    pub class: CouplingClass,
    pub n: usize,
    pub omega: f64,
    pub seed: u64,
    pub rng: String,
    pub n_pairs: usize,
    pub options: ContractionOptions,
    /// Verdict implied by the sign of Γ′.
    pub predicted: Verdict,
    pub verdict: Verdict,
    /// Departures from the predicted behaviour.
    pub violations: Vec<Violation>,
    pub pairs: Vec<PairSeries>,
}

impl ContractionReport {
    pub fn sign_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Sign)
            .count()
    }

    pub fn monotonicity_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Monotonicity)
            .count()
    }
}

fn predicted_verdict(class: CouplingClass) -> Verdict {
    match class.monotonicity {
        Monotonicity::Decreasing => Verdict::Contracting,
        Monotonicity::Increasing => Verdict::Expanding,
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(param("jobs", "must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| param("jobs", e.to_string()))
}

fn sample_pair(
    p: &ModelParams,
    opts: &ContractionOptions,
    seed: u64,
    pair: usize,
) -> Result<(ClusterState, ClusterState)> {
    let mut rng = rng_for(seed, pair as u64);
    let min_gap = MIN_GAP_FACTOR * opts.sync_eps;
    loop {
        let mut x = sample_interior(p.n(), min_gap, &mut rng)?;
        let mut y = sample_interior(p.n(), min_gap, &mut rng)?;
        if let Some(cone) = &opts.cone {
            x = pin_to_cone(&x, cone)?;
            y = pin_to_cone(&y, cone)?;
        }
        if x != y {
            return Ok((
                ClusterState::from_reduced(&x, 0.0, 0.0)?,
                ClusterState::from_reduced(&y, 0.0, 0.0)?,
            ));
        }
    }
}

fn pair_sample(
    p: &ModelParams,
    t: f64,
    cx: &ClusterState,
    cy: &ClusterState,
    interior: bool,
) -> Result<PairSample> {
    let (x, y) = (cx.to_reduced(), cy.to_reduced());
    let distance = tv_distance(&x, &y)?;
    let distance_rate = if interior {
        derivative_terms(p, &x, &y)?.distance_rate
    } else {
        let vx = cluster_reduced_velocities(p, cx)?;
        let vy = cluster_reduced_velocities(p, cy)?;
        distance_rate_from_velocities(&x, &y, &vx, &vy)?
    };
    Ok(PairSample {
        t,
        distance,
        distance_rate,
    })
}

/// Co-integrates one pair of orbits and records (t, distance, rate).
fn run_pair(
    p: &ModelParams,
    opts: &ContractionOptions,
    seed: u64,
    pair: usize,
) -> Result<PairSeries> {
    let (mut cx, mut cy) = sample_pair(p, opts, seed, pair)?;
    if cx.mults() != cy.mults() {
        return Err(Error::Sampler(
            "pair landed in different cluster structures".into(),
        ));
    }
    let interior = opts.cone.is_none();
    let stop_gap = MIN_GAP_FACTOR * opts.sync_eps;
    let mut rk = Rk4::new(&cx.mults());
    let mut bx = vec![0.0; cx.m()];
    let mut by = vec![0.0; cy.m()];
    let mut samples = vec![pair_sample(p, 0.0, &cx, &cy, interior)?];
    let n_steps = (opts.horizon / opts.dt).round() as usize;
    let mut stopped_at = None;
    for k in 1..=n_steps {
        let t = k as f64 * opts.dt;
        // a step whose stages come this close straddles the jump of Γ and
        // is no longer a faithful step of the smooth flow
        rk.step(p, cx.reps(), opts.dt, &mut bx);
        let near = rk.stage_min_gap() < stop_gap;
        rk.step(p, cy.reps(), opts.dt, &mut by);
        if near || rk.stage_min_gap() < stop_gap {
            stopped_at = Some(t - opts.dt);
            break;
        }
        if bx.iter().chain(&by).any(|r| !r.is_finite()) {
            return Err(Error::NumericalDivergence { t });
        }
        cx.reps_mut().copy_from_slice(&bx);
        cy.reps_mut().copy_from_slice(&by);
        renormalize(cx.reps_mut());
        renormalize(cy.reps_mut());
        if k % opts.sample_every == 0 || k == n_steps {
            samples.push(pair_sample(p, t, &cx, &cy, interior)?);
        }
    }
    if let Some(t) = stopped_at {
        if samples.last().is_some_and(|s| s.t < t) {
            samples.push(pair_sample(p, t, &cx, &cy, interior)?);
        }
    }
    Ok(PairSeries {
        pair,
        samples,
        stopped_at,
    })
}

fn validate_contraction(opts: &ContractionOptions, n_pairs: usize) -> Result<()> {
    if n_pairs == 0 {
        return Err(param("n_pairs", "must be at least 1"));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(param("dt", "must be positive"));
    }
    if !(opts.horizon.is_finite() && opts.horizon > 0.0) {
        return Err(param("horizon", "must be positive"));
    }
    if opts.sample_every == 0 {
        return Err(param("sample_every", "must be positive"));
    }
    if !(opts.sync_eps >= 0.0) {
        return Err(param("sync_eps", "must be non-negative"));
    }
    if !(opts.monotonicity_tol >= 0.0) {
        return Err(param("monotonicity_tol", "must be non-negative"));
    }
    Ok(())
}

/// Samples `n_pairs` pairs of distinct states, co-integrates them and
/// certifies the sign of the distance rate and the monotonicity of the
/// distance at every sample.
pub fn contraction_sweep(
    p: &ModelParams,
    n_pairs: usize,
    seed: u64,
    opts: &ContractionOptions,
) -> Result<ContractionReport> {
    let class = p.require_class()?;
    validate_contraction(opts, n_pairs)?;
    if let Some(cone) = &opts.cone {
        validate_cone(p.n(), cone)?;
    }
    let pairs = pool(opts.jobs)?.install(|| {
        (0..n_pairs)
            .into_par_iter()
            .map(|i| {
                run_pair(p, opts, seed, i).map_err(|e| Error::Trial {
                    trial: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let predicted = predicted_verdict(class);
    let sign = class.monotonicity.sign();
    let mut violations = Vec::new();
    let (mut all_neg, mut all_pos) = (true, true);
    let (mut non_inc, mut non_dec) = (true, true);
    for series in &pairs {
        let mut prev: Option<f64> = None;
        for s in &series.samples {
            all_neg &= s.distance_rate < 0.0;
            all_pos &= s.distance_rate > 0.0;
            // predicted rate has the sign of Γ′
            let wrong_sign = !(s.distance_rate * sign > 0.0);
            let change = prev.map_or(0.0, |d| s.distance - d);
            non_inc &= change <= opts.monotonicity_tol;
            non_dec &= change >= -opts.monotonicity_tol;
            if wrong_sign {
                violations.push(Violation {
                    pair: series.pair,
                    t: s.t,
                    kind: ViolationKind::Sign,
                    observed_rate: s.distance_rate,
                    observed_change: change,
                });
            }
            if change * sign < -opts.monotonicity_tol {
                violations.push(Violation {
                    pair: series.pair,
                    t: s.t,
                    kind: ViolationKind::Monotonicity,
                    observed_rate: s.distance_rate,
                    observed_change: change,
                });
            }
            prev = Some(s.distance);
        }
    }
    let verdict = if all_neg && non_inc {
        Verdict::Contracting
    } else if all_pos && non_dec {
        Verdict::Expanding
    } else {
        Verdict::Violated
    };
    Ok(ContractionReport {
        report_kind: "contraction".into(),
        coupling_id: p.gamma().id().to_string(),
        coupling: p.gamma().descriptor().cloned(),
        class,
        n: p.n(),
        omega: p.omega(),
        seed,
        rng: RNG_ALGORITHM.into(),
        n_pairs,
        options: opts.clone(),
        predicted,
        verdict,
        violations,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorOptions {
    pub dt: f64,
    pub t_end: f64,
    pub sync_eps: f64,
    pub splay_tol: f64,
    pub jobs: usize,
}

impl Default for BehaviorOptions {
    fn default() -> Self {
        BehaviorOptions {
            dt: 1e-3,
            t_end: 500.0,
            sync_eps: DEFAULT_SYNC_EPS,
            splay_tol: DEFAULT_SPLAY_TOL,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorSummary {
    AllSplay,
    AllFullSync,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub initial: ReducedState,
    pub terminal: Terminal,
    pub events: Vec<SyncEvent>,
    pub final_reduced: ReducedState,
    pub final_multiplicities: Vec<usize>,
    /// max_k |θ̃_k − 2πk/N| at the end of the run.
    pub final_splay_deviation: f64,
    /// Velocity of the single cluster after full synchronization.
    pub sync_velocity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorReport {
    pub report_kind: String,
    pub coupling_id: String,
    pub coupling: Option<CouplingDescriptor>,
    pub class: CouplingClass,
    pub n: usize,
    pub omega: f64,
    pub seed: u64,
    pub rng: String,
    pub n_trials: usize,
    pub options: BehaviorOptions,
    pub predicted: BehaviorSummary,
    pub summary: BehaviorSummary,
    pub trials: Vec<TrialRecord>,
}

impl BehaviorReport {
    /// Largest pairwise deviation between the final reduced states.
    pub fn terminal_spread(&self) -> f64 {
        let mut spread = 0.0f64;
        for (i, a) in self.trials.iter().enumerate() {
            for b in &self.trials[i + 1..] {
                if let Ok(d) = a.final_reduced.max_deviation(&b.final_reduced) {
                    spread = spread.max(d);
                }
            }
        }
        spread
    }
}

fn run_trial(
    p: &ModelParams,
    opts: &BehaviorOptions,
    seed: u64,
    trial: usize,
) -> Result<TrialRecord> {
    let mut rng = rng_for(seed, trial as u64);
    let initial = sample_interior(p.n(), MIN_GAP_FACTOR * opts.sync_eps, &mut rng)?;
    let cfg = SimConfig {
        params: p.clone(),
        initial: InitialState::Reduced(initial.clone()),
        dt: opts.dt,
        t_end: opts.t_end,
        sync_eps: opts.sync_eps,
        record_every: usize::MAX,
        splay_tol: opts.splay_tol,
    };
    let traj = simulate(&cfg)?;
    let last = &traj.last().state;
    let final_reduced = last.to_reduced();
    let final_splay_deviation = final_reduced.max_deviation(&splay_state(p.n())?)?;
    let sync_velocity = if last.m() == 1 {
        Some(crate::dynamics::cluster_vector_field(p, last)?[0])
    } else {
        None
    };
    Ok(TrialRecord {
        trial,
        initial,
        terminal: traj.terminal,
        final_multiplicities: last.mults(),
        events: traj.events,
        final_reduced,
        final_splay_deviation,
        sync_velocity,
    })
}

/// Simulates `n_trials` random interior initial conditions and classifies
/// where each one ends up.
pub fn behavior_sweep(
    p: &ModelParams,
    n_trials: usize,
    seed: u64,
    opts: &BehaviorOptions,
) -> Result<BehaviorReport> {
    let class = p.require_class()?;
    if n_trials == 0 {
        return Err(param("n_trials", "must be at least 1"));
    }
    let trials = pool(opts.jobs)?.install(|| {
        (0..n_trials)
            .into_par_iter()
            .map(|i| {
                run_trial(p, opts, seed, i).map_err(|e| Error::Trial {
                    trial: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let predicted = match class.monotonicity {
        Monotonicity::Decreasing => BehaviorSummary::AllSplay,
        Monotonicity::Increasing => BehaviorSummary::AllFullSync,
    };
    let all_splay = trials
        .iter()
        .all(|t| matches!(t.terminal, Terminal::SplayConverged { .. }));
    let all_sync = trials
        .iter()
        .all(|t| matches!(t.terminal, Terminal::FullSync { .. }));
    let summary = match class.monotonicity {
        Monotonicity::Decreasing if all_splay => BehaviorSummary::AllSplay,
        Monotonicity::Increasing if all_sync => BehaviorSummary::AllFullSync,
        _ => BehaviorSummary::Mixed,
    };
    Ok(BehaviorReport {
        report_kind: "behavior".into(),
        coupling_id: p.gamma().id().to_string(),
        coupling: p.gamma().descriptor().cloned(),
        class,
        n: p.n(),
        omega: p.omega(),
        seed,
        rng: RNG_ALGORITHM.into(),
        n_trials,
        options: opts.clone(),
        predicted,
        summary,
        trials,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure4Options {
    pub omega: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub sync_eps: f64,
    pub splay_tol: f64,
}

impl Default for Figure4Options {
    fn default() -> Self {
        Figure4Options {
            omega: 1.0,
            dt: 1e-3,
            t_end: 500.0,
            record_every: 100,
            sync_eps: DEFAULT_SYNC_EPS,
            splay_tol: DEFAULT_SPLAY_TOL,
        }
    }
}

/// Both N = 10 runs of the exponential family from one initial condition.
#[derive(Debug, Clone)]
pub struct Figure4 {
    pub seed: u64,
    pub initial: AbsoluteState,
    /// Γ(θ) = (0.1 + e^{−θ})/10.
    pub decreasing: Trajectory,
    /// Γ(θ) = −(0.1 + e^{−θ})/10.
    pub increasing: Trajectory,
}

pub const FIGURE4_N: usize = 10;
pub const FIGURE4_A: f64 = 0.1;

pub fn figure4(seed: u64, opts: &Figure4Options) -> Result<Figure4> {
    let mut rng = rng_for(seed, 0);
    let reduced = sample_interior(FIGURE4_N, MIN_GAP_FACTOR * opts.sync_eps, &mut rng)?;
    let initial = reduced.to_absolute(0.0)?;
    let run = |s: i32| -> Result<Trajectory> {
        let gamma = CouplingFunction::expfam(s, FIGURE4_A, FIGURE4_N)?;
        let params = ModelParams::new(gamma, opts.omega, FIGURE4_N)?;
        simulate(&SimConfig {
            params,
            initial: InitialState::Absolute(initial.clone()),
            dt: opts.dt,
            t_end: opts.t_end,
            sync_eps: opts.sync_eps,
            record_every: opts.record_every,
            splay_tol: opts.splay_tol,
        })
    };
    Ok(Figure4 {
        seed,
        decreasing: run(1)?,
        increasing: run(-1)?,
        initial,
    })
}

/// Per-oscillator phases in [0, 2π) at every recorded sample.
pub fn phase_series(traj: &Trajectory) -> Vec<(f64, Vec<f64>)> {
    traj.samples
        .iter()
        .map(|s| (s.t, s.state.phases()))
        .collect()
}

/// Smallest circular gap at each sample; useful for spotting boundary
/// approaches in plots.
pub fn min_gap_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.samples
        .iter()
        .map(|s| (s.t, min_gap(s.state.reps())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(s: i32) -> ModelParams {
        ModelParams::new(CouplingFunction::expfam(s, 0.1, 10).unwrap(), 1.0, 10).unwrap()
    }

    #[test]
    fn sampler_respects_gaps_and_seed() {
        let a = sample_interior(10, 1e-7, &mut rng_for(3, 1)).unwrap();
        let b = sample_interior(10, 1e-7, &mut rng_for(3, 1)).unwrap();
        let c = sample_interior(10, 1e-7, &mut rng_for(3, 2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(crate::state::cone_location(&a, 1e-7).is_interior());
        assert!(sample_interior(1, 0.0, &mut rng_for(0, 0)).is_err());
        assert!(sample_interior(10, 1.0, &mut rng_for(0, 0)).is_err());
    }

    #[test]
    fn pinning_builds_boundary_cones() {
        let x = splay_state(6).unwrap();
        let d = |c: &[usize]| pin_to_cone(&x, c).unwrap().diffs().to_vec();
        assert_eq!(d(&[1])[0], 0.0);
        let pinned = d(&[3]);
        assert_eq!(pinned[1], pinned[2]);
        assert_eq!(d(&[6])[4], TAU);
        let pinned = d(&[5, 6]);
        assert_eq!((pinned[3], pinned[4]), (TAU, TAU));
        let pinned = d(&[1, 2]);
        assert_eq!((pinned[0], pinned[1]), (0.0, 0.0));
        assert!(pin_to_cone(&x, &[]).is_err());
        assert!(pin_to_cone(&x, &[7]).is_err());
        assert!(pin_to_cone(&x, &[1, 2, 3, 4, 5]).is_err());
        let c = ClusterState::from_reduced(&pin_to_cone(&x, &[1, 6]).unwrap(), 0.0, 0.0).unwrap();
        assert_eq!(c.mults(), vec![3, 1, 1, 1]);
    }

    #[test]
    fn small_contraction_sweeps() {
        let opts = ContractionOptions {
            horizon: 5.0,
            ..Default::default()
        };
        let r = contraction_sweep(&model(1), 4, 1, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Contracting);
        assert!(r.violations.is_empty());
        let r = contraction_sweep(&model(-1), 4, 1, &opts).unwrap();
        assert_eq!(r.predicted, Verdict::Expanding);
        assert_eq!(r.verdict, Verdict::Expanding);
    }

    #[test]
    fn sweep_reports_are_independent_of_jobs() {
        let base = ContractionOptions {
            horizon: 1.0,
            ..Default::default()
        };
        let one = contraction_sweep(&model(1), 3, 9, &base).unwrap();
        let three = contraction_sweep(
            &model(1),
            3,
            9,
            &ContractionOptions {
                jobs: 3,
                ..base.clone()
            },
        )
        .unwrap();
        assert_eq!(one.pairs, three.pairs);
    }

    #[test]
    fn sweeps_refuse_unclassified_models() {
        let g = CouplingFunction::from_fn("sin", f64::sin);
        let p = ModelParams::unclassified(g, 1.0, 4).unwrap();
        assert!(contraction_sweep(&p, 1, 0, &ContractionOptions::default()).is_err());
        assert!(behavior_sweep(&p, 1, 0, &BehaviorOptions::default()).is_err());
    }

    #[test]
    fn two_oscillators_at_splay_converge_immediately() {
        let p = ModelParams::new(CouplingFunction::expfam(1, 0.1, 2).unwrap(), 1.0, 2).unwrap();
        let traj = simulate(&SimConfig::new(
            p,
            InitialState::Reduced(ReducedState::new(vec![std::f64::consts::PI]).unwrap()),
        ))
        .unwrap();
        assert_eq!(traj.terminal, Terminal::SplayConverged { t: 0.0 });
    }
}
