//! Fixed-step RK4 integration of the cluster dynamics with synchronization
//! events.
//!
//! Inside the open cone the field is smooth, so a classical RK4 step is
//! used. When a step would bring two neighbouring clusters closer than
//! `sync_eps` (or swap them) in any of its stages, the contact time is located by bisection on the
//! step length and the clusters are merged at their multiplicity-weighted
//! circular mean. Once merged, clusters stay merged.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dynamics::{cluster_field_into, reduced_vector_field, ModelParams};
use crate::error::{param, Error, Result};
use crate::state::{
    circular_mean, min_gap, splay_state, AbsoluteState, ClusterState, ReducedState,
};

pub const DEFAULT_SYNC_EPS: f64 = 1e-8;
pub const DEFAULT_SPLAY_TOL: f64 = 1e-6;
pub const MAX_BISECTION_ITERS: usize = 200;

/// Where a simulation starts.
#[derive(Debug, Clone)]
pub enum InitialState {
    Absolute(AbsoluteState),
    /// Differences relative to oscillator 1, which is placed at phase 0.
    Reduced(ReducedState),
    Clusters(ClusterState),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ModelParams,
    pub initial: InitialState,
    pub dt: f64,
    pub t_end: f64,
    pub sync_eps: f64,
    /// Steps between recorded samples. Event and terminal states are always
    /// recorded in addition.
    pub record_every: usize,
    pub splay_tol: f64,
}

impl SimConfig {
    pub fn new(params: ModelParams, initial: InitialState) -> Self {
        SimConfig {
            params,
            initial,
            dt: 1e-3,
            t_end: 500.0,
            sync_eps: DEFAULT_SYNC_EPS,
            record_every: 100,
            splay_tol: DEFAULT_SPLAY_TOL,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(param(
                "dt",
                format!("must be positive and finite, got {}", self.dt),
            ));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(param(
                "t_end",
                format!("must be positive and finite, got {}", self.t_end),
            ));
        }
        if !(self.sync_eps.is_finite() && self.sync_eps >= 0.0) {
            return Err(param(
                "sync_eps",
                format!("must be non-negative, got {}", self.sync_eps),
            ));
        }
        if self.record_every == 0 {
            return Err(param("record_every", "must be positive"));
        }
        if !(self.splay_tol.is_finite() && self.splay_tol > 0.0) {
            return Err(param(
                "splay_tol",
                format!("must be positive, got {}", self.splay_tol),
            ));
        }
        Ok(())
    }
}

/// A merge of two or more clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncEvent {
    pub t: f64,
    /// Labels of the clusters that merged (smallest 1-based oscillator id in
    /// each), ascending.
    pub merged_ids: Vec<usize>,
    /// Multiplicity of the resulting cluster.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    Horizon,
    FullSync { t: f64 },
    SplayConverged { t: f64 },
}

impl Terminal {
    pub fn label(&self) -> &'static str {
        match self {
            Terminal::Horizon => "horizon",
            Terminal::FullSync { .. } => "full_sync",
            Terminal::SplayConverged { .. } => "splay_converged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: ClusterState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<SyncEvent>,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn initial(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory has at least one sample")
    }
}

/// Reusable RK4 buffers for one cluster configuration.
pub(crate) struct Rk4 {
    mults: Vec<f64>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    /// Smallest value of each circular gap over the stage states and the
    /// result of the last step.
    stage_gaps: Vec<f64>,
}

impl Rk4 {
    pub(crate) fn new(mults: &[usize]) -> Self {
        let m = mults.len();
        Rk4 {
            mults: mults.iter().map(|&x| x as f64).collect(),
            k: std::array::from_fn(|_| vec![0.0; m]),
            tmp: vec![0.0; m],
            stage_gaps: vec![f64::INFINITY; if m > 1 { m } else { 0 }],
        }
    }

    /// Gaps seen during the last step. A step whose stages close a gap
    /// straddles the jump of Γ at 0 and is not a smooth RK4 step.
    pub(crate) fn stage_gaps(&self) -> &[f64] {
        &self.stage_gaps
    }

    pub(crate) fn stage_min_gap(&self) -> f64 {
        self.stage_gaps
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn step(&mut self, p: &ModelParams, reps: &[f64], h: f64, out: &mut [f64]) {
        let Rk4 {
            mults,
            k,
            tmp,
            stage_gaps,
        } = self;
        let [k1, k2, k3, k4] = k;
        stage_gaps.iter_mut().for_each(|g| *g = f64::INFINITY);
        cluster_field_into(p, reps, mults, k1);
        for i in 0..reps.len() {
            tmp[i] = reps[i] + 0.5 * h * k1[i];
        }
        note_gaps(stage_gaps, tmp);
        cluster_field_into(p, tmp, mults, k2);
        for i in 0..reps.len() {
            tmp[i] = reps[i] + 0.5 * h * k2[i];
        }
        note_gaps(stage_gaps, tmp);
        cluster_field_into(p, tmp, mults, k3);
        for i in 0..reps.len() {
            tmp[i] = reps[i] + h * k3[i];
        }
        note_gaps(stage_gaps, tmp);
        cluster_field_into(p, tmp, mults, k4);
        for i in 0..reps.len() {
            out[i] = reps[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        note_gaps(stage_gaps, out);
    }
}

fn note_gaps(gaps: &mut [f64], reps: &[f64]) {
    let m = gaps.len();
    if m == 0 {
        return;
    }
    for i in 0..m - 1 {
        gaps[i] = gaps[i].min(reps[i + 1] - reps[i]);
    }
    gaps[m - 1] = gaps[m - 1].min(reps[0] + TAU - reps[m - 1]);
}

/// Shifts all representatives by a whole number of turns so the anchor stays
/// in [0, 2π). Keeps long runs from losing precision in the differences.
pub(crate) fn renormalize(reps: &mut [f64]) {
    if reps[0] >= TAU || reps[0] < 0.0 {
        let turns = (reps[0] / TAU).floor() * TAU;
        for r in reps.iter_mut() {
            *r -= turns;
        }
    }
}

/// One classical RK4 step of the cluster dynamics. Boundary crossings are
/// not checked here; [`simulate`] handles them.
pub fn step(p: &ModelParams, c: &ClusterState, dt: f64) -> ClusterState {
    let mut out = vec![0.0; c.m()];
    Rk4::new(&c.mults()).step(p, c.reps(), dt, &mut out);
    ClusterState::from_parts_unchecked(out, c.members().to_vec())
}

/// Merges every pair of circular neighbours closer than `eps`, transitively.
/// Returns the new state and the labels of the merged groups (one entry per
/// group that actually merged).
fn merge_close(c: ClusterState, eps: f64) -> (ClusterState, Vec<(Vec<usize>, usize)>) {
    let joined: Vec<bool> = c.gaps().iter().map(|&g| g < eps).collect();
    merge_joined(c, &joined)
}

/// Merges the runs of clusters whose circular gaps are flagged in `joined`.
/// A run may wrap past the last cluster onto the anchor.
fn merge_joined(c: ClusterState, joined: &[bool]) -> (ClusterState, Vec<(Vec<usize>, usize)>) {
    let m = c.m();
    if m < 2 || !joined.contains(&true) {
        return (c, Vec::new());
    }
    let labels = c.cluster_ids();
    let (reps, members) = c.into_parts();
    if joined.iter().all(|&j| j) {
        let points: Vec<(f64, f64)> = reps
            .iter()
            .zip(&members)
            .map(|(&r, ids)| (r, ids.len() as f64))
            .collect();
        let mut ids: Vec<usize> = members.into_iter().flatten().collect();
        ids.sort_unstable();
        let n = ids.len();
        let mut merged = labels;
        merged.sort_unstable();
        return (
            ClusterState::from_parts_unchecked(vec![circular_mean(&points)], vec![ids]),
            vec![(merged, n)],
        );
    }
    // Start scanning just after a gap that is not joined so no run is split.
    let start = (0..m).find(|&i| !joined[i]).unwrap() + 1;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    for step in 0..m {
        let i = (start + step) % m;
        current.push(i);
        if !joined[i] {
            groups.push(std::mem::take(&mut current));
        }
    }

    let mut out: Vec<(f64, Vec<usize>, Vec<usize>)> = Vec::with_capacity(groups.len());
    let mut events = Vec::new();
    for g in groups {
        // unwrap phases so the run is contiguous on the real line
        let base = reps[g[0]];
        let points: Vec<(f64, f64)> = g
            .iter()
            .map(|&i| {
                let mut r = reps[i];
                while r < base - 1.0 {
                    r += TAU;
                }
                (r, members[i].len() as f64)
            })
            .collect();
        let mut ids: Vec<usize> = g.iter().flat_map(|&i| members[i].iter().copied()).collect();
        ids.sort_unstable();
        let mut lab: Vec<usize> = g.iter().map(|&i| labels[i]).collect();
        lab.sort_unstable();
        if g.len() > 1 {
            events.push((lab.clone(), ids.len()));
        }
        out.push((circular_mean(&points), ids, lab));
    }
    // Restore the anchor-first ordering: the group holding oscillator 1 goes
    // first, with its representative as the reference turn.
    let anchor = out.iter().position(|(_, ids, _)| ids[0] == 0).unwrap();
    out.rotate_left(anchor);
    let old_anchor = reps[0];
    let a = out[0].0 - ((out[0].0 - old_anchor) / TAU).round() * TAU;
    out[0].0 = a;
    let mut reps = Vec::with_capacity(out.len());
    let mut members = Vec::with_capacity(out.len());
    for (r, ids, _) in out {
        let mut r = r;
        while r < a {
            r += TAU;
        }
        while r >= a + TAU {
            r -= TAU;
        }
        reps.push(r);
        members.push(ids);
    }
    (ClusterState::from_parts_unchecked(reps, members), events)
}

fn is_finite(reps: &[f64]) -> bool {
    reps.iter().all(|r| r.is_finite())
}

fn splay_deviation(c: &ClusterState, splay: &ReducedState) -> Option<f64> {
    if c.m() != c.n() {
        return None;
    }
    c.to_reduced().max_deviation(splay).ok()
}

fn record_event(events: &mut Vec<SyncEvent>, t: f64, groups: Vec<(Vec<usize>, usize)>) {
    // One pass can close several distinct groups; each is its own event.
    for (merged_ids, multiplicity) in groups {
        events.push(SyncEvent {
            t,
            merged_ids,
            multiplicity,
        });
    }
}

/// Integrates until the horizon, full synchronization, or convergence to
/// the splay state.
pub fn simulate(cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let p = &cfg.params;
    let n = p.n();
    let initial = match &cfg.initial {
        InitialState::Absolute(s) => ClusterState::from_absolute(s, 0.0)?,
        InitialState::Reduced(r) => ClusterState::from_reduced(r, 0.0, 0.0)?,
        InitialState::Clusters(c) => c.clone(),
    };
    if initial.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: initial.n(),
        });
    }
    let splay = splay_state(n)?;
    let mut events = Vec::new();
    let mut samples = Vec::new();

    let mut t = 0.0;
    let mut state = initial;
    let (merged, groups) = merge_until_stable(state, &[], cfg.sync_eps);
    state = merged;
    record_event(&mut events, t, groups);
    samples.push(Sample {
        t,
        state: state.clone(),
    });

    let terminal_now = |c: &ClusterState, t: f64| -> Option<Terminal> {
        if c.m() == 1 {
            Some(Terminal::FullSync { t })
        } else if splay_deviation(c, &splay).is_some_and(|d| d < cfg.splay_tol) {
            Some(Terminal::SplayConverged { t })
        } else {
            None
        }
    };
    if let Some(term) = terminal_now(&state, t) {
        return Ok(Trajectory {
            samples,
            events,
            terminal: term,
        });
    }

    let mut rk = Rk4::new(&state.mults());
    let mut proposal = vec![0.0; state.m()];
    let mut steps = 0usize;
    let terminal = loop {
        let h = (cfg.t_end - t).min(cfg.dt);
        if h <= cfg.t_end * 1e-14 {
            break Terminal::Horizon;
        }
        rk.step(p, state.reps(), h, &mut proposal);
        if !is_finite(&proposal) {
            return Err(Error::NumericalDivergence { t });
        }
        steps += 1;

        if rk.stage_min_gap() < cfg.sync_eps {
            let (tau, reps, joined) =
                locate_contact(p, &mut rk, state.reps(), h, cfg.sync_eps, &proposal);
            t += tau;
            let crossed = ClusterState::from_parts_unchecked(reps, state.members().to_vec());
            let (merged, groups) = merge_until_stable(crossed, &joined, cfg.sync_eps);
            state = merged;
            record_event(&mut events, t, groups);
            rk = Rk4::new(&state.mults());
            proposal = vec![0.0; state.m()];
            samples.push(Sample {
                t,
                state: state.clone(),
            });
        } else {
            t += h;
            state.reps_mut().copy_from_slice(&proposal);
            renormalize(state.reps_mut());
            if steps.is_multiple_of(cfg.record_every) {
                samples.push(Sample {
                    t,
                    state: state.clone(),
                });
            }
        }

        if let Some(term) = terminal_now(&state, t) {
            break term;
        }
    };
    if samples.last().map(|s| s.t) != Some(t) {
        samples.push(Sample { t, state });
    }
    Ok(Trajectory {
        samples,
        events,
        terminal,
    })
}

/// Merges the flagged gaps, then neighbours closer than `eps` until none
/// are left.
fn merge_until_stable(
    c: ClusterState,
    joined: &[bool],
    eps: f64,
) -> (ClusterState, Vec<(Vec<usize>, usize)>) {
    let mut all: Vec<(Vec<usize>, usize)> = Vec::new();
    let (mut c, mut groups) = merge_joined(c, joined);
    loop {
        if groups.is_empty() {
            let (next, g) = merge_close(c, eps);
            c = next;
            if g.is_empty() {
                break;
            }
            groups = g;
        }
        // A later pass may swallow a group formed by an earlier one (it then
        // appears under its smallest label); fold those into one record.
        for (mut lab, mult) in std::mem::take(&mut groups) {
            let mut k = 0;
            while k < all.len() {
                if lab.contains(&all[k].0[0]) {
                    lab.extend(all.remove(k).0);
                } else {
                    k += 1;
                }
            }
            lab.sort_unstable();
            lab.dedup();
            all.push((lab, mult));
        }
    }
    (c, all)
}

/// Bisection on the step length for the first time the smallest gap, over
/// the stages and the result of the step, drops below `eps`. Stops once the
/// gap changes by at most eps/10 across the bracket (or after
/// [`MAX_BISECTION_ITERS`]). Returns the step length and state at the upper
/// end of the bracket together with the gaps that closed there. Expects `rk`
/// to hold the stage gaps of the full step that produced `proposal`.
fn locate_contact(
    p: &ModelParams,
    rk: &mut Rk4,
    reps: &[f64],
    h: f64,
    eps: f64,
    proposal: &[f64],
) -> (f64, Vec<f64>, Vec<bool>) {
    let (mut lo, mut hi) = (0.0, h);
    let mut g_lo = min_gap(reps);
    let mut hi_state = proposal.to_vec();
    let mut g_hi = rk.stage_min_gap();
    let mut hi_joined: Vec<bool> = rk.stage_gaps().iter().map(|&g| g < eps).collect();
    let mut mid_state = vec![0.0; reps.len()];
    for _ in 0..MAX_BISECTION_ITERS {
        if g_hi >= 0.0 && g_lo - g_hi <= eps / 10.0 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        rk.step(p, reps, mid, &mut mid_state);
        let g_mid = rk.stage_min_gap();
        if g_mid < eps {
            hi = mid;
            g_hi = g_mid;
            hi_state.copy_from_slice(&mid_state);
            hi_joined
                .iter_mut()
                .zip(rk.stage_gaps())
                .for_each(|(j, &g)| *j = g < eps);
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    (hi, hi_state, hi_joined)
}

/// Probes the reduced field next to the three kinds of cone boundary,
/// starting from the splay state:
///
/// 0. θ̃_1 = eps, returning θ̃̇_1;
/// 1. a middle pair with θ̃_{k+1} − θ̃_k = eps, returning θ̃̇_{k+1} − θ̃̇_k;
/// 2. θ̃_{N−1} = 2π − eps, returning θ̃̇_{N−1}.
///
/// Each approaches ±(Γ(0⁺) − Γ(2π⁻)) as eps → 0. Needs N ≥ 3 and
/// eps < 2π/N.
pub fn boundary_velocity_probe(p: &ModelParams, eps: f64) -> Result<[f64; 3]> {
    let n = p.n();
    if n < 3 {
        return Err(param(
            "N",
            "the interior-pair probe needs at least 3 oscillators",
        ));
    }
    let spacing = TAU / n as f64;
    if !(eps > 0.0 && eps < spacing) {
        return Err(param(
            "eps",
            format!("must lie in (0, 2π/N) = (0, {spacing}), got {eps}"),
        ));
    }
    let base = splay_state(n)?.diffs().to_vec();

    let mut low = base.clone();
    low[0] = eps;
    let v_low = reduced_vector_field(p, &ReducedState::new(low)?)?[0];

    let k = (n - 1) / 2 - 1;
    let mut pair = base.clone();
    pair[k + 1] = pair[k] + eps;
    let v = reduced_vector_field(p, &ReducedState::new(pair)?)?;
    let v_pair = v[k + 1] - v[k];

    let mut high = base;
    high[n - 2] = TAU - eps;
    let v_high = reduced_vector_field(p, &ReducedState::new(high)?)?[n - 2];

    Ok([v_low, v_pair, v_high])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::CouplingFunction;
    use crate::dynamics::cluster_vector_field;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn model(s: i32, n: usize) -> ModelParams {
        ModelParams::new(CouplingFunction::expfam(s, 0.1, n).unwrap(), 1.0, n).unwrap()
    }

    fn random_clusters(rng: &mut ChaCha8Rng, n: usize) -> ClusterState {
        let mut v: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.1..TAU - 0.1)).collect();
        v.sort_by(f64::total_cmp);
        ClusterState::from_reduced(&ReducedState::new(v).unwrap(), 0.0, 1e-6).unwrap()
    }

    #[test]
    fn uncoupled_step_is_exact() {
        let g = CouplingFunction::tabulated(&[[1.0, 0.0], [2.0, 0.0]]).unwrap();
        let p = ModelParams::unclassified(g, 1.0, 3).unwrap();
        let c = ClusterState::new(vec![0.0, 1.0, 2.0], &[1, 1, 1]).unwrap();
        let next = step(&p, &c, 0.1);
        for (a, b) in next.reps().iter().zip(c.reps()) {
            assert_relative_eq!(a - b, 0.1, epsilon = 1e-15);
        }
    }

    #[test]
    fn splay_advances_rigidly() {
        let p = model(1, 10);
        let c = ClusterState::from_reduced(&splay_state(10).unwrap(), 0.0, 0.0).unwrap();
        let v = cluster_vector_field(&p, &c).unwrap()[0];
        let next = step(&p, &c, 0.01);
        for (a, b) in next.reps().iter().zip(c.reps()) {
            assert_relative_eq!(a - b, v * 0.01, epsilon = 1e-14);
        }
        assert!(next.to_reduced().max_deviation(&c.to_reduced()).unwrap() < 1e-14);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let p = model(-1, 10);
        let c = random_clusters(&mut rng, 10);
        let dt = 0.4;
        let mut reference = c.clone();
        for _ in 0..100 {
            reference = step(&p, &reference, dt / 100.0);
        }
        let err = |s: &ClusterState| {
            s.reps()
                .iter()
                .zip(reference.reps())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let e1 = err(&step(&p, &c, dt));
        let e2 = err(&step(&p, &step(&p, &c, dt / 2.0), dt / 2.0));
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn two_oscillators_at_splay_stay_put() {
        for s in [1, -1] {
            let p = model(s, 2);
            let mut cfg = SimConfig::new(
                p,
                InitialState::Reduced(ReducedState::new(vec![PI]).unwrap()),
            );
            cfg.t_end = 5.0;
            let traj = simulate(&cfg).unwrap();
            assert_eq!(traj.terminal, Terminal::SplayConverged { t: 0.0 });
            assert!(traj.events.is_empty());
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = SimConfig::new(
            model(1, 2),
            InitialState::Reduced(ReducedState::new(vec![1.0]).unwrap()),
        );
        cfg.dt = 0.0;
        assert!(matches!(
            simulate(&cfg),
            Err(Error::Parameter { name: "dt", .. })
        ));
        cfg.dt = 1e-3;
        cfg.record_every = 0;
        assert!(matches!(
            simulate(&cfg),
            Err(Error::Parameter {
                name: "record_every",
                ..
            })
        ));
    }

    #[test]
    fn increasing_coupling_synchronizes_small_network() {
        let p = model(-1, 4);
        let init = ReducedState::new(vec![0.5, 2.0, 4.5]).unwrap();
        let mut cfg = SimConfig::new(p.clone(), InitialState::Reduced(init));
        cfg.t_end = 400.0;
        let traj = simulate(&cfg).unwrap();
        let Terminal::FullSync { t } = traj.terminal else {
            panic!("expected full sync, got {:?}", traj.terminal);
        };
        assert!(t > 0.0 && t < cfg.t_end);
        assert!(!traj.events.is_empty() && traj.events.len() <= 3);
        assert!(traj.events.windows(2).all(|w| w[0].t <= w[1].t));
        assert_eq!(traj.events.last().unwrap().multiplicity, 4);
        let last = &traj.last().state;
        let v = cluster_vector_field(&p, last).unwrap();
        assert_relative_eq!(v[0], 1.0 + 3.0 * p.gamma().value_at_zero(), epsilon = 1e-15);
        // cluster count never grows
        let counts: Vec<usize> = traj.samples.iter().map(|s| s.state.m()).collect();
        assert!(counts.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn merge_wraps_onto_anchor() {
        let c = ClusterState::new(vec![0.0, 2.0, TAU - 1e-9], &[1, 2, 1]).unwrap();
        let (m, groups) = merge_close(c, 1e-8);
        assert_eq!(m.m(), 2);
        assert_eq!(m.members()[0], vec![0, 3]);
        assert_eq!(groups, vec![(vec![1, 4], 2)]);
        assert!(m.reps()[0] < 0.0);
        assert!(m.gaps().iter().all(|&g| g > 0.0));
    }

    #[test]
    fn multiway_merge_is_one_group() {
        let c = ClusterState::new(
            vec![0.0, 1.0, 1.0 + 5e-9, 1.0 + 1e-8, 3.0],
            &[1, 1, 1, 1, 1],
        )
        .unwrap();
        let (m, groups) = merge_until_stable(c, &[], 1e-8);
        assert_eq!(m.mults(), vec![1, 3, 1]);
        assert_eq!(groups, vec![(vec![2, 3, 4], 3)]);
        // weighted mean of the three
        assert_relative_eq!(m.reps()[1], 1.0 + 5e-9, epsilon = 1e-15);
    }

    #[test]
    fn probe_matches_jump() {
        let p = model(1, 10);
        let d = (1.0 - (-TAU).exp()) / 10.0;
        let [a, b, c] = boundary_velocity_probe(&p, 1e-4).unwrap();
        assert!((a - d).abs() < 1e-3 && (b - d).abs() < 1e-3 && (c + d).abs() < 1e-3);
        let [a, b, c] = boundary_velocity_probe(&model(-1, 10), 1e-4).unwrap();
        assert!(a < 0.0 && b < 0.0 && c > 0.0);
        assert!(boundary_velocity_probe(&p, 1.0).is_err());
        assert!(boundary_velocity_probe(&model(1, 2), 1e-4).is_err());
    }
}
