//! State representations and the total-variation metric.
//!
//! Three views of a network configuration are used:
//!
//! * [`AbsoluteState`]: one phase per oscillator, in [0, 2π).
//! * [`ReducedState`]: the N−1 sorted phase differences relative to
//!   oscillator 1, living in the closed cone 0 ≤ θ̃_1 ≤ … ≤ θ̃_{N−1} ≤ 2π.
//! * [`ClusterState`]: synchronized groups, each with one representative
//!   phase and the list of oscillators it contains.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::coupling::wrap_phase;
use crate::error::{param, Error, Result};

/// Default cone-membership threshold for simulation contexts (radians).
pub const DEFAULT_CONE_EPS: f64 = 1e-9;

/// Phases of all N oscillators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsoluteState {
    phases: Vec<f64>,
}

impl AbsoluteState {
    /// Builds a state from arbitrary finite phases, wrapping each into [0, 2π).
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.len() < 2 {
            return Err(param(
                "phases",
                format!("need at least 2 oscillators, got {}", phases.len()),
            ));
        }
        if let Some(i) = phases.iter().position(|p| !p.is_finite()) {
            return Err(param(
                "phases",
                format!("phase of oscillator {} is not finite", i + 1),
            ));
        }
        let phases = phases
            .into_iter()
            .map(|p| {
                let w = wrap_phase(p);
                if w >= TAU {
                    0.0
                } else {
                    w
                }
            })
            .collect();
        Ok(AbsoluteState { phases })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn n(&self) -> usize {
        self.phases.len()
    }

    /// Rotates into the frame of oscillator 1 and sorts the differences.
    pub fn reduce(&self) -> ReducedState {
        let anchor = self.phases[0];
        let mut diffs: Vec<f64> = self.phases[1..]
            .iter()
            .map(|&p| wrap_phase(p - anchor).min(TAU))
            .collect();
        diffs.sort_by(f64::total_cmp);
        ReducedState { diffs }
    }
}

/// Sorted phase differences θ̃_k = θ_{k+1} − θ_1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReducedState {
    diffs: Vec<f64>,
}

impl ReducedState {
    /// Validates ordering and range; entries must satisfy
    /// 0 ≤ θ̃_1 ≤ … ≤ θ̃_{N−1} ≤ 2π.
    pub fn new(diffs: Vec<f64>) -> Result<Self> {
        if diffs.is_empty() {
            return Err(param("diffs", "need at least one phase difference"));
        }
        for (i, &d) in diffs.iter().enumerate() {
            if !(d.is_finite() && (0.0..=TAU).contains(&d)) {
                return Err(param(
                    "diffs",
                    format!("entry {} = {d} outside [0, 2π]", i + 1),
                ));
            }
            if i > 0 && d < diffs[i - 1] {
                return Err(param(
                    "diffs",
                    format!("entries {} and {} are out of order", i, i + 1),
                ));
            }
        }
        Ok(ReducedState { diffs })
    }

    pub fn diffs(&self) -> &[f64] {
        &self.diffs
    }

    /// Population size N (one more than the number of differences).
    pub fn n(&self) -> usize {
        self.diffs.len() + 1
    }

    /// Absolute state with oscillator 1 at `anchor` and oscillator k+1 at
    /// `anchor + θ̃_k`.
    pub fn to_absolute(&self, anchor: f64) -> Result<AbsoluteState> {
        let mut phases = Vec::with_capacity(self.n());
        phases.push(anchor);
        phases.extend(self.diffs.iter().map(|d| anchor + d));
        AbsoluteState::new(phases)
    }

    /// Largest componentwise deviation from `other`.
    pub fn max_deviation(&self, other: &ReducedState) -> Result<f64> {
        check_dims(self, other)?;
        Ok(self
            .diffs
            .iter()
            .zip(&other.diffs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// The equispaced configuration θ̃*_k = 2πk/N.
pub fn splay_state(n: usize) -> Result<ReducedState> {
    if n < 2 {
        return Err(param("N", format!("must be at least 2, got {n}")));
    }
    Ok(ReducedState {
        diffs: (1..n).map(|k| k as f64 * TAU / n as f64).collect(),
    })
}

fn check_dims(x: &ReducedState, y: &ReducedState) -> Result<()> {
    if x.diffs.len() != y.diffs.len() {
        return Err(Error::DimensionMismatch {
            expected: x.diffs.len(),
            actual: y.diffs.len(),
        });
    }
    Ok(())
}

/// Componentwise difference x − y.
pub fn difference(x: &ReducedState, y: &ReducedState) -> Result<Vec<f64>> {
    check_dims(x, y)?;
    Ok(x.diffs.iter().zip(&y.diffs).map(|(a, b)| a - b).collect())
}

/// Total variation of the piecewise-linear path 0 → d_1 → … → d_n → 0.
pub fn tv_norm(d: &[f64]) -> f64 {
    let (Some(first), Some(last)) = (d.first(), d.last()) else {
        return 0.0;
    };
    first.abs() + d.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() + last.abs()
}

/// Distance ‖x − y‖₍₁₎ between two reduced states.
pub fn tv_distance(x: &ReducedState, y: &ReducedState) -> Result<f64> {
    Ok(tv_norm(&difference(x, y)?))
}

/// Whether a critical index is a local minimum or maximum of the difference
/// sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    /// Sign applied to the difference at this index in the alternating sum:
    /// −1 at a minimum, +1 at a maximum.
    pub fn sign(self) -> f64 {
        match self {
            Extremum::Min => -1.0,
            Extremum::Max => 1.0,
        }
    }
}

/// Indices where the difference sequence (0, d_1, …, d_n, 0) changes direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    /// 1-based indices into the difference vector, strictly increasing.
    indices: Vec<usize>,
    kinds: Vec<Extremum>,
}

impl CriticalSet {
    /// Sign-change decomposition of a difference vector.
    ///
    /// Zero increments extend a plateau; a plateau at an extremum is
    /// represented by its smallest index. Fails with
    /// [`Error::EmptyDecomposition`] when `d` is identically zero.
    pub fn from_differences(d: &[f64]) -> Result<Self> {
        let mut indices = Vec::new();
        let mut kinds = Vec::new();
        // (sign of the last non-zero increment, index where it ended)
        let mut last: Option<(bool, usize)> = None;
        let mut prev = 0.0;
        for j in 1..=d.len() + 1 {
            let cur = if j <= d.len() { d[j - 1] } else { 0.0 };
            let inc = cur - prev;
            prev = cur;
            if inc == 0.0 {
                continue;
            }
            let rising = inc > 0.0;
            if let Some((was_rising, end)) = last {
                if was_rising != rising {
                    indices.push(end);
                    kinds.push(if was_rising {
                        Extremum::Max
                    } else {
                        Extremum::Min
                    });
                }
            }
            last = Some((rising, j));
        }
        if indices.is_empty() {
            return Err(Error::EmptyDecomposition);
        }
        Ok(CriticalSet { indices, kinds })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn kinds(&self) -> &[Extremum] {
        &self.kinds
    }

    /// Number of critical oscillators N_c.
    pub fn n_c(&self) -> usize {
        self.indices.len()
    }

    pub fn first_kind(&self) -> Extremum {
        self.kinds[0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Extremum)> + '_ {
        self.indices.iter().copied().zip(self.kinds.iter().copied())
    }

    /// Σ_k σ_k d_{K(k)} with σ = −1 at minima and +1 at maxima. Half the
    /// total variation of `d` when `self` is its decomposition.
    pub fn alternating_sum(&self, d: &[f64]) -> Result<f64> {
        self.check_against(d)?;
        Ok(self.iter().map(|(i, k)| k.sign() * d[i - 1]).sum())
    }

    fn check_against(&self, d: &[f64]) -> Result<()> {
        if self.indices.last().is_some_and(|&i| i > d.len()) {
            return Err(Error::InconsistentCriticalSet(format!(
                "index {} exceeds dimension {}",
                self.indices.last().unwrap(),
                d.len()
            )));
        }
        let value = |i: usize| d[i - 1];
        for (w, kinds) in self.indices.windows(2).zip(self.kinds.windows(2)) {
            if kinds[0] == kinds[1] {
                return Err(Error::InconsistentCriticalSet(
                    "extremum kinds do not alternate".into(),
                ));
            }
            let ok = match kinds[0] {
                Extremum::Min => value(w[0]) < value(w[1]),
                Extremum::Max => value(w[0]) > value(w[1]),
            };
            if !ok {
                return Err(Error::InconsistentCriticalSet(format!(
                    "values at indices {} and {} contradict their kinds",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Critical-oscillator decomposition of x − y.
pub fn critical_decomposition(x: &ReducedState, y: &ReducedState) -> Result<CriticalSet> {
    CriticalSet::from_differences(&difference(x, y)?)
}

/// Σ_k σ_k (x − y)_{K(k)}; satisfies `tv_distance(x, y) = 2 · alternating_sum`.
pub fn alternating_sum(x: &ReducedState, y: &ReducedState, cs: &CriticalSet) -> Result<f64> {
    cs.alternating_sum(&difference(x, y)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Interior,
    Boundary,
}

/// Where a reduced state sits relative to the open cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeLocation {
    pub kind: ConeKind,
    /// Indices i ∈ {1..N} with θ̃_{i−1} = θ̃_i up to `eps`, where θ̃_0 = 0 and
    /// θ̃_N = 2π.
    pub active_constraints: Vec<usize>,
}

impl ConeLocation {
    pub fn is_interior(&self) -> bool {
        self.kind == ConeKind::Interior
    }
}

/// Interior when every gap 0 → θ̃_1 → … → θ̃_{N−1} → 2π exceeds `eps`.
pub fn cone_location(x: &ReducedState, eps: f64) -> ConeLocation {
    let n = x.n();
    let active: Vec<usize> = (1..=n)
        .filter(|&i| {
            let lower = if i == 1 { 0.0 } else { x.diffs[i - 2] };
            let upper = if i == n { TAU } else { x.diffs[i - 1] };
            upper - lower <= eps
        })
        .collect();
    ConeLocation {
        kind: if active.is_empty() {
            ConeKind::Interior
        } else {
            ConeKind::Boundary
        },
        active_constraints: active,
    }
}

/// Synchronized groups of oscillators.
///
/// Representatives are unwrapped absolute phases. Cluster 0 always holds
/// oscillator 1 (id 0) and the others follow in increasing phase within one
/// turn: `reps[0] < reps[1] < … < reps[M−1] < reps[0] + 2π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterState {
    reps: Vec<f64>,
    members: Vec<Vec<usize>>,
}

impl ClusterState {
    /// Clusters with the given multiplicities; oscillator ids are assigned
    /// consecutively in cluster order.
    pub fn new(reps: Vec<f64>, mults: &[usize]) -> Result<Self> {
        if reps.len() != mults.len() {
            return Err(Error::DimensionMismatch {
                expected: reps.len(),
                actual: mults.len(),
            });
        }
        if mults.contains(&0) {
            return Err(param("mults", "multiplicities must be positive"));
        }
        let mut next = 0;
        let members = mults
            .iter()
            .map(|&m| {
                let ids = (next..next + m).collect();
                next += m;
                ids
            })
            .collect();
        Self::with_members(reps, members)
    }

    /// Clusters with explicit 0-based oscillator ids.
    pub fn with_members(reps: Vec<f64>, members: Vec<Vec<usize>>) -> Result<Self> {
        let state = ClusterState { reps, members };
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_parts_unchecked(reps: Vec<f64>, members: Vec<Vec<usize>>) -> Self {
        ClusterState { reps, members }
    }

    fn validate(&self) -> Result<()> {
        let m = self.reps.len();
        if m == 0 {
            return Err(param("reps", "need at least one cluster"));
        }
        if self.members.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: self.members.len(),
            });
        }
        if self.reps.iter().any(|r| !r.is_finite()) {
            return Err(param("reps", "representative phases must be finite"));
        }
        let n: usize = self.members.iter().map(Vec::len).sum();
        let mut seen = vec![false; n];
        for ids in &self.members {
            if ids.is_empty() {
                return Err(param("mults", "multiplicities must be positive"));
            }
            for &id in ids {
                if id >= n || std::mem::replace(&mut seen[id], true) {
                    return Err(param("members", "oscillator ids must partition 0..N"));
                }
            }
        }
        if !self.members[0].contains(&0) {
            return Err(param("members", "cluster 0 must contain oscillator 1"));
        }
        if n < 2 {
            return Err(param("mults", "need at least 2 oscillators"));
        }
        if let Some(g) = self.gaps().into_iter().position(|g| g <= 0.0) {
            return Err(param(
                "reps",
                format!("representatives not strictly ordered at gap {g}"),
            ));
        }
        Ok(())
    }

    /// Groups an absolute state: phases closer than `eps` (circularly,
    /// chained) form one cluster at their circular mean.
    pub fn from_absolute(s: &AbsoluteState, eps: f64) -> Result<Self> {
        let anchor = s.phases()[0];
        let mut order: Vec<(f64, usize)> = s
            .phases()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                (
                    if i == 0 {
                        0.0
                    } else {
                        wrap_phase(p - anchor).min(TAU)
                    },
                    i,
                )
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Self::group_offsets(anchor, &order, eps)
    }

    /// Groups a reduced state, placing oscillator 1 at `anchor`. Oscillator
    /// ids 1..N−1 follow the order of the differences.
    pub fn from_reduced(x: &ReducedState, anchor: f64, eps: f64) -> Result<Self> {
        let mut order = Vec::with_capacity(x.n());
        order.push((0.0, 0));
        order.extend(x.diffs().iter().enumerate().map(|(k, &d)| (d, k + 1)));
        Self::group_offsets(anchor, &order, eps)
    }

    /// `order` holds (offset from anchor in [0, 2π], id), sorted by offset,
    /// with the anchor oscillator first.
    fn group_offsets(anchor: f64, order: &[(f64, usize)], eps: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(param("eps", "must be non-negative"));
        }
        let mut groups: Vec<Vec<(f64, usize)>> = Vec::new();
        for &(off, id) in order {
            match groups.last_mut() {
                Some(g) if off - g.last().unwrap().0 <= eps => g.push((off, id)),
                _ => groups.push(vec![(off, id)]),
            }
        }
        // Offsets within eps of 2π close the circle onto the anchor cluster.
        if groups.len() > 1 {
            let tail_close = TAU - groups.last().unwrap().last().unwrap().0 <= eps;
            if tail_close {
                let tail = groups.pop().unwrap();
                let head = &mut groups[0];
                let mut merged: Vec<(f64, usize)> =
                    tail.into_iter().map(|(o, i)| (o - TAU, i)).collect();
                merged.append(head);
                *head = merged;
            }
        }
        let mut reps = Vec::with_capacity(groups.len());
        let mut members = Vec::with_capacity(groups.len());
        for g in groups {
            let offsets: Vec<(f64, f64)> = g.iter().map(|&(o, _)| (o, 1.0)).collect();
            reps.push(anchor + circular_mean(&offsets));
            let mut ids: Vec<usize> = g.into_iter().map(|(_, i)| i).collect();
            ids.sort_unstable();
            members.push(ids);
        }
        Self::with_members(reps, members)
    }

    pub fn reps(&self) -> &[f64] {
        &self.reps
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn mults(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Number of clusters M.
    pub fn m(&self) -> usize {
        self.reps.len()
    }

    /// Population size N.
    pub fn n(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }

    /// Stable cluster labels: the smallest 1-based oscillator id in each.
    pub fn cluster_ids(&self) -> Vec<usize> {
        self.members.iter().map(|ids| ids[0] + 1).collect()
    }

    /// Circular gaps reps[c+1] − reps[c], closing with reps[0] + 2π − reps[M−1].
    /// Empty for a single cluster.
    pub fn gaps(&self) -> Vec<f64> {
        let m = self.reps.len();
        if m < 2 {
            return Vec::new();
        }
        let mut g: Vec<f64> = self.reps.windows(2).map(|w| w[1] - w[0]).collect();
        g.push(self.reps[0] + TAU - self.reps[m - 1]);
        g
    }

    pub fn min_gap(&self) -> f64 {
        min_gap(&self.reps)
    }

    /// Expands to N−1 sorted differences; members of the anchor cluster other
    /// than oscillator 1 contribute zeros.
    pub fn to_reduced(&self) -> ReducedState {
        let mut diffs = Vec::with_capacity(self.n() - 1);
        diffs.extend(std::iter::repeat_n(0.0, self.members[0].len() - 1));
        for (rep, ids) in self.reps.iter().zip(&self.members).skip(1) {
            let d = (rep - self.reps[0]).clamp(0.0, TAU);
            diffs.extend(std::iter::repeat_n(d, ids.len()));
        }
        ReducedState { diffs }
    }

    /// Per-oscillator phases wrapped into [0, 2π), indexed by oscillator id.
    pub fn phases(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (rep, ids) in self.reps.iter().zip(&self.members) {
            let w = wrap_phase(*rep);
            let w = if w >= TAU { 0.0 } else { w };
            for &id in ids {
                out[id] = w;
            }
        }
        out
    }

    pub(crate) fn reps_mut(&mut self) -> &mut [f64] {
        &mut self.reps
    }

    pub(crate) fn into_parts(self) -> (Vec<f64>, Vec<Vec<usize>>) {
        (self.reps, self.members)
    }
}

pub(crate) fn min_gap(reps: &[f64]) -> f64 {
    let m = reps.len();
    if m < 2 {
        return f64::INFINITY;
    }
    let inner = reps
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    inner.min(reps[0] + TAU - reps[m - 1])
}

/// Weighted circular mean of `(phase, weight)` pairs, expressed as the
/// nearest real to the first phase.
pub fn circular_mean(points: &[(f64, f64)]) -> f64 {
    let reference = points[0].0;
    let (mut s, mut c) = (0.0, 0.0);
    for &(p, w) in points {
        let (sin, cos) = (p - reference).sin_cos();
        s += w * sin;
        c += w * cos;
    }
    reference + s.atan2(c)
}
