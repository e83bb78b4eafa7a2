//! Vector fields of the all-to-all network and the analytic rate of change
//! of the total-variation distance between two orbits.
//!
//! All sums run over ascending oscillator (or cluster) index so results are
//! reproducible bit for bit.

use serde::{Deserialize, Serialize};

use crate::coupling::{CouplingClass, CouplingFunction, DEFAULT_CLASSIFY_SAMPLES};
use crate::error::{param, Error, Result};
use crate::state::{
    cone_location, difference, AbsoluteState, ClusterState, CriticalSet, Extremum, ReducedState,
};

/// Coupling, natural frequency and population size.
#[derive(Debug, Clone)]
pub struct ModelParams {
    gamma: CouplingFunction,
    omega: f64,
    n: usize,
    class: Option<CouplingClass>,
}

impl ModelParams {
    /// Validated model: N ≥ 2 and Γ must classify as strictly monotone with
    /// curvature of constant sign.
    pub fn new(gamma: CouplingFunction, omega: f64, n: usize) -> Result<Self> {
        let class = gamma.classify(DEFAULT_CLASSIFY_SAMPLES, None)?;
        let mut p = Self::unclassified(gamma, omega, n)?;
        p.class = Some(class);
        Ok(p)
    }

    /// Model with an arbitrary coupling (for instance Γ ≡ 0). The contraction
    /// experiments refuse such models.
    pub fn unclassified(gamma: CouplingFunction, omega: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(param("N", format!("must be at least 2, got {n}")));
        }
        if !omega.is_finite() {
            return Err(param("omega", "must be finite"));
        }
        Ok(ModelParams {
            gamma,
            omega,
            n,
            class: None,
        })
    }

    pub fn gamma(&self) -> &CouplingFunction {
        &self.gamma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn class(&self) -> Option<CouplingClass> {
        self.class
    }

    pub(crate) fn require_class(&self) -> Result<CouplingClass> {
        self.class.ok_or_else(|| {
            param(
                "gamma",
                "coupling was not classified as monotone with constant curvature",
            )
        })
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: n,
            });
        }
        Ok(())
    }
}

/// θ̇_k = ω + Σ_{j≠k} Γ(θ_k − θ_j).
pub fn full_vector_field(p: &ModelParams, s: &AbsoluteState) -> Result<Vec<f64>> {
    p.check_n(s.n())?;
    let th = s.phases();
    for k in 0..th.len() {
        if let Some(j) = (k + 1..th.len()).find(|&j| th[j] == th[k]) {
            return Err(Error::SynchronizedPair {
                first: k + 1,
                second: j + 1,
            });
        }
    }
    let g = p.gamma();
    let mut out = vec![p.omega(); th.len()];
    for k in 0..th.len() {
        for j in k + 1..th.len() {
            let (fwd, back) = g.value_pair(th[j] - th[k]);
            out[k] += back;
            out[j] += fwd;
        }
    }
    Ok(out)
}

/// Rotating-frame field
/// θ̃̇_k = Γ(θ̃_k) + Σ_{j≠k} Γ(θ̃_k − θ̃_j) − Σ_j Γ(−θ̃_j).
///
/// Defined only strictly inside the cone; boundary states must be handled as
/// clusters.
pub fn reduced_vector_field(p: &ModelParams, s: &ReducedState) -> Result<Vec<f64>> {
    p.check_n(s.n())?;
    let loc = cone_location(s, 0.0);
    if let Some(&i) = loc.active_constraints.first() {
        // constraint i couples oscillators i and i+1 in sorted order, with
        // oscillator N+1 standing for oscillator 1 again
        let second = if i == s.n() { 1 } else { i + 1 };
        return Err(Error::SynchronizedPair { first: i, second });
    }
    let mut out = vec![0.0; s.diffs().len()];
    reduced_field_into(p.gamma(), s.diffs(), &mut out);
    Ok(out)
}

pub(crate) fn reduced_field_into(g: &CouplingFunction, d: &[f64], out: &mut [f64]) {
    let common: f64 = d.iter().map(|&x| g.value(-x)).sum();
    for k in 0..d.len() {
        let mut acc = g.value(d[k]);
        for j in 0..d.len() {
            if j != k {
                acc += g.value(d[k] - d[j]);
            }
        }
        out[k] = acc - common;
    }
}

/// Representative velocities of a cluster state:
/// θ̇_c = ω + (m_c − 1)·Γ(0) + Σ_{c'≠c} m_{c'}·Γ(θ_c − θ_{c'}).
pub fn cluster_vector_field(p: &ModelParams, c: &ClusterState) -> Result<Vec<f64>> {
    p.check_n(c.n())?;
    if let Some(i) = c.gaps().iter().position(|&g| g <= 0.0) {
        let ids = c.cluster_ids();
        return Err(Error::SynchronizedPair {
            first: ids[i],
            second: ids[(i + 1) % ids.len()],
        });
    }
    let mults: Vec<f64> = c.mults().into_iter().map(|m| m as f64).collect();
    let mut out = vec![0.0; c.m()];
    cluster_field_into(p, c.reps(), &mults, &mut out);
    Ok(out)
}

#[inline]
pub(crate) fn cluster_field_into(p: &ModelParams, reps: &[f64], mults: &[f64], out: &mut [f64]) {
    let g = p.gamma();
    let g0 = g.value_at_zero();
    for c in 0..reps.len() {
        out[c] = p.omega() + (mults[c] - 1.0) * g0;
    }
    // each out[c] still accumulates its terms in ascending j
    for c in 0..reps.len() {
        for j in c + 1..reps.len() {
            let (fwd, back) = g.value_pair(reps[j] - reps[c]);
            out[c] += mults[j] * back;
            out[j] += mults[c] * fwd;
        }
    }
}

/// Velocities of the N−1 reduced coordinates of a cluster state, in the
/// order produced by [`ClusterState::to_reduced`].
pub fn cluster_reduced_velocities(p: &ModelParams, c: &ClusterState) -> Result<Vec<f64>> {
    let v = cluster_vector_field(p, c)?;
    let mut out = Vec::with_capacity(c.n() - 1);
    out.extend(std::iter::repeat_n(0.0, c.members()[0].len() - 1));
    for (vc, ids) in v.iter().zip(c.members()).skip(1) {
        out.extend(std::iter::repeat_n(vc - v[0], ids.len()));
    }
    Ok(out)
}

/// Breakdown of one critical oscillator's contribution T^(k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalTerm {
    /// 1-based index K(k).
    pub index: usize,
    pub kind: Extremum,
    /// σ_k·[Γ(θ̃_K) − Γ(ψ̃_K)].
    pub own: f64,
    /// (j, σ_k·[Γ(θ̃_K − θ̃_j) − Γ(ψ̃_K − ψ̃_j)]) for j ≠ K, 1-based.
    pub pairwise: Vec<(usize, f64)>,
    /// σ_k·(θ̃̇_K − ψ̃̇_K).
    pub total: f64,
}

/// Analytic derivative of the alternating sum along two orbits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeTerms {
    pub terms: Vec<CriticalTerm>,
    /// T_Σ = −Σ_j [Γ(−θ̃_j) − Γ(−ψ̃_j)], shared by every term.
    pub t_sigma: f64,
    /// Σ_k σ_k·T_Σ: zero for an even number of critical oscillators, ±T_Σ
    /// for an odd one.
    pub t_sigma_net: f64,
    /// Σ_k T^(k), the rate of change of the alternating sum.
    pub total: f64,
    /// 2·total, the rate of change of the total-variation distance.
    pub distance_rate: f64,
}

/// T^(k) terms for two interior states x ≠ y.
pub fn derivative_terms(
    p: &ModelParams,
    x: &ReducedState,
    y: &ReducedState,
) -> Result<DerivativeTerms> {
    let fx = reduced_vector_field(p, x)?;
    let fy = reduced_vector_field(p, y)?;
    let cs = CriticalSet::from_differences(&difference(x, y)?)?;
    let g = p.gamma();
    let (dx, dy) = (x.diffs(), y.diffs());
    let t_sigma = -dx
        .iter()
        .zip(dy)
        .map(|(&a, &b)| g.value(-a) - g.value(-b))
        .sum::<f64>();

    let mut terms = Vec::with_capacity(cs.n_c());
    let mut total = 0.0;
    let mut t_sigma_net = 0.0;
    for (idx, kind) in cs.iter() {
        let k = idx - 1;
        let sigma = kind.sign();
        let own = sigma * (g.value(dx[k]) - g.value(dy[k]));
        let pairwise = (0..dx.len())
            .filter(|&j| j != k)
            .map(|j| {
                (
                    j + 1,
                    sigma * (g.value(dx[k] - dx[j]) - g.value(dy[k] - dy[j])),
                )
            })
            .collect();
        let t = sigma * (fx[k] - fy[k]);
        total += t;
        t_sigma_net += sigma * t_sigma;
        terms.push(CriticalTerm {
            index: idx,
            kind,
            own,
            pairwise,
            total: t,
        });
    }
    Ok(DerivativeTerms {
        terms,
        t_sigma,
        t_sigma_net,
        total,
        distance_rate: 2.0 * total,
    })
}

/// 2·Σ_k σ_k (v_x − v_y)_{K(k)}: the distance rate for two states whose
/// coordinate velocities are already known. Works on boundary cones, where
/// the velocities come from the cluster dynamics.
pub fn distance_rate_from_velocities(
    x: &ReducedState,
    y: &ReducedState,
    vx: &[f64],
    vy: &[f64],
) -> Result<f64> {
    let cs = CriticalSet::from_differences(&difference(x, y)?)?;
    if vx.len() != x.diffs().len() || vy.len() != y.diffs().len() {
        return Err(Error::DimensionMismatch {
            expected: x.diffs().len(),
            actual: vx.len().min(vy.len()),
        });
    }
    Ok(2.0
        * cs.iter()
            .map(|(i, kind)| kind.sign() * (vx[i - 1] - vy[i - 1]))
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::splay_state;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn dec() -> ModelParams {
        ModelParams::new(CouplingFunction::expfam(1, 0.1, 10).unwrap(), 1.0, 10).unwrap()
    }

    fn inc() -> ModelParams {
        ModelParams::new(CouplingFunction::expfam(-1, 0.1, 10).unwrap(), 1.0, 10).unwrap()
    }

    fn zero(n: usize) -> ModelParams {
        let g = CouplingFunction::tabulated(&[[1.0, 0.0], [2.0, 0.0]]).unwrap();
        ModelParams::unclassified(g, 0.7, n).unwrap()
    }

    fn random_interior(rng: &mut ChaCha8Rng, n: usize) -> ReducedState {
        loop {
            let mut v: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.0..TAU)).collect();
            v.sort_by(f64::total_cmp);
            let r = ReducedState::new(v).unwrap();
            if cone_location(&r, 1e-6).is_interior() {
                return r;
            }
        }
    }

    #[test]
    fn model_requires_admissible_coupling() {
        let sine = CouplingFunction::from_fn("sin", f64::sin);
        assert_eq!(
            ModelParams::new(sine, 1.0, 3).unwrap_err(),
            Error::NotMonotone
        );
        assert!(ModelParams::new(CouplingFunction::expfam(1, 0.1, 10).unwrap(), 1.0, 1).is_err());
    }

    #[test]
    fn full_field_two_oscillators() {
        let p = ModelParams::new(CouplingFunction::expfam(1, 0.1, 10).unwrap(), 1.0, 2).unwrap();
        let v = full_vector_field(&p, &AbsoluteState::new(vec![0.0, PI]).unwrap()).unwrap();
        assert_relative_eq!(v[0], 1.0143213918263772, epsilon = 1e-15);
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn uncoupled_field_is_omega() {
        let p = zero(4);
        let v =
            full_vector_field(&p, &AbsoluteState::new(vec![0.1, 0.2, 3.0, 5.0]).unwrap()).unwrap();
        assert!(v.iter().all(|&x| x == 0.7));
    }

    #[test]
    fn full_field_rejects_collision() {
        let p = ModelParams::unclassified(CouplingFunction::expfam(1, 0.1, 3).unwrap(), 1.0, 3)
            .unwrap();
        let err = full_vector_field(&p, &AbsoluteState::new(vec![0.1, 2.0, 0.1]).unwrap());
        assert_eq!(
            err,
            Err(Error::SynchronizedPair {
                first: 1,
                second: 3
            })
        );
    }

    #[test]
    fn splay_is_a_common_rotation() {
        for p in [dec(), inc()] {
            let abs = splay_state(10).unwrap().to_absolute(0.4).unwrap();
            let v = full_vector_field(&p, &abs).unwrap();
            for x in &v {
                assert_relative_eq!(*x, v[0], epsilon = 1e-13);
            }
            let r = reduced_vector_field(&p, &splay_state(10).unwrap()).unwrap();
            assert!(r.iter().all(|x| x.abs() < 1e-13));
        }
    }

    #[test]
    fn two_oscillator_reduced_field() {
        let p = ModelParams::new(CouplingFunction::expfam(1, 0.1, 10).unwrap(), 0.0, 2).unwrap();
        let g = p.gamma().clone();
        let s = ReducedState::new(vec![1.0]).unwrap();
        let v = reduced_vector_field(&p, &s).unwrap();
        assert_relative_eq!(v[0], g.value(1.0) - g.value(TAU - 1.0), epsilon = 1e-16);
        let s = ReducedState::new(vec![PI]).unwrap();
        assert_eq!(reduced_vector_field(&p, &s).unwrap()[0], 0.0);
    }

    #[test]
    fn reduced_field_rejects_boundary() {
        let p = dec();
        let mut d = splay_state(10).unwrap().diffs().to_vec();
        d[3] = d[2];
        let s = ReducedState::new(d).unwrap();
        assert_eq!(
            reduced_vector_field(&p, &s),
            Err(Error::SynchronizedPair {
                first: 4,
                second: 5
            })
        );
    }

    #[test]
    fn reduced_field_matches_differences_of_full_field() {
        // brute force: sort oscillators 2..N by offset and subtract θ̇_1
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [dec(), inc()] {
            for _ in 0..50 {
                let phases: Vec<f64> = (0..10).map(|_| rng.gen_range(0.0..TAU)).collect();
                let abs = AbsoluteState::new(phases).unwrap();
                let full = full_vector_field(&p, &abs).unwrap();
                let th = abs.phases();
                let mut order: Vec<usize> = (1..10).collect();
                order.sort_by(|&a, &b| {
                    let oa = (th[a] - th[0]).rem_euclid(TAU);
                    let ob = (th[b] - th[0]).rem_euclid(TAU);
                    oa.total_cmp(&ob)
                });
                let red = reduced_vector_field(&p, &abs.reduce()).unwrap();
                for (k, &osc) in order.iter().enumerate() {
                    assert_relative_eq!(red[k], full[osc] - full[0], epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn cluster_field_examples() {
        let p = ModelParams::new(CouplingFunction::expfam(-1, 0.1, 3).unwrap(), 1.3, 3).unwrap();
        let g = p.gamma().clone();
        let full_sync = ClusterState::new(vec![0.2], &[3]).unwrap();
        assert_eq!(
            cluster_vector_field(&p, &full_sync).unwrap(),
            vec![1.3 + 2.0 * g.value_at_zero()]
        );
        let (a, b) = (0.5, 2.5);
        let c = ClusterState::new(vec![a, b], &[2, 1]).unwrap();
        let v = cluster_vector_field(&p, &c).unwrap();
        assert_eq!(v[0], 1.3 + g.value_at_zero() + g.value(a - b));
        assert_eq!(v[1], 1.3 + 2.0 * g.value(b - a));
    }

    #[test]
    fn unit_clusters_reproduce_full_field_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = dec();
        for _ in 0..20 {
            let mut phases: Vec<f64> = (0..10).map(|_| rng.gen_range(0.0..TAU)).collect();
            phases.sort_by(f64::total_cmp);
            let c = ClusterState::new(phases.clone(), &[1; 10]).unwrap();
            let abs = AbsoluteState::new(phases).unwrap();
            assert_eq!(
                cluster_vector_field(&p, &c).unwrap(),
                full_vector_field(&p, &abs).unwrap()
            );
        }
    }

    #[test]
    fn cluster_reduced_velocities_match_reduced_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = inc();
        let x = random_interior(&mut rng, 10);
        let c = ClusterState::from_reduced(&x, 0.0, 0.0).unwrap();
        let a = cluster_reduced_velocities(&p, &c).unwrap();
        let b = reduced_vector_field(&p, &x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert_relative_eq!(*u, *v, epsilon = 1e-13);
        }
    }

    #[test]
    fn derivative_terms_components_add_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = dec();
        for _ in 0..100 {
            let x = random_interior(&mut rng, 10);
            let y = random_interior(&mut rng, 10);
            let dt = derivative_terms(&p, &x, &y).unwrap();
            for t in &dt.terms {
                let sigma = t.kind.sign();
                let parts =
                    t.own + t.pairwise.iter().map(|(_, v)| v).sum::<f64>() + sigma * dt.t_sigma;
                assert_relative_eq!(parts, t.total, epsilon = 1e-12);
            }
            let expected_net = if dt.terms.len().is_multiple_of(2) {
                0.0
            } else {
                dt.terms[0].kind.sign() * dt.t_sigma
            };
            assert_relative_eq!(dt.t_sigma_net, expected_net, epsilon = 1e-15);
            assert_eq!(dt.distance_rate, 2.0 * dt.total);
        }
    }

    #[test]
    fn derivative_sign_follows_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let x = random_interior(&mut rng, 10);
            let y = random_interior(&mut rng, 10);
            assert!(derivative_terms(&dec(), &x, &y).unwrap().total < 0.0);
            assert!(derivative_terms(&inc(), &x, &y).unwrap().total > 0.0);
        }
    }

    #[test]
    fn derivative_terms_errors() {
        let p = dec();
        let s = splay_state(10).unwrap();
        assert_eq!(derivative_terms(&p, &s, &s), Err(Error::EmptyDecomposition));
        let mut d = s.diffs().to_vec();
        d[0] = 0.0;
        let b = ReducedState::new(d).unwrap();
        assert!(matches!(
            derivative_terms(&p, &b, &s),
            Err(Error::SynchronizedPair { .. })
        ));
    }

    #[test]
    fn velocity_route_agrees_with_derivative_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = inc();
        let x = random_interior(&mut rng, 10);
        let y = random_interior(&mut rng, 10);
        let vx = reduced_vector_field(&p, &x).unwrap();
        let vy = reduced_vector_field(&p, &y).unwrap();
        let a = distance_rate_from_velocities(&x, &y, &vx, &vy).unwrap();
        assert_eq!(a, derivative_terms(&p, &x, &y).unwrap().distance_rate);
    }
}
