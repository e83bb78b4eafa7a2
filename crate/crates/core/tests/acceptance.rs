//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use monosync::experiments::{
    behavior_sweep, contraction_sweep, rng_for, sample_interior, BehaviorOptions, BehaviorSummary,
    ContractionOptions, ContractionReport, Verdict,
};
use monosync::state::{tv_norm, CriticalSet};
use monosync::{
    boundary_velocity_probe, derivative_terms, reduced_vector_field, splay_state, step,
    tv_distance, ClusterState, CouplingFunction, ModelParams, ReducedState, Terminal,
};
use rand::Rng;

const SEED: u64 = 20240601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn expfam(s: i32, n: usize) -> ModelParams {
    ModelParams::new(CouplingFunction::expfam(s, 0.1, 10).unwrap(), 1.0, n).unwrap()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// tv_distance = 2·alternating_sum on random difference vectors.
fn metric_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_for(SEED, 1);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 10_000 {
        let n = rng.gen_range(1..=12);
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        // no exact ties between neighbours (including the zero padding)
        let padded: Vec<f64> = std::iter::once(0.0)
            .chain(d.iter().copied())
            .chain([0.0])
            .collect();
        if padded.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let cs = CriticalSet::from_differences(&d).unwrap();
        let alt = cs.alternating_sum(&d).unwrap();
        worst = worst.max((tv_norm(&d) - 2.0 * alt).abs());
        count += 1;
    }
    let t = secs(start.elapsed());
    outcome(
        worst <= 1e-12 && t < 1.0,
        format!("10000 vectors, max |tv - 2*alt| = {worst:.3e} (tol 1e-12), {t:.3} s (limit 1 s)"),
    )
}

/// The splay state is a fixed point of the reduced field.
fn splay_fixed_point() -> Outcome {
    let mut worst = 0.0f64;
    for s in [1, -1] {
        for n in [2, 3, 5, 10, 50] {
            let splay = splay_state(n).unwrap();
            let normalizations = [10, n.max(2)];
            for norm in normalizations {
                let g = CouplingFunction::expfam(s, 0.1, norm).unwrap();
                let p = ModelParams::new(g, 1.0, n).unwrap();
                let f = reduced_vector_field(&p, &splay).unwrap();
                worst = worst.max(f.iter().fold(0.0, |m, v| m.max(v.abs())));
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("N in {{2,3,5,10,50}}, s = +1/-1, max |f(splay)| = {worst:.3e} (tol 1e-12)"),
    )
}

fn sweep_line(r: &ContractionReport) -> String {
    let stopped = r.pairs.iter().filter(|p| p.stopped_at.is_some()).count();
    format!(
        "{} {:?}: sign violations {}, monotonicity violations {}, pairs stopped at boundary {}",
        r.coupling_id,
        r.verdict,
        r.sign_violations(),
        r.monotonicity_violations(),
        stopped
    )
}

/// Open-cone contraction and mirrored expansion.
fn contraction_certificate() -> Outcome {
    let opts = ContractionOptions {
        dt: 1e-3,
        horizon: 50.0,
        monotonicity_tol: 1e-10,
        ..Default::default()
    };
    let start = Instant::now();
    let dec = match contraction_sweep(&expfam(1, 10), 100, SEED, &opts) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("decreasing sweep failed: {e}")),
    };
    let t = secs(start.elapsed());
    let inc = match contraction_sweep(&expfam(-1, 10), 100, SEED, &opts) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("increasing sweep failed: {e}")),
    };
    let pass = dec.verdict == Verdict::Contracting
        && dec.violations.is_empty()
        && inc.verdict == Verdict::Expanding
        && inc.violations.is_empty()
        && t < 60.0;
    outcome(
        pass,
        format!(
            "100 pairs, horizon 50, dt 1e-3, mono tol 1e-10; {}; {}; contracting sweep {t:.1} s (limit 60 s)",
            sweep_line(&dec),
            sweep_line(&inc)
        ),
    )
}

/// Same verdicts with states pinned to boundary cones.
fn cone_certificate() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for cone in [vec![1], vec![5], vec![3, 7]] {
        for (s, expected) in [(1, Verdict::Contracting), (-1, Verdict::Expanding)] {
            let opts = ContractionOptions {
                horizon: 20.0,
                cone: Some(cone.clone()),
                ..Default::default()
            };
            match contraction_sweep(&expfam(s, 10), 20, SEED, &opts) {
                Ok(r) => {
                    pass &= r.verdict == expected && r.violations.is_empty();
                    lines.push(format!(
                        "I={cone:?} s={s:+} {:?}/{}",
                        r.verdict,
                        r.violations.len()
                    ));
                }
                Err(e) => {
                    pass = false;
                    lines.push(format!("I={cone:?} s={s:+} error {e}"));
                }
            }
        }
    }
    outcome(
        pass,
        format!(
            "20 pairs per cone, horizon 20; verdict/violations: {}",
            lines.join(", ")
        ),
    )
}

/// Decreasing coupling: every trial converges to splay without merging.
fn splay_branch() -> Outcome {
    let opts = BehaviorOptions::default();
    let r = match behavior_sweep(&expfam(1, 10), 50, SEED, &opts) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let worst = r
        .trials
        .iter()
        .fold(0.0f64, |m, t| m.max(t.final_splay_deviation));
    let events: usize = r.trials.iter().map(|t| t.events.len()).sum();
    let spread = r.terminal_spread();
    let pass = r.summary == BehaviorSummary::AllSplay
        && worst < 1e-6
        && events == 0
        && spread <= 2.0 * opts.splay_tol;
    outcome(
        pass,
        format!(
            "50 trials {:?}; max splay deviation {worst:.3e} (tol 1e-6); sync events {events}; terminal spread {spread:.3e} (tol 2e-6)",
            r.summary
        ),
    )
}

/// Increasing coupling: every trial synchronizes fully in finite time.
fn sync_branch() -> Outcome {
    let opts = BehaviorOptions::default();
    let p = expfam(-1, 10);
    let r = match behavior_sweep(&p, 50, SEED, &opts) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let expected_v = p.omega() + 9.0 * p.gamma().value_at_zero();
    let mut pass = r.summary == BehaviorSummary::AllFullSync;
    let mut worst_v = 0.0f64;
    let mut latest = 0.0f64;
    let (mut min_ev, mut max_ev) = (usize::MAX, 0);
    for t in &r.trials {
        match t.terminal {
            Terminal::FullSync { t: ts } => {
                pass &= ts < opts.t_end;
                latest = latest.max(ts);
            }
            _ => pass = false,
        }
        pass &= t.final_multiplicities == vec![10];
        min_ev = min_ev.min(t.events.len());
        max_ev = max_ev.max(t.events.len());
        match t.sync_velocity {
            Some(v) => worst_v = worst_v.max((v - expected_v).abs()),
            None => pass = false,
        }
    }
    pass &= (1..=9).contains(&min_ev) && (1..=9).contains(&max_ev) && worst_v <= 1e-10;
    outcome(
        pass,
        format!(
            "50 trials {:?}; latest sync t = {latest:.2} (horizon {}); merges per trial {min_ev}..{max_ev} (allowed 1..9); max |v - (w + 9*G(0))| = {worst_v:.3e} (tol 1e-10)",
            r.summary, opts.t_end
        ),
    )
}

/// Velocities next to the three boundary kinds.
fn boundary_velocities() -> Outcome {
    let d = (1.0 - (-std::f64::consts::TAU).exp()) / 10.0;
    let v = boundary_velocity_probe(&expfam(1, 10), 1e-4).unwrap();
    let expected = [d, d, -d];
    let worst = v
        .iter()
        .zip(&expected)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    outcome(
        worst <= 1e-3,
        format!(
            "probe ({:.7}, {:.7}, {:.7}) vs (+d, +d, -d), d = {d:.7}; max error {worst:.3e} (tol 1e-3)",
            v[0], v[1], v[2]
        ),
    )
}

fn advance(p: &ModelParams, x: &ReducedState, h: f64) -> ReducedState {
    let c = ClusterState::from_reduced(x, 0.0, 0.0).unwrap();
    step(p, &c, h).to_reduced()
}

/// Analytic distance rate against a finite difference along the flow.
fn analytic_rate() -> Outcome {
    let h = 1e-6;
    let mut worst = 0.0f64;
    for s in [1, -1] {
        let p = expfam(s, 10);
        for i in 0..100 {
            let mut rng = rng_for(SEED + 8, i);
            let x = sample_interior(10, 1e-7, &mut rng).unwrap();
            let y = sample_interior(10, 1e-7, &mut rng).unwrap();
            let analytic = 2.0 * derivative_terms(&p, &x, &y).unwrap().total;
            let fd = (tv_distance(&advance(&p, &x, h), &advance(&p, &y, h)).unwrap()
                - tv_distance(&x, &y).unwrap())
                / h;
            worst = worst.max((analytic - fd).abs());
        }
    }
    outcome(
        worst <= 1e-4,
        format!("100 pairs per coupling, h = 1e-6, max |2*total - fd| = {worst:.3e} (tol 1e-4)"),
    )
}

fn figure4_files(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut sink = Vec::new();
    let mut err = Vec::new();
    let code = monosync::cli::run_with(
        [
            "monosync",
            "figure4",
            "--seed",
            "42",
            "-o",
            dir.to_str().unwrap(),
        ],
        &mut sink,
        &mut err,
    );
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

/// Two seeded reproduction runs write identical bytes.
fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = figure4_files(a.path());
    let fb = figure4_files(b.path());
    let bytes: usize = fa.iter().map(|(_, d)| d.len()).sum();
    outcome(
        !fa.is_empty() && fa == fb,
        format!(
            "figure4 --seed 42 twice: {} files, {bytes} bytes, identical = {}",
            fa.len(),
            fa == fb
        ),
    )
}

/// Fourth-order convergence of one RK4 step.
fn rk4_order() -> Outcome {
    let dt = 0.4;
    let mut ratios = Vec::new();
    for (i, s) in [1, -1].into_iter().cycle().take(10).enumerate() {
        let p = expfam(s, 10);
        let x = sample_interior(10, 0.2, &mut rng_for(SEED + 10, i as u64)).unwrap();
        let c = ClusterState::from_reduced(&x, 0.0, 0.0).unwrap();
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
        ratios.push(e1 / e2);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0f64, f64::max);
    outcome(
        lo >= 12.0 && hi <= 20.0,
        format!("10 states, dt = {dt}, error ratio range [{lo:.2}, {hi:.2}] (allowed [12, 20])"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("metric oracle equivalence", metric_identity),
        ("splay fixed point", splay_fixed_point),
        ("contraction certificate", contraction_certificate),
        ("boundary-cone certificate", cone_certificate),
        ("splay branch", splay_branch),
        ("sync branch", sync_branch),
        ("boundary velocities", boundary_velocities),
        ("analytic vs numeric rate", analytic_rate),
        ("determinism", determinism),
        ("RK4 order", rk4_order),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1} s]",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            secs(start.elapsed())
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
