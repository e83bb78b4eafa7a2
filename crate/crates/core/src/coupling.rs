//! Coupling functions.
//!
//! A coupling function Γ is 2π-periodic, smooth on the open interval (0, 2π)
//! and, being strictly monotone there, necessarily discontinuous at 0. The
//! value taken exactly at 0 (equivalently at 2π) only matters inside a
//! synchronized cluster; it defaults to the midpoint of the two one-sided
//! limits and can be overridden.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Default number of interior grid points used by [`CouplingFunction::classify`].
pub const DEFAULT_CLASSIFY_SAMPLES: usize = 1024;

/// Default central-difference step for Γ′ when no analytic derivative is known.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Relative curvature tie tolerance (scaled by max |Γ| on the sample grid).
pub const DEFAULT_CURVATURE_TOL: f64 = 1e-12;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Serializable description of a built-in coupling family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum CouplingDescriptor {
    /// Γ(θ) = s·(a + e^{−θ})/N.
    Expfam {
        s: i32,
        a: f64,
        #[serde(rename = "N", alias = "n")]
        n: usize,
    },
    /// Γ(θ) = slope·θ + intercept.
    Affine { slope: f64, intercept: f64 },
    /// Piecewise-linear interpolation of (θ, Γ(θ)) knots, extended linearly
    /// from the end segments towards 0 and 2π.
    Tabulated { knots: Vec<[f64; 2]> },
}

impl fmt::Display for CouplingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingDescriptor::Expfam { s, a, n } => {
                write!(f, "expfam{{s={s:+},a={a},N={n}}}")
            }
            CouplingDescriptor::Affine { slope, intercept } => {
                write!(f, "affine{{slope={slope},intercept={intercept}}}")
            }
            CouplingDescriptor::Tabulated { knots } => {
                write!(f, "tabulated{{{} knots}}", knots.len())
            }
        }
    }
}

/// e^{−2π}, so that e^{−(2π−r)} = e^{−2π}/e^{−r}.
const EXP_MINUS_TAU: f64 = 0.0018674427317079893;

#[derive(Clone)]
enum Shape {
    Exp { scale: f64, a: f64 },
    Affine { slope: f64, intercept: f64 },
    Tabulated { theta: Vec<f64>, value: Vec<f64> },
    Custom { f: ScalarFn, df: Option<ScalarFn> },
}

impl Shape {
    #[inline]
    fn open(&self, theta: f64) -> f64 {
        match self {
            Shape::Exp { scale, a } => scale * (a + (-theta).exp()),
            Shape::Affine { slope, intercept } => slope * theta + intercept,
            Shape::Tabulated {
                theta: xs,
                value: ys,
            } => {
                let seg = xs.partition_point(|&x| x <= theta).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[seg - 1], xs[seg]);
                let (y0, y1) = (ys[seg - 1], ys[seg]);
                y0 + (y1 - y0) * (theta - x0) / (x1 - x0)
            }
            Shape::Custom { f, .. } => f(theta),
        }
    }

    fn slope(&self, theta: f64, fd_step: f64) -> f64 {
        match self {
            Shape::Exp { scale, .. } => -scale * (-theta).exp(),
            Shape::Affine { slope, .. } => *slope,
            Shape::Tabulated {
                theta: xs,
                value: ys,
            } => {
                let seg = xs.partition_point(|&x| x <= theta).clamp(1, xs.len() - 1);
                (ys[seg] - ys[seg - 1]) / (xs[seg] - xs[seg - 1])
            }
            Shape::Custom { df: Some(df), .. } => df(theta),
            Shape::Custom { f, df: None } => {
                let h = fd_step.min(theta / 2.0).min((TAU - theta) / 2.0);
                (f(theta + h) - f(theta - h)) / (2.0 * h)
            }
        }
    }
}

/// Direction of strict monotonicity on (0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

impl Monotonicity {
    /// Sign of Γ′: +1 for increasing, −1 for decreasing.
    pub fn sign(self) -> f64 {
        match self {
            Monotonicity::Increasing => 1.0,
            Monotonicity::Decreasing => -1.0,
        }
    }
}

/// Sign of Γ″ on (0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Convex,
    Concave,
    Affine,
}

/// Sampled shape class of a coupling function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingClass {
    pub monotonicity: Monotonicity,
    pub curvature: Curvature,
}

/// A 2π-periodic coupling function, discontinuous at 0.
///
/// The function is described by its branch on the open interval (0, 2π),
/// which must extend continuously to the closed interval [0, 2π]; the
/// endpoint values of that extension are the one-sided limits Γ(0⁺) and
/// Γ(2π⁻). The periodic function itself takes the separate value
/// [`value_at_zero`](Self::value_at_zero) at every multiple of 2π.
///
/// Values are immutable once built and can be shared between threads.
#[derive(Clone)]
pub struct CouplingFunction {
    shape: Shape,
    value_at_zero: f64,
    fd_step: f64,
    id: String,
    descriptor: Option<CouplingDescriptor>,
}

impl fmt::Debug for CouplingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CouplingFunction")
            .field("id", &self.id)
            .field("value_at_zero", &self.value_at_zero)
            .finish()
    }
}

impl CouplingFunction {
    fn from_shape(shape: Shape, id: String, descriptor: Option<CouplingDescriptor>) -> Self {
        let mid = 0.5 * (shape.open(0.0) + shape.open(TAU));
        CouplingFunction {
            shape,
            value_at_zero: mid,
            fd_step: DEFAULT_FD_STEP,
            id,
            descriptor,
        }
    }

    /// The exponential family Γ(θ) = s·(a + e^{−θ})/N.
    ///
    /// `s = +1` gives a decreasing convex coupling, `s = −1` an increasing
    /// concave one.
    pub fn expfam(s: i32, a: f64, n: usize) -> Result<Self> {
        if s != 1 && s != -1 {
            return Err(param("s", format!("must be +1 or -1, got {s}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(param(
                "a",
                format!("must be a positive finite number, got {a}"),
            ));
        }
        if n < 2 {
            return Err(param("N", format!("must be at least 2, got {n}")));
        }
        let d = CouplingDescriptor::Expfam { s, a, n };
        let shape = Shape::Exp {
            scale: f64::from(s) / n as f64,
            a,
        };
        Ok(Self::from_shape(shape, d.to_string(), Some(d)))
    }

    /// Γ(θ) = slope·θ + intercept on (0, 2π).
    pub fn affine(slope: f64, intercept: f64) -> Result<Self> {
        if !slope.is_finite() {
            return Err(param("slope", "must be finite"));
        }
        if !intercept.is_finite() {
            return Err(param("intercept", "must be finite"));
        }
        let d = CouplingDescriptor::Affine { slope, intercept };
        Ok(Self::from_shape(
            Shape::Affine { slope, intercept },
            d.to_string(),
            Some(d),
        ))
    }

    /// Piecewise-linear coupling through `(θ, Γ(θ))` knots.
    ///
    /// Knot abscissae must be strictly increasing inside (0, 2π); at least two
    /// knots are required. Outside the first and last knots the end segments
    /// are extended linearly up to 0 and 2π.
    pub fn tabulated(knots: &[[f64; 2]]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(param("knots", "at least two knots are required"));
        }
        for (i, k) in knots.iter().enumerate() {
            if !(k[0].is_finite() && k[1].is_finite()) {
                return Err(param("knots", format!("knot {i} is not finite")));
            }
            if !(k[0] > 0.0 && k[0] < TAU) {
                return Err(param(
                    "knots",
                    format!("knot {i} abscissa {} outside (0, 2π)", k[0]),
                ));
            }
            if i > 0 && k[0] <= knots[i - 1][0] {
                return Err(param(
                    "knots",
                    format!("abscissae not strictly increasing at knot {i}"),
                ));
            }
        }
        let d = CouplingDescriptor::Tabulated {
            knots: knots.to_vec(),
        };
        let shape = Shape::Tabulated {
            theta: knots.iter().map(|k| k[0]).collect(),
            value: knots.iter().map(|k| k[1]).collect(),
        };
        Ok(Self::from_shape(shape, d.to_string(), Some(d)))
    }

    /// Wraps an arbitrary closure as the branch on (0, 2π).
    ///
    /// The closure is also evaluated at 0 and 2π to obtain the one-sided
    /// limits, so it must extend continuously to the closed interval.
    pub fn from_fn<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_shape(
            Shape::Custom {
                f: Arc::new(f),
                df: None,
            },
            name.into(),
            None,
        )
    }

    /// Builds a coupling from its serializable descriptor.
    pub fn from_descriptor(d: &CouplingDescriptor) -> Result<Self> {
        match d {
            CouplingDescriptor::Expfam { s, a, n } => Self::expfam(*s, *a, *n),
            CouplingDescriptor::Affine { slope, intercept } => Self::affine(*slope, *intercept),
            CouplingDescriptor::Tabulated { knots } => Self::tabulated(knots),
        }
    }

    /// Attaches an analytic derivative to a closure-backed coupling. Built-in
    /// families already know theirs and ignore this.
    pub fn with_derivative<F>(mut self, df: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if let Shape::Custom { df: slot, .. } = &mut self.shape {
            *slot = Some(Arc::new(df));
        }
        self
    }

    /// Overrides Γ(0) = Γ(2π).
    pub fn with_value_at_zero(mut self, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(param("value_at_zero", "must be finite"));
        }
        self.value_at_zero = value;
        Ok(self)
    }

    /// Step used for central differences when Γ′ has no closed form.
    pub fn with_fd_step(mut self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 0.5) {
            return Err(param("fd_step", format!("must lie in (0, 0.5), got {h}")));
        }
        self.fd_step = h;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Descriptor of a built-in family; `None` for closure-backed couplings.
    pub fn descriptor(&self) -> Option<&CouplingDescriptor> {
        self.descriptor.as_ref()
    }

    /// Γ(0) = Γ(2π).
    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    /// Γ(0⁺), the right limit at 0 of the open branch.
    pub fn limit_at_zero(&self) -> f64 {
        self.shape.open(0.0)
    }

    /// Γ(2π⁻), the left limit at 2π of the open branch.
    pub fn limit_at_two_pi(&self) -> f64 {
        self.shape.open(TAU)
    }

    /// The continuous branch on [0, 2π]; `theta` is not range-checked.
    #[inline]
    pub fn eval_open(&self, theta: f64) -> f64 {
        self.shape.open(theta)
    }

    /// Periodic evaluation without the finiteness check. A non-finite argument
    /// produces a non-finite result.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let r = wrap_phase(x);
        if r == 0.0 {
            self.value_at_zero
        } else {
            self.shape.open(r)
        }
    }

    /// (Γ(δ), Γ(−δ)) in one go; the exponential family shares one `exp`.
    #[inline]
    pub(crate) fn value_pair(&self, delta: f64) -> (f64, f64) {
        if let Shape::Exp { scale, a } = self.shape {
            let r = wrap_phase(delta);
            if r > 0.0 && r < TAU {
                let e = (-r).exp();
                return (scale * (a + e), scale * (a + EXP_MINUS_TAU / e));
            }
        }
        (self.value(delta), self.value(-delta))
    }

    /// Γ(x) for any real x, using 2π-periodicity. Exact multiples of 2π
    /// return [`value_at_zero`](Self::value_at_zero).
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!(
                "coupling argument {x} is not finite"
            )));
        }
        Ok(self.value(x))
    }

    /// Γ′(x) at a point where Γ is smooth (x not a multiple of 2π).
    ///
    /// Uses the closed form when one is known and otherwise a central
    /// difference with step [`DEFAULT_FD_STEP`] (shrunk near the endpoints so
    /// the stencil stays inside (0, 2π)).
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!(
                "derivative argument {x} is not finite"
            )));
        }
        let r = wrap_phase(x);
        if r == 0.0 || r >= TAU {
            return Err(Error::Domain("Γ′ is undefined at the discontinuity".into()));
        }
        Ok(self.shape.slope(r, self.fd_step))
    }

    /// Numerical stand-ins `(Γ(h), Γ(2π − h))` for the one-sided limits at the
    /// discontinuity. Each differs from the true limit by O(h) for smooth Γ.
    pub fn one_sided_limits(&self, h: f64) -> Result<(f64, f64)> {
        if !(h > 0.0 && h < std::f64::consts::PI) {
            return Err(param("h", format!("must lie in (0, π), got {h}")));
        }
        Ok((self.shape.open(h), self.shape.open(TAU - h)))
    }

    /// Classifies monotonicity and curvature from samples on the uniform
    /// interior grid θ_i = 2πi/(n+1), i = 1..n.
    ///
    /// `tol` is the absolute tolerance under which a second difference counts
    /// as zero; `None` uses `1e-12 · max |Γ|` over the grid.
    pub fn classify(&self, n_samples: usize, tol: Option<f64>) -> Result<CouplingClass> {
        if n_samples < 3 {
            return Err(param(
                "n_samples",
                format!("must be at least 3, got {n_samples}"),
            ));
        }
        let step = TAU / (n_samples as f64 + 1.0);
        let values: Vec<f64> = (1..=n_samples)
            .map(|i| self.shape.open(i as f64 * step))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "coupling is not finite at θ = {}",
                (i + 1) as f64 * step
            )));
        }
        let tol = match tol {
            Some(t) if t >= 0.0 => t,
            Some(t) => return Err(param("tol", format!("must be non-negative, got {t}"))),
            None => DEFAULT_CURVATURE_TOL * values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        };

        let first: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let monotonicity = if first.iter().all(|&d| d > 0.0) {
            Monotonicity::Increasing
        } else if first.iter().all(|&d| d < 0.0) {
            Monotonicity::Decreasing
        } else {
            return Err(Error::NotMonotone);
        };

        let second = first.windows(2).map(|w| w[1] - w[0]);
        let (mut pos, mut neg) = (false, false);
        for d in second {
            pos |= d > tol;
            neg |= d < -tol;
        }
        let curvature = match (pos, neg) {
            (false, false) => Curvature::Affine,
            (true, false) => Curvature::Convex,
            (false, true) => Curvature::Concave,
            (true, true) => return Err(Error::MixedCurvature),
        };
        Ok(CouplingClass {
            monotonicity,
            curvature,
        })
    }
}

/// Reduces a phase into [0, 2π]. The upper endpoint is returned only when
/// `x` lies just below a multiple of 2π and the sum rounds up; callers treat
/// it as the left limit Γ(2π⁻), never as Γ(0).
#[inline]
pub fn wrap_phase(x: f64) -> f64 {
    if (0.0..TAU).contains(&x) {
        x
    } else if (-TAU..0.0).contains(&x) {
        x + TAU
    } else {
        x.rem_euclid(TAU)
    }
}
