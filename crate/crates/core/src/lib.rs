//! Simulation and numerical certification of networks of identical phase
//! oscillators coupled all-to-all through a strictly monotone, discontinuous
//! coupling function.
//!
//! With a decreasing coupling the rotating-frame dynamics contract the
//! total-variation distance between any two orbits, and every interior
//! orbit converges to the splay state. With an increasing coupling they
//! expand it, and oscillators merge pairwise until the whole network is
//! synchronized in finite time. The modules here implement the dynamics, the
//! distance and its analytic rate, an event-driven integrator, and batch
//! experiments that check both behaviours.

// `!(x >= 0.0)` style checks are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod state;

pub use coupling::{CouplingClass, CouplingDescriptor, CouplingFunction, Curvature, Monotonicity};
pub use dynamics::{
    cluster_vector_field, derivative_terms, full_vector_field, reduced_vector_field,
    DerivativeTerms, ModelParams,
};
pub use error::{Error, Result};
pub use integrator::{
    boundary_velocity_probe, simulate, step, InitialState, SimConfig, SyncEvent, Terminal,
    Trajectory,
};
pub use state::{
    alternating_sum, cone_location, critical_decomposition, splay_state, tv_distance,
    AbsoluteState, ClusterState, ConeKind, ConeLocation, CriticalSet, Extremum, ReducedState,
};
