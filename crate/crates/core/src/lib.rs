//! Networked continuous-time SIS epidemics with an infection-cap state
//! feedback controller.
//!
//! The model couples `n` sub-populations over a weighted directed graph.
//! Node `i` carries an infected fraction `x_i ∈ [0,1]` evolving as
//!
//! ```text
//! dx_i/dt = beta_i (1 - x_i) Σ_j a_ij x_j - gamma_i x_i            (open loop)
//! ```
//!
//! The controller scales each node's effective interaction strength by
//! `1 - c_i x_i`, which keeps `x_i(t)` inside `[0, 1/c_i]` for all time:
//!
//! ```text
//! dx_i/dt = beta_i (1 - c_i x_i)(1 - x_i) Σ_j a_ij x_j - gamma_i x_i
//! ```
//!
//! The long-run regime is decided by the spectral abscissa of the
//! linearization `BA - Γ` at the origin: extinction for `s ≤ 0`, a unique
//! endemic equilibrium `0 < x̄_i ≤ 1/c_i` for `s > 0`.
//!
//! Modules:
//! - [`graph`]: weighted interaction networks, geometric/clustered generators
//! - [`dynamics`]: parameters, open-loop / control / closed-loop vector fields
//! - [`spectral`]: spectral abscissa and Perron vectors of Metzler matrices
//! - [`equilibrium`]: regime classification and the endemic fixed-point solver
//! - [`integrate`]: RK4 / adaptive RK45 integration and convergence detection
//! - [`verify`]: machine checks of cap invariance, Lyapunov decrease,
//!   open-vs-closed suppression

pub mod dynamics;
pub mod equilibrium;
mod error;
pub mod graph;
pub mod integrate;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
